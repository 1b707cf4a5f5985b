#include "hamnoise/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hamnoise/common.hpp"

namespace hamnoise {

void PropagatorConfig::validate() const {
  if (!(dt_max > 0.0) || !std::isfinite(dt_max)) {
    throw std::invalid_argument("PropagatorConfig: dt_max must be positive");
  }
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw std::invalid_argument("PropagatorConfig: tol must be positive");
  }
}

std::size_t step_count(double total_time, const PropagatorConfig& cfg, const StepScales& scales) {
  constexpr double c = 0.1;
  double dt = cfg.dt_max;
  if (scales.omega0 > 0.0) dt = std::min(dt, c / scales.omega0);
  if (scales.omega_max > 0.0) dt = std::min(dt, c / scales.omega_max);
  if (total_time <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(total_time / dt * (1.0 - 1e-12)));
}

namespace {

constexpr double kMaxSteps = 1e8;

// psi <- exp(-i H dt) psi with psi stored as columns [re, im].
void taylor_step(const Eigen::MatrixXd& h, double dt, Eigen::MatrixXd& psi, Eigen::MatrixXd& term,
                 Eigen::MatrixXd& tmp) {
  const double hnorm = h.cwiseAbs().rowwise().sum().maxCoeff();
  const int sub = std::max(1, static_cast<int>(std::ceil(hnorm * std::abs(dt))));
  const double tau = dt / sub;
  for (int r = 0; r < sub; ++r) {
    term = psi;
    const double base = psi.norm();
    for (int k = 1; k < 60; ++k) {
      tmp.noalias() = h * term;
      // (-i tau / k) * (re + i im) = (tau/k) im - i (tau/k) re
      const double f = tau / k;
      term.col(0) = f * tmp.col(1);
      term.col(1) = -f * tmp.col(0);
      psi += term;
      if (term.norm() <= 1e-17 * base) break;
    }
  }
}

Eigen::VectorXcd to_complex(const Eigen::MatrixXd& psi) {
  Eigen::VectorXcd out(psi.rows());
  for (Eigen::Index i = 0; i < psi.rows(); ++i) out[i] = {psi(i, 0), psi(i, 1)};
  return out;
}

Eigen::MatrixXd to_split(const Eigen::VectorXcd& psi) {
  Eigen::MatrixXd out(psi.size(), 2);
  out.col(0) = psi.real();
  out.col(1) = psi.imag();
  return out;
}

void check_finite(const Eigen::MatrixXd& h, double t) {
  if (!h.allFinite()) throw NumericError("non-finite Hamiltonian at t=" + std::to_string(t));
}

// Leading local error of the midpoint exponential is dt^3 times roughly
// |[H', H]| / 12 + |H''| / 24. Sampled on a uniform grid, derivatives by
// central differences.
double midpoint_error_constant(const HamiltonianFn& h, double total_time, double dt_rule,
                               Eigen::Index n) {
  constexpr int kSamples = 256;
  const double fd = 0.05 * dt_rule;
  Eigen::MatrixXd hm(n, n), hp(n, n), h0(n, n), d1(n, n), d2(n, n);
  double k = 0.0;
  for (int j = 0; j < kSamples; ++j) {
    const double t = std::clamp(total_time * (j + 0.5) / kSamples, fd, total_time - fd);
    h(t - fd, hm);
    h(t, h0);
    h(t + fd, hp);
    d1 = (hp - hm) / (2.0 * fd);
    d2 = (hp - 2.0 * h0 + hm) / (fd * fd);
    const double comm = (d1 * h0 - h0 * d1).norm();
    k = std::max(k, comm / 12.0 + d2.norm() / 24.0);
  }
  return k;
}

}  // namespace

Propagation propagate(const HamiltonianFn& h, const Eigen::VectorXcd& psi0, double total_time,
                      const PropagatorConfig& cfg, const StepScales& scales) {
  cfg.validate();
  if (!(total_time >= 0.0)) throw std::invalid_argument("propagate: T must be nonnegative");
  if (std::abs(psi0.norm() - 1.0) > 1e-12) throw std::invalid_argument("propagate: psi0 not normalized");
  Propagation out;
  out.steps = step_count(total_time, cfg, scales);
  if (out.steps == 0) {
    out.state = psi0;
    return out;
  }
  const auto n = psi0.size();
  if (cfg.method == Method::MagnusMidpoint) {
    const double dt_rule = total_time / static_cast<double>(out.steps);
    const double k = midpoint_error_constant(h, total_time, dt_rule, n);
    if (k > 0.0 && std::isfinite(k)) {
      const double dt_tol = std::cbrt(cfg.tol / k);
      if (dt_tol < dt_rule) {
        const double want = std::ceil(total_time / dt_tol);
        if (!(want <= kMaxSteps)) {
          throw NumericError("propagate: tol " + std::to_string(cfg.tol) + " needs more than " +
                             std::to_string(static_cast<long long>(kMaxSteps)) + " steps");
        }
        out.steps = static_cast<std::size_t>(want);
      }
    }
  }
  const double dt = total_time / static_cast<double>(out.steps);
  Eigen::MatrixXd hm(n, n);
  double max_drift = 0.0;

  if (cfg.method == Method::MagnusMidpoint) {
    Eigen::MatrixXd psi = to_split(psi0), term(n, 2), tmp(n, 2);
    for (std::size_t i = 0; i < out.steps; ++i) {
      const double tm = (static_cast<double>(i) + 0.5) * dt;
      h(tm, hm);
      check_finite(hm, tm);
      taylor_step(hm, dt, psi, term, tmp);
      if (cfg.renormalize) {
        max_drift = std::max(max_drift, std::abs(psi.norm() - 1.0));
        psi /= psi.norm();
      }
    }
    out.state = to_complex(psi);
  } else {
    const std::complex<double> mi(0.0, -1.0);
    Eigen::VectorXcd psi = psi0, k1, k2, k3, k4;
    Eigen::MatrixXd ha(n, n), hb(n, n), hc(n, n);
    h(0.0, ha);
    for (std::size_t i = 0; i < out.steps; ++i) {
      const double t = static_cast<double>(i) * dt;
      h(t + 0.5 * dt, hb);
      h(t + dt, hc);
      check_finite(hb, t);
      check_finite(hc, t);
      k1 = mi * (ha.cast<std::complex<double>>() * psi);
      k2 = mi * (hb.cast<std::complex<double>>() * (psi + 0.5 * dt * k1));
      k3 = mi * (hb.cast<std::complex<double>>() * (psi + 0.5 * dt * k2));
      k4 = mi * (hc.cast<std::complex<double>>() * (psi + dt * k3));
      psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (cfg.renormalize) {
        max_drift = std::max(max_drift, std::abs(psi.norm() - 1.0));
        psi /= psi.norm();
      }
      std::swap(ha, hc);
    }
    out.state = psi;
  }
  if (!out.state.allFinite()) throw NumericError("propagate: non-finite state");
  out.norm_drift = cfg.renormalize ? max_drift : std::abs(out.state.norm() - 1.0);
  return out;
}

TrialRunner::TrialRunner(const ProblemInstance& inst, const NoiseModel& noise,
                         const PropagatorConfig& cfg)
    : inst_(inst), noise_(noise), cfg_(cfg) {
  inst_.validate();
  noise_.validate();
  cfg_.validate();
  if (noise_.n_dim != inst_.n_dim) throw std::invalid_argument("TrialRunner: dimension mismatch");
  const std::size_t n = inst_.n_dim;
  psi0_ = uniform_state(n).cast<std::complex<double>>();
  scales_.omega0 = noise_.omega0;
  if (inst_.variant == Variant::Analog) {
    h_const_ = analog_hamiltonian(inst_);
    total_time_ = analog_run_time(inst_);
    const double x = 1.0 / std::sqrt(static_cast<double>(n));
    scales_.omega_max = n >= 3 ? (1.0 + x) * inst_.e_bar : 2.0 * x * inst_.e_bar;
  } else {
    schedule_ = std::make_shared<const Schedule>(inst_);
    h0_ = adiabatic_hamiltonian(inst_, 0.0);
    hf_ = adiabatic_hamiltonian(inst_, 1.0);
    total_time_ = schedule_->total_time();
    scales_.omega_max = inst_.e_bar;
  }
  const Propagation ideal = propagate(ideal_hamiltonian(), psi0_, total_time_, cfg_, scales_);
  ideal_state_ = ideal.state;
  ideal_p_err_ = 1.0 - std::norm(ideal_state_[static_cast<Eigen::Index>(inst_.marked)]);
}

HamiltonianFn TrialRunner::ideal_hamiltonian() const {
  if (inst_.variant == Variant::Analog) {
    return [this](double, Eigen::MatrixXd& h) { h = h_const_; };
  }
  return [this](double t, Eigen::MatrixXd& h) {
    const double s = schedule_->s_of_t(t);
    h = (1.0 - s) * h0_ + s * hf_;
  };
}

TrialResult TrialRunner::run(std::uint64_t trial_index) const {
  const NoisePath path = NoisePath::build(noise_, derive_seed(noise_.seed, trial_index));
  return run_with_path(path, trial_index);
}

TrialResult TrialRunner::run_with_path(const NoisePath& path, std::uint64_t trial_index) const {
  const HamiltonianFn ideal = ideal_hamiltonian();
  const double eps = noise_.epsilon;
  Eigen::MatrixXd noise_buf;
  HamiltonianFn full = [&](double t, Eigen::MatrixXd& h) {
    ideal(t, h);
    if (eps != 0.0) {
      path.eval_at(t, noise_buf);
      h.noalias() += eps * noise_buf;
    }
  };
  TrialResult r;
  r.trial_index = trial_index;
  r.seed_used = path.seed();
  Propagation p;
  try {
    p = propagate(full, psi0_, total_time_, cfg_, scales_);
  } catch (const NumericError& e) {
    throw NumericError(std::string(e.what()) + " (trial " + std::to_string(trial_index) +
                       ", seed " + std::to_string(path.seed()) + ")");
  }
  if (p.norm_drift >= 10.0 * cfg_.tol) {
    throw NumericError("norm drift " + std::to_string(p.norm_drift) + " exceeds 10*tol (trial " +
                       std::to_string(trial_index) + ")");
  }
  r.final_state = p.state;
  r.norm_drift = p.norm_drift;
  r.steps = p.steps;
  r.fidelity = std::norm(ideal_state_.dot(p.state));
  const double success = std::norm(p.state[static_cast<Eigen::Index>(inst_.marked)]);
  if (inst_.variant == Variant::Analog) {
    r.p_err_definition = PerrDefinition::VsIdealState;
    r.p_err = 1.0 - r.fidelity;
    r.p_err_alt = 1.0 - success;
  } else {
    r.p_err_definition = PerrDefinition::VsInstantGround;
    r.p_err = 1.0 - success;
    r.p_err_alt = 1.0 - r.fidelity;
  }
  return r;
}

TrialResult run_trial(const ProblemInstance& inst, const NoiseModel& noise,
                      std::uint64_t trial_index, const PropagatorConfig& cfg) {
  return TrialRunner(inst, noise, cfg).run(trial_index);
}

}  // namespace hamnoise
