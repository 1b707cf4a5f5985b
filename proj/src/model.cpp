#include "hamnoise/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace hamnoise {

void ProblemInstance::validate() const {
  if (n_dim == 0) throw std::invalid_argument("ProblemInstance: n_dim must be positive");
  if (marked >= n_dim) throw std::invalid_argument("ProblemInstance: marked index out of range");
  if (!(e_bar > 0.0) || !std::isfinite(e_bar)) {
    throw std::invalid_argument("ProblemInstance: e_bar must be positive");
  }
  if (variant == Variant::Adiabatic) {
    if (!(delta > 0.0) || !(delta < 1.0)) {
      throw std::invalid_argument("ProblemInstance: adiabatic delta must lie in (0, 1)");
    }
    if (n_dim < 2) throw std::invalid_argument("ProblemInstance: adiabatic search needs N >= 2");
  }
}

ProblemInstance ProblemInstance::analog(std::size_t n, double e_bar, std::size_t marked) {
  ProblemInstance p;
  p.variant = Variant::Analog;
  p.n_dim = n;
  p.e_bar = e_bar;
  p.marked = marked;
  p.validate();
  return p;
}

ProblemInstance ProblemInstance::adiabatic(std::size_t n, double delta, double e_bar,
                                           std::size_t marked) {
  ProblemInstance p;
  p.variant = Variant::Adiabatic;
  p.n_dim = n;
  p.delta = delta;
  p.e_bar = e_bar;
  p.marked = marked;
  p.validate();
  return p;
}

Eigen::VectorXd uniform_state(std::size_t n) {
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(static_cast<double>(n)));
}

Eigen::MatrixXd SpectrumView::degenerate_basis() const {
  if (vectors.cols() <= 2) return Eigen::MatrixXd(vectors.rows(), 0);
  return vectors.rightCols(vectors.cols() - 2);
}

namespace {

void require(const ProblemInstance& inst, Variant v) {
  inst.validate();
  if (inst.variant != v) throw std::invalid_argument("variant mismatch");
}

Eigen::MatrixXd projector_complement(const Eigen::VectorXd& v) {
  const auto n = v.size();
  return Eigen::MatrixXd::Identity(n, n) - v * v.transpose();
}

Eigen::VectorXd basis_vector(std::size_t n, std::size_t k) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  e[static_cast<Eigen::Index>(k)] = 1.0;
  return e;
}

// Normalized uniform superposition of the unmarked states.
Eigen::VectorXd marked_perp(std::size_t n, std::size_t m) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                                1.0 / std::sqrt(static_cast<double>(n - 1)));
  v[static_cast<Eigen::Index>(m)] = 0.0;
  return v;
}

}  // namespace

Eigen::MatrixXd degenerate_subspace_basis(std::size_t n, std::size_t marked) {
  if (n < 3) return Eigen::MatrixXd(static_cast<Eigen::Index>(n), 0);
  const Eigen::VectorXd em = basis_vector(n, marked);
  const Eigen::VectorXd perp = marked_perp(n, marked);
  const std::size_t k1 = marked == 0 ? 1 : 0;
  Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n - 2));
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == marked || k == k1) continue;
    Eigen::VectorXd v = (basis_vector(n, k) - basis_vector(n, k1)) / std::numbers::sqrt2;
    // Two passes of modified Gram-Schmidt keep orthogonality at roundoff.
    for (int pass = 0; pass < 2; ++pass) {
      v -= em.dot(v) * em;
      v -= perp.dot(v) * perp;
      for (Eigen::Index j = 0; j < col; ++j) v -= q.col(j).dot(v) * q.col(j);
    }
    q.col(col++) = v / v.norm();
  }
  return q;
}

Eigen::MatrixXd analog_hamiltonian(const ProblemInstance& inst) {
  require(inst, Variant::Analog);
  const std::size_t n = inst.n_dim;
  return inst.e_bar * (projector_complement(uniform_state(n)) +
                       projector_complement(basis_vector(n, inst.marked)));
}

double analog_run_time(const ProblemInstance& inst) {
  require(inst, Variant::Analog);
  return std::numbers::pi * std::sqrt(static_cast<double>(inst.n_dim)) / (2.0 * inst.e_bar);
}

SpectrumView analog_spectrum(const ProblemInstance& inst) {
  require(inst, Variant::Analog);
  const std::size_t n = inst.n_dim;
  const auto ni = static_cast<Eigen::Index>(n);
  SpectrumView sv;
  sv.e_bar = inst.e_bar;
  if (n == 1) {
    sv.eigenvalues = Eigen::VectorXd::Zero(1);
    sv.vectors = Eigen::MatrixXd::Identity(1, 1);
    sv.ideal_amplitudes = Eigen::VectorXcd::Ones(1);
    sv.degenerate_empty = true;
    return sv;
  }
  const double x = 1.0 / std::sqrt(static_cast<double>(n));
  const Eigen::VectorXd em = basis_vector(n, inst.marked);
  Eigen::VectorXd rest = Eigen::VectorXd::Ones(ni) - em;
  const Eigen::VectorXd phi0 = std::sqrt((1.0 + x) / 2.0) * em + x / std::sqrt(2.0 * (1.0 + x)) * rest;
  const Eigen::VectorXd phi1 = std::sqrt((1.0 - x) / 2.0) * em - x / std::sqrt(2.0 * (1.0 - x)) * rest;
  sv.eigenvalues.resize(ni);
  sv.vectors.resize(ni, ni);
  sv.eigenvalues[0] = (1.0 - x) * inst.e_bar;
  sv.eigenvalues[1] = (1.0 + x) * inst.e_bar;
  sv.vectors.col(0) = phi0;
  sv.vectors.col(1) = phi1;
  const Eigen::MatrixXd d = degenerate_subspace_basis(n, inst.marked);
  for (Eigen::Index k = 0; k < d.cols(); ++k) {
    sv.eigenvalues[k + 2] = 2.0 * inst.e_bar;
    sv.vectors.col(k + 2) = d.col(k);
  }
  sv.degenerate_empty = n < 3;
  sv.ideal_amplitudes = Eigen::VectorXcd::Zero(ni);
  sv.ideal_amplitudes[0] = std::sqrt((1.0 + x) / 2.0);
  sv.ideal_amplitudes[1] = -std::sqrt((1.0 - x) / 2.0);
  return sv;
}

Eigen::MatrixXd adiabatic_hamiltonian(const ProblemInstance& inst, double s) {
  require(inst, Variant::Adiabatic);
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("adiabatic_hamiltonian: s outside [0,1]");
  const std::size_t n = inst.n_dim;
  return inst.e_bar * ((1.0 - s) * projector_complement(uniform_state(n)) +
                       s * projector_complement(basis_vector(n, inst.marked)));
}

Eigen::MatrixXd adiabatic_hamiltonian_derivative(const ProblemInstance& inst) {
  require(inst, Variant::Adiabatic);
  const std::size_t n = inst.n_dim;
  const Eigen::VectorXd u = uniform_state(n);
  const Eigen::VectorXd em = basis_vector(n, inst.marked);
  return inst.e_bar * (u * u.transpose() - em * em.transpose());
}

namespace {

// c = (N - 1) / N; the gap is E sqrt(1 - 4 c s (1 - s)).
double gap_c(const ProblemInstance& inst) {
  const double n = static_cast<double>(inst.n_dim);
  return (n - 1.0) / n;
}

double gap_q(double c, double s) { return 1.0 - 4.0 * c * s * (1.0 - s); }

}  // namespace

double adiabatic_gap(const ProblemInstance& inst, double s) {
  return inst.e_bar * std::sqrt(gap_q(gap_c(inst), s));
}

double adiabatic_min_gap(const ProblemInstance& inst) {
  return inst.e_bar / std::sqrt(static_cast<double>(inst.n_dim));
}

double adiabatic_mixing_angle(const ProblemInstance& inst, double s) {
  // 2x2 block in {|m>, |m_perp>}: [[alpha, gamma], [gamma, beta]].
  const double n = static_cast<double>(inst.n_dim);
  const double a = 1.0 / std::sqrt(n);
  const double b = std::sqrt((n - 1.0) / n);
  const double alpha = (1.0 - s) * (n - 1.0) / n;
  const double beta = (1.0 - s) / n + s;
  const double gamma = -(1.0 - s) * a * b;
  return 0.5 * std::atan2(-2.0 * gamma, alpha - beta);
}

SpectrumView adiabatic_spectrum(const ProblemInstance& inst, double s) {
  require(inst, Variant::Adiabatic);
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("adiabatic_spectrum: s outside [0,1]");
  const std::size_t n = inst.n_dim;
  const auto ni = static_cast<Eigen::Index>(n);
  const double g = adiabatic_gap(inst, s);
  const double phi = adiabatic_mixing_angle(inst, s);
  const Eigen::VectorXd em = basis_vector(n, inst.marked);
  const Eigen::VectorXd perp = marked_perp(n, inst.marked);
  SpectrumView sv;
  sv.e_bar = inst.e_bar;
  sv.eigenvalues.resize(ni);
  sv.vectors.resize(ni, ni);
  sv.eigenvalues[0] = 0.5 * (inst.e_bar - g);
  sv.eigenvalues[1] = 0.5 * (inst.e_bar + g);
  sv.vectors.col(0) = std::sin(phi) * em + std::cos(phi) * perp;
  sv.vectors.col(1) = std::cos(phi) * em - std::sin(phi) * perp;
  const Eigen::MatrixXd d = degenerate_subspace_basis(n, inst.marked);
  for (Eigen::Index k = 0; k < d.cols(); ++k) {
    sv.eigenvalues[k + 2] = inst.e_bar;
    sv.vectors.col(k + 2) = d.col(k);
  }
  sv.degenerate_empty = n < 3;
  sv.ideal_amplitudes = Eigen::VectorXcd::Zero(ni);
  sv.ideal_amplitudes[0] = 1.0;
  return sv;
}

// Schedule

double Schedule::exact_total_time(const ProblemInstance& inst) {
  return exact_t_of_s(inst, 1.0);
}

double Schedule::exact_t_of_s(const ProblemInstance& inst, double s) {
  const double n = static_cast<double>(inst.n_dim);
  const double r = std::sqrt(n - 1.0);
  return (n / (inst.delta * inst.e_bar * r)) * (std::atan(2.0 * r * (s - 0.5)) + std::atan(r));
}

double Schedule::exact_s_of_t(const ProblemInstance& inst, double t) {
  const double n = static_cast<double>(inst.n_dim);
  const double r = std::sqrt(n - 1.0);
  return 0.5 + std::tan(t * inst.delta * inst.e_bar * r / n - std::atan(r)) / (2.0 * r);
}

Schedule::Schedule(const ProblemInstance& inst, std::size_t n_grid) : inst_(inst) {
  require(inst, Variant::Adiabatic);
  if (n_grid < 2) throw std::invalid_argument("Schedule: grid too small");
  const double c = gap_c(inst);
  const double pref = 2.0 / (inst.delta * inst.e_bar);
  auto dt_ds = [&](double s) { return pref / gap_q(c, s); };
  s_.resize(n_grid + 1);
  t_.resize(n_grid + 1);
  slope_.resize(n_grid + 1);
  t_[0] = 0.0;
  for (std::size_t i = 0; i <= n_grid; ++i) {
    s_[i] = static_cast<double>(i) / static_cast<double>(n_grid);
    if (i > 0) {
      t_[i] = t_[i - 1] + boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                              dt_ds, s_[i - 1], s_[i], 10, 1e-14);
    }
    slope_[i] = 1.0 / dt_ds(s_[i]);
  }
  total_time_ = t_.back();
}

namespace {

double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
  const double h = x1 - x0;
  const double u = (x - x0) / h;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * y1 +
         (u3 - u2) * h * d1;
}

double hermite_slope(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
  const double h = x1 - x0;
  const double u = (x - x0) / h;
  const double u2 = u * u;
  return ((6 * u2 - 6 * u) * y0 + (-6 * u2 + 6 * u) * y1) / h + (3 * u2 - 4 * u + 1) * d0 +
         (3 * u2 - 2 * u) * d1;
}

std::size_t locate(const std::vector<double>& grid, double x) {
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i == 0) i = 1;
  if (i >= grid.size()) i = grid.size() - 1;
  return i - 1;
}

}  // namespace

double Schedule::s_of_t(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= total_time_) return 1.0;
  const std::size_t i = locate(t_, t);
  return std::clamp(hermite(t_[i], t_[i + 1], s_[i], s_[i + 1], slope_[i], slope_[i + 1], t), 0.0, 1.0);
}

double Schedule::t_of_s(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return total_time_;
  const std::size_t i = locate(s_, s);
  return hermite(s_[i], s_[i + 1], t_[i], t_[i + 1], 1.0 / slope_[i], 1.0 / slope_[i + 1], s);
}

double Schedule::interpolant_slope(double t) const {
  t = std::clamp(t, 0.0, total_time_);
  const std::size_t i = locate(t_, t);
  return hermite_slope(t_[i], t_[i + 1], s_[i], s_[i + 1], slope_[i], slope_[i + 1], t);
}

double Schedule::ds_dt(double t) const {
  const double g = adiabatic_gap(inst_, s_of_t(t));
  return inst_.delta * g * g / (2.0 * inst_.e_bar);
}

double adiabatic_phase(const ProblemInstance& inst, const Schedule& sched, std::size_t k,
                       double t) {
  if (k == 0) return 0.0;
  const double c = gap_c(inst);
  const double s = sched.s_of_t(t);
  const double r = std::sqrt(c / (1.0 - c));  // sqrt(N - 1)
  const double phi1 =
      (std::asinh(2.0 * r * (s - 0.5)) + std::asinh(r)) / (inst.delta * std::sqrt(c));
  if (k == 1) return phi1;
  return 0.5 * (inst.e_bar * t + phi1);
}

double adiabatic_omega(const ProblemInstance& inst, const Schedule& sched, std::size_t k,
                       double t) {
  if (k == 0) return 0.0;
  const double g = adiabatic_gap(inst, sched.s_of_t(t));
  return k == 1 ? g : 0.5 * (inst.e_bar + g);
}

namespace {

struct CouplingWork {
  Eigen::VectorXd u, em, perp;
  Eigen::MatrixXd deg;
};

CouplingWork make_work(const ProblemInstance& inst) {
  CouplingWork w;
  w.u = uniform_state(inst.n_dim);
  w.em = basis_vector(inst.n_dim, inst.marked);
  w.perp = marked_perp(inst.n_dim, inst.marked);
  w.deg = degenerate_subspace_basis(inst.n_dim, inst.marked);
  return w;
}

std::vector<double> coefficients(const ProblemInstance& inst, const Schedule& sched,
                                 const CouplingWork& w, double t) {
  const double s = sched.s_of_t(t);
  const double sdot = sched.ds_dt(t);
  const double g = adiabatic_gap(inst, s);
  const double phi = adiabatic_mixing_angle(inst, s);
  const Eigen::VectorXd phi0 = std::sin(phi) * w.em + std::cos(phi) * w.perp;
  const Eigen::VectorXd phi1 = std::cos(phi) * w.em - std::sin(phi) * w.perp;
  // (H_f - H_0) phi0 = E (|u><u| - |m><m|) phi0.
  const Eigen::VectorXd v = inst.e_bar * (w.u * w.u.dot(phi0) - w.em * phi0.dot(w.em));
  std::vector<double> a(inst.n_dim - 1, 0.0);
  a[0] = sdot * std::abs(phi1.dot(v)) / (g * g);
  const double e_deg = inst.e_bar - 0.5 * (inst.e_bar - g);
  for (Eigen::Index k = 0; k < w.deg.cols(); ++k) {
    a[static_cast<std::size_t>(k) + 1] = sdot * std::abs(w.deg.col(k).dot(v)) / (e_deg * e_deg);
  }
  return a;
}

}  // namespace

std::vector<double> adiabaticity_coefficients(const ProblemInstance& inst, const Schedule& sched,
                                              double t) {
  require(inst, Variant::Adiabatic);
  return coefficients(inst, sched, make_work(inst), t);
}

AdiabaticConditionCheck check_adiabatic_condition(const ProblemInstance& inst,
                                                  const Schedule& sched, std::size_t n_grid) {
  require(inst, Variant::Adiabatic);
  if (n_grid < 2) throw std::invalid_argument("check_adiabatic_condition: grid too small");
  const CouplingWork w = make_work(inst);
  AdiabaticConditionCheck out;
  out.sup_a.assign(inst.n_dim - 1, 0.0);
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double t = sched.total_time() * static_cast<double>(i) / static_cast<double>(n_grid - 1);
    const std::vector<double> a = coefficients(inst, sched, w, t);
    if (a[0] > out.sup_a[0]) out.sup_a1_time = t;
    for (std::size_t k = 0; k < a.size(); ++k) out.sup_a[k] = std::max(out.sup_a[k], a[k]);
  }
  for (double a : out.sup_a) out.lhs += 4.0 * a * a;
  out.rhs = inst.delta * inst.delta;
  out.satisfied = out.lhs <= out.rhs;
  return out;
}

}  // namespace hamnoise
