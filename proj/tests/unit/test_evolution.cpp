#include <cmath>
#include <complex>
#include <limits>

#include <gtest/gtest.h>

#include "hamnoise/common.hpp"
#include "hamnoise/evolution.hpp"

using namespace hamnoise;
using C = std::complex<double>;

namespace {

Eigen::VectorXcd as_complex(const Eigen::VectorXd& v) { return v.cast<C>(); }

// Analog H plus eps * h(t) on a fixed path.
HamiltonianFn noisy_analog(const ProblemInstance& inst, const NoisePath& path, double eps,
                           double shift = 0.0) {
  const Eigen::MatrixXd h0 = analog_hamiltonian(inst);
  return [h0, &path, eps, shift](double t, Eigen::MatrixXd& h) {
    h = h0 + eps * path.eval_at(t);
    h.diagonal().array() += shift;
  };
}

}  // namespace

TEST(Propagate, NullEvolution) {
  Eigen::VectorXcd psi(3);
  psi << C(0.6, 0.0), C(0.0, 0.8), C(0.0, 0.0);
  const auto p = propagate([](double, Eigen::MatrixXd& h) { h = Eigen::MatrixXd::Zero(3, 3); }, psi,
                           17.0, PropagatorConfig{}, StepScales{});
  EXPECT_LT((p.state - psi).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Propagate, DiagonalPhases) {
  Eigen::VectorXd e(4);
  e << -1.0, 0.3, 2.0, 5.5;
  const Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(4, C(0.5, 0.0));
  for (Method m : {Method::MagnusMidpoint, Method::RK4}) {
    PropagatorConfig cfg;
    cfg.method = m;
    cfg.dt_max = m == Method::RK4 ? 1e-3 : 0.05;
    const double t = 3.7;
    const auto p = propagate([&](double, Eigen::MatrixXd& h) { h = e.asDiagonal(); }, psi, t, cfg,
                             StepScales{0.0, 6.5});
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(std::abs(p.state[k] - std::polar(0.5, -e[k] * t)), 0.0, 1e-10) << "k=" << k;
    }
  }
}

TEST(Propagate, RejectsBadInput) {
  const Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(2, C(1.0, 0.0));
  auto zero = [](double, Eigen::MatrixXd& h) { h = Eigen::MatrixXd::Zero(2, 2); };
  EXPECT_THROW(propagate(zero, psi, 1.0, PropagatorConfig{}, StepScales{}), std::invalid_argument);
  Eigen::VectorXcd ok = psi / std::sqrt(2.0);
  auto nan = [](double, Eigen::MatrixXd& h) {
    h = Eigen::MatrixXd::Constant(2, 2, std::numeric_limits<double>::quiet_NaN());
  };
  EXPECT_THROW(propagate(nan, ok, 1.0, PropagatorConfig{}, StepScales{}), NumericError);
  PropagatorConfig bad;
  bad.dt_max = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Propagate, StepCountResolvesScales) {
  PropagatorConfig cfg;
  cfg.dt_max = 0.05;
  EXPECT_EQ(step_count(10.0, cfg, StepScales{0.0, 0.0}), 200u);
  EXPECT_EQ(step_count(10.0, cfg, StepScales{10.0, 1.0}), 1000u);
  EXPECT_EQ(step_count(10.0, cfg, StepScales{1.0, 20.0}), 2000u);
}

TEST(IdealAnalog, MatchesTwoLevelRotation) {
  for (std::size_t n : {16u, 64u}) {
    const auto inst = ProblemInstance::analog(n, 1.0, n / 2);
    const TrialRunner runner(inst, NoiseModel::constant_snr(n, 0.0, 1.0), PropagatorConfig{});
    const auto sp = analog_spectrum(inst);
    const double t = analog_run_time(inst);
    Eigen::VectorXcd exact = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
    for (int k = 0; k < 2; ++k) exact += sp.ideal_amplitudes[k] * std::polar(1.0, -sp.eigenvalues[k] * t) * as_complex(sp.vectors.col(k));
    EXPECT_LT((runner.ideal_final_state() - exact).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(std::norm(runner.ideal_final_state()[static_cast<Eigen::Index>(n / 2)]), 1.0, 1e-8);
    EXPECT_NEAR(runner.ideal_p_err(), 0.0, 1e-12);
  }
}

TEST(IdealAnalog, SuccessIndependentOfMarkedItem) {
  for (std::size_t m : {0u, 15u}) {
    const auto inst = ProblemInstance::analog(16, 1.0, m);
    const auto r = run_trial(inst, NoiseModel::constant_snr(16, 0.0, 1.0), 0, PropagatorConfig{});
    EXPECT_NEAR(r.p_err, 0.0, 1e-10);
    EXPECT_NEAR(r.p_err_alt, 0.0, 1e-8);
  }
}

TEST(IdealAdiabatic, ErrorBelowDeltaSquared) {
  const auto inst = ProblemInstance::adiabatic(16, 0.2);
  const auto r = run_trial(inst, NoiseModel::constant_snr(16, 0.0, 1.0), 0, PropagatorConfig{});
  EXPECT_LE(r.p_err, 0.04);
  EXPECT_EQ(r.p_err_definition, PerrDefinition::VsInstantGround);
  EXPECT_NEAR(r.fidelity, 1.0, 1e-12);
}

TEST(Trials, Deterministic) {
  const auto inst = ProblemInstance::analog(8);
  auto noise = NoiseModel::constant_snr(8, 0.1, 3.0);
  noise.seed = 77;
  const TrialRunner runner(inst, noise, PropagatorConfig{});
  const auto a = runner.run(4), b = runner.run(4), c = run_trial(inst, noise, 4, PropagatorConfig{});
  EXPECT_EQ(a.final_state, b.final_state);
  EXPECT_EQ(a.final_state, c.final_state);
  EXPECT_EQ(a.p_err, c.p_err);
  EXPECT_EQ(a.seed_used, derive_seed(77, 4));
  EXPECT_NE(runner.run(5).p_err, a.p_err);
  EXPECT_NEAR(a.p_err, 1.0 - a.fidelity, 0.0);
}

TEST(Trials, UnitarityAtDefaults) {
  const auto inst = ProblemInstance::analog(8);
  auto noise = NoiseModel::constant_snr(8, 0.2, 5.0);
  const TrialRunner runner(inst, noise, PropagatorConfig{});
  for (std::uint64_t i = 0; i < 3; ++i) EXPECT_LT(runner.run(i).norm_drift, 1e-9);
}

TEST(Trials, MagnusAgreesWithRk4OnFixedPath) {
  const auto inst = ProblemInstance::analog(8);
  auto noise = NoiseModel::constant_snr(8, 0.2, 4.0);
  noise.seed = 3;
  const auto path = NoisePath::build(noise);
  const auto h = noisy_analog(inst, path, noise.epsilon);
  const Eigen::VectorXcd psi0 = as_complex(uniform_state(8));
  const double t = analog_run_time(inst);
  const StepScales sc{noise.omega0, 1.0 + 1.0 / std::sqrt(8.0)};
  PropagatorConfig mag;
  PropagatorConfig rk;
  rk.method = Method::RK4;
  rk.dt_max = 2e-3;
  const auto a = propagate(h, psi0, t, mag, sc);
  const auto b = propagate(h, psi0, t, rk, sc);
  EXPECT_LT((a.state - b.state).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Trials, StepHalvingConverges) {
  const auto inst = ProblemInstance::analog(8);
  auto noise = NoiseModel::constant_snr(8, 0.2, 1.0);
  noise.seed = 9;
  PropagatorConfig fine;
  fine.dt_max = 0.025;
  const auto a = TrialRunner(inst, noise, PropagatorConfig{}).run(0);
  const auto b = TrialRunner(inst, noise, fine).run(0);
  EXPECT_LT(std::abs(a.fidelity - b.fidelity), 1e-6);
}

TEST(Propagate, TolRefinesMagnusSteps) {
  const auto inst = ProblemInstance::analog(8);
  auto noise = NoiseModel::constant_snr(8, 0.2, 1.0);
  const auto path = NoisePath::build(noise);
  const auto h = noisy_analog(inst, path, noise.epsilon);
  const Eigen::VectorXcd psi0 = as_complex(uniform_state(8));
  const double t = analog_run_time(inst);
  const StepScales sc{noise.omega0, 1.5};
  PropagatorConfig loose, tight;
  loose.tol = 1.0;
  tight.tol = 1e-9;
  const auto a = propagate(h, psi0, t, loose, sc);
  const auto b = propagate(h, psi0, t, tight, sc);
  EXPECT_EQ(a.steps, step_count(t, loose, sc));
  EXPECT_GT(b.steps, a.steps);
  // Constant Hamiltonian: nothing to refine.
  const auto c = propagate(noisy_analog(inst, path, 0.0), psi0, t, tight, sc);
  EXPECT_EQ(c.steps, step_count(t, tight, sc));
  PropagatorConfig absurd;
  absurd.tol = 1e-30;
  EXPECT_THROW(propagate(h, psi0, t, absurd, sc), NumericError);
}

TEST(Trials, GaugeShiftOnlyChangesGlobalPhase) {
  const auto inst = ProblemInstance::analog(8);
  auto noise = NoiseModel::constant_snr(8, 0.2, 2.0);
  const auto path = NoisePath::build(noise);
  const Eigen::VectorXcd psi0 = as_complex(uniform_state(8));
  const double t = analog_run_time(inst);
  const StepScales sc{noise.omega0, 1.5};
  const auto a = propagate(noisy_analog(inst, path, noise.epsilon), psi0, t, PropagatorConfig{}, sc);
  const auto b = propagate(noisy_analog(inst, path, noise.epsilon, 0.7), psi0, t, PropagatorConfig{}, sc);
  const C overlap = a.state.dot(b.state);
  EXPECT_NEAR(std::abs(overlap), 1.0, 1e-10);
  EXPECT_NEAR(std::arg(overlap * std::polar(1.0, 0.7 * t)), 0.0, 1e-8);
  const Eigen::Index m = static_cast<Eigen::Index>(inst.marked);
  EXPECT_NEAR(std::norm(a.state[m]), std::norm(b.state[m]), 1e-10);
}

TEST(Trials, RenormalizeKeepsUnitNorm) {
  const auto inst = ProblemInstance::analog(4);
  auto noise = NoiseModel::constant_snr(4, 0.1, 2.0);
  PropagatorConfig cfg;
  cfg.renormalize = true;
  const auto r = TrialRunner(inst, noise, cfg).run(1);
  EXPECT_NEAR(r.final_state.norm(), 1.0, 1e-13);
}
