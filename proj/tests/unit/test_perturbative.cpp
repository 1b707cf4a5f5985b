#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "hamnoise/perturbative.hpp"

using namespace hamnoise;
using std::numbers::pi;

namespace {

double si_by_quadrature(double x) {
  auto g = [](double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; };
  double s = 0.0;
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(x) / 2.0)));
  for (int i = 0; i < n; ++i) {
    s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, x * i / n, x * (i + 1) / n, 10, 1e-15);
  }
  return s;
}

CorrelationFn unit_correlation() {
  return [](double) { return 1.0; };
}

}  // namespace

TEST(SineIntegral, KnownValues) {
  EXPECT_EQ(sine_integral(0.0), 0.0);
  EXPECT_NEAR(sine_integral(1.0), 0.9460830703671830, 1e-13);
  EXPECT_NEAR(sine_integral(5.0), 1.5499312449446741, 1e-13);
  EXPECT_NEAR(sine_integral(10.0), 1.6583475942188740, 1e-13);
  EXPECT_NEAR(sine_integral(20.0), 1.5482417010434398, 1e-13);
  EXPECT_NEAR(sine_integral(100.0), pi / 2.0, 1e-2);
  EXPECT_NEAR(sine_integral(1e6), pi / 2.0, 1e-6);
}

TEST(SineIntegral, MatchesQuadratureAndIsOdd) {
  for (double x : {1e-8, 0.3, 2.0, 3.99, 4.01, 7.5, 16.0, 16.5, 33.0, 80.0}) {
    EXPECT_NEAR(sine_integral(x), si_by_quadrature(x), 1e-12) << "x=" << x;
    EXPECT_EQ(sine_integral(-x), -sine_integral(x));
  }
}

TEST(ExactWhiteNoise, ZeroFrequencyReduction) {
  for (double w0 : {0.5, 2.0, 7.0}) {
    for (double t : {1.0, 10.0}) {
      const double s2 = 0.3;
      const double expect = 2.0 * s2 / w0 * (t * sine_integral(w0 * t) - (1.0 - std::cos(w0 * t)) / w0);
      EXPECT_NEAR(i_minus_exact_whitenoise(0.0, w0, t, s2), expect, 1e-13 * std::abs(expect));
    }
  }
}

TEST(ExactWhiteNoise, AgreesWithNumericAtReferencePoint) {
  const double e = i_minus_exact_whitenoise(2.0, 5.0, 10.0, 1.0);
  const auto n = i_minus_numeric(2.0, 5.0, 10.0, 1.0, white_sinc(5.0));
  EXPECT_TRUE(n.tolerance_met);
  EXPECT_NEAR(e / n.value, 1.0, 1e-8);
}

TEST(ExactWhiteNoise, AgreesWithNumericOnGrid) {
  for (double w : {0.0, 0.7, -2.0, 4.0}) {
    for (double w0 : {1.0, 5.0}) {
      for (double t : {2.0, 12.0}) {
        const double e = i_minus_exact_whitenoise(w, w0, t, 0.25);
        const double n = i_minus_numeric(w, w0, t, 0.25, white_sinc(w0)).value;
        EXPECT_NEAR(e, n, 1e-6 * std::abs(n)) << w << " " << w0 << " " << t;
      }
    }
  }
}

TEST(ExactWhiteNoise, RemovableSingularityIsContinuous) {
  const double w0 = 3.0, t = 8.0;
  const double at = i_minus_exact_whitenoise(w0, w0, t, 1.0);
  for (double d : {1e-9, 1e-7, 1e-6, 1e-5, 1e-3}) {
    const double near = i_minus_exact_whitenoise(w0 + d / t, w0, t, 1.0);
    const double num = i_minus_numeric(w0 + d / t, w0, t, 1.0, white_sinc(w0)).value;
    EXPECT_NEAR(near, num, 1e-7 * std::abs(num)) << d;
    EXPECT_NEAR(near, at, 1e-3 * std::abs(at));
  }
}

TEST(Integrals, BoundOnRandomDraws) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uw(-10.0, 10.0), uw0(0.05, 20.0), ut(0.1, 30.0), us(0.01, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double w = uw(rng), w0 = uw0(rng), t = ut(rng), s2 = us(rng);
    const double bound = s2 * t * t * (1.0 + 1e-9);
    EXPECT_LE(std::abs(i_minus_exact_whitenoise(w, w0, t, s2)), bound);
    if (i % 4 == 0) {
      EXPECT_LE(std::abs(i_plus_numeric(w, w0, t, s2, white_sinc(w0)).value), bound);
      EXPECT_LE(std::abs(i_minus_numeric(w, w0, t, s2, white_sinc(w0)).value), bound);
    }
  }
}

TEST(Integrals, ConstantCorrelationGivesSigmaTSquared) {
  EXPECT_NEAR(i_minus_numeric(0.0, 1.0, 4.0, 0.5, unit_correlation()).value, 8.0, 1e-12);
  const auto p = i_plus_numeric(0.0, 1.0, 4.0, 0.5, unit_correlation()).value;
  EXPECT_NEAR(p.real(), 8.0, 1e-12);
  EXPECT_NEAR(p.imag(), 0.0, 1e-12);
}

TEST(Integrals, MinusIsEvenInFrequency) {
  for (double w : {0.3, 1.7, 6.0}) {
    EXPECT_NEAR(i_minus_exact_whitenoise(w, 2.0, 5.0, 1.0), i_minus_exact_whitenoise(-w, 2.0, 5.0, 1.0),
                1e-13);
    EXPECT_NEAR(i_minus_numeric(w, 2.0, 5.0, 1.0, white_sinc(2.0)).value,
                i_minus_numeric(-w, 2.0, 5.0, 1.0, white_sinc(2.0)).value, 1e-12);
  }
}

TEST(Integrals, PlusAgainstRiemannSum) {
  const double w = 1.0, w0 = 3.0, t = 5.0;
  const int n = 2000;
  const double h = t / n;
  std::complex<double> sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t1 = (i + 0.5) * h;
    for (int j = 0; j < n; ++j) {
      const double t2 = (j + 0.5) * h;
      const double u = w0 * (t1 - t2);
      sum += std::polar(u == 0.0 ? 1.0 : std::sin(u) / u, w * (t1 + t2));
    }
  }
  sum *= h * h;
  const auto v = i_plus_numeric(w, w0, t, 1.0, white_sinc(w0)).value;
  EXPECT_LT(std::abs(v - sum), 1e-4 * std::abs(sum));
}

TEST(Integrals, PhaseFormReducesToConstantFrequency) {
  PhaseFunction ph;
  ph.phase = [](double t) { return 1.3 * t; };
  ph.rate = [](double) { return 1.3; };
  ph.rate_max = ph.rate_min = 1.3;
  const auto a = i_minus_numeric_phase(ph, 4.0, 9.0, 0.2, white_sinc(4.0));
  EXPECT_TRUE(a.tolerance_met);
  EXPECT_NEAR(a.value, i_minus_exact_whitenoise(1.3, 4.0, 9.0, 0.2), 1e-6 * std::abs(a.value));
}

TEST(Asymptotics, HighRegimeWithinFactorFive) {
  const auto a = i_minus_asymptotic(1.0, 1.0, 100.0, 10.0, 1.0, CutoffRegime::HighCutoff);
  ASSERT_TRUE(a.value.has_value());
  const double exact = i_minus_exact_whitenoise(1.0, 100.0, 10.0, 1.0);
  EXPECT_LT(*a.value / exact, 5.0);
  EXPECT_GT(*a.value / exact, 0.2);
  EXPECT_DOUBLE_EQ(a.separation, 100.0);
}

TEST(Asymptotics, LowRegimeIndependentOfRunTime) {
  const double a = i_minus_exact_whitenoise(1.0, 0.05, 200.0, 1.0);
  const double b = i_minus_exact_whitenoise(1.0, 0.05, 400.0, 1.0);
  EXPECT_LT(std::abs(b - a), 0.2 * std::abs(a));
  const auto est = i_minus_asymptotic(1.0, 1.0, 0.05, 200.0, 1.0, CutoffRegime::LowCutoff);
  ASSERT_TRUE(est.value.has_value());
  EXPECT_EQ(est.regime, CutoffRegime::LowCutoff);
}

TEST(Asymptotics, RefusesOutsideRegime) {
  EXPECT_FALSE(i_minus_asymptotic(1.0, 1.0, 1.0, 10.0, 1.0, CutoffRegime::HighCutoff).value);
  EXPECT_FALSE(i_minus_asymptotic(1.0, 1.0, 1.0, 10.0, 1.0, CutoffRegime::LowCutoff).value);
  EXPECT_FALSE(i_minus_asymptotic(1.0, 1.0, 1.9, 10.0, 1.0, CutoffRegime::HighCutoff).value);
  EXPECT_FALSE(i_minus_asymptotic(1.0, 1.0, 0.6, 10.0, 1.0, CutoffRegime::LowCutoff).value);
  EXPECT_EQ(classify_cutoff(1.0, 1.0, 1.0), CutoffRegime::Intermediate);
  EXPECT_FALSE(i_minus_asymptotic(1.0, 1.0, 1.0, 10.0, 1.0, CutoffRegime::Intermediate).value);
}

TEST(AnalogPrediction, GeneralFormulaMatchesSpecialized) {
  for (double w0 : {0.1, 1.0, 10.0}) {
    const auto inst = ProblemInstance::analog(16);
    const auto noise = NoiseModel::constant_snr(16, 0.05, w0);
    const auto ci = analog_integrals(inst, noise);
    const auto a = perr_analog(inst, noise, ci);
    const auto g = perr_general(analog_spectrum(inst), ci, noise.epsilon);
    EXPECT_NEAR(a.mean_p_err, g.mean_p_err, 1e-12 * a.mean_p_err);
    EXPECT_NEAR(a.breakdown.degenerate_coupling, g.breakdown.degenerate_coupling, 1e-12 * a.mean_p_err);
    EXPECT_NEAR(a.breakdown.interference, g.breakdown.interference, 1e-12 * a.mean_p_err);
    EXPECT_GE(a.mean_p_err, 0.0);
    EXPECT_NEAR(a.mean_p_err,
                a.breakdown.degenerate_coupling + a.breakdown.intra_populated + a.breakdown.interference,
                1e-15);
    for (const auto& [key, v] : ci.i_minus) {
      const double bound = (key.first == key.second ? 2.0 : 1.0) * ci.bound * (1.0 + 1e-9);
      EXPECT_LE(std::abs(v), bound);
    }
    EXPECT_LE(std::abs(ci.plus(0, 1)), ci.bound * (1.0 + 1e-9));
  }
}

TEST(AnalogPrediction, SingleLevelReducesToDirectSum) {
  const auto inst = ProblemInstance::analog(6);
  const auto noise = NoiseModel::constant_snr(6, 0.1, 2.0);
  auto sp = analog_spectrum(inst);
  sp.ideal_amplitudes.setZero();
  sp.ideal_amplitudes[0] = 1.0;
  const auto ci = analog_integrals(inst, noise);
  const auto p = perr_general(sp, ci, 0.1);
  const double expect = 0.01 * (ci.minus(0, 1) + 4.0 * ci.minus(0, 2));
  EXPECT_NEAR(p.mean_p_err, expect, 1e-15);
  EXPECT_EQ(p.breakdown.interference, 0.0);
  EXPECT_EQ(perr_general(sp, ci, 0.0).mean_p_err, 0.0);
}

TEST(AnalogPrediction, ScalesExactlyAsEpsilonSquared) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ue(0.001, 0.2), uw(0.05, 30.0);
  for (int i = 0; i < 20; ++i) {
    const double e = ue(rng), w0 = uw(rng);
    const auto inst = ProblemInstance::analog(10);
    const double a = perr_analog(inst, NoiseModel::constant_snr(10, e, w0)).mean_p_err;
    const double b = perr_analog(inst, NoiseModel::constant_snr(10, 2.0 * e, w0)).mean_p_err;
    EXPECT_NEAR(b, 4.0 * a, 1e-14 * b);
  }
  EXPECT_EQ(perr_analog(ProblemInstance::analog(10), NoiseModel::constant_snr(10, 0.0, 1.0)).mean_p_err, 0.0);
}

TEST(AnalogPrediction, InvariantUnderDegenerateRotation) {
  const std::size_t n = 12;
  const auto inst = ProblemInstance::analog(n);
  const auto noise = NoiseModel::constant_snr(n, 0.05, 1.5);
  const auto ci = analog_integrals(inst, noise);
  auto sp = analog_spectrum(inst);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd g(n - 2, n - 2);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = nd(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  sp.vectors.rightCols(n - 2) = sp.vectors.rightCols(n - 2) * q;
  Eigen::VectorXd b = sp.vectors.transpose() * uniform_state(n);
  // The rotated degenerate states stay orthogonal to the start state.
  EXPECT_LT(b.tail(n - 2).cwiseAbs().maxCoeff(), 1e-12);
  b.tail(n - 2).setZero();
  sp.ideal_amplitudes = b.cast<std::complex<double>>();
  EXPECT_NEAR(perr_general(sp, ci, noise.epsilon).mean_p_err, perr_analog(inst, noise).mean_p_err,
              1e-10 * perr_analog(inst, noise).mean_p_err);
}

TEST(AnalogPrediction, NumericPathAgreesWithExact) {
  const auto inst = ProblemInstance::analog(16);
  auto noise = NoiseModel::constant_snr(16, 0.05, 1.0);
  const double exact = perr_analog(inst, noise).mean_p_err;
  noise.shape = NoiseShape::Custom;
  noise.psd.omega = {0.0, 1.0};
  noise.psd.density = {1.0, 1.0};
  noise.n_modes = 4096;
  EXPECT_NEAR(perr_analog(inst, noise).mean_p_err, exact, 1e-4 * exact);
  EXPECT_EQ(analog_integrals(inst, noise).method, IntegralMethod::NumericDouble);
}

TEST(AnalogPrediction, MissingEntriesRejected) {
  CouplingIntegrals ci;
  EXPECT_THROW(ci.minus(0, 1), std::out_of_range);
  EXPECT_THROW(ci.plus(0, 1), std::out_of_range);
  ci.i_minus[{0, 2}] = 1.5;
  EXPECT_EQ(ci.minus(0, 7), 1.5);
  EXPECT_EQ(ci.minus(7, 0), 1.5);
}

TEST(AdiabaticPrediction, IntegralsRespectBounds) {
  const auto inst = ProblemInstance::adiabatic(16, 0.2);
  const Schedule sch(inst);
  const auto noise = NoiseModel::constant_snr(16, 0.05, 20.0);
  const auto ai = adiabatic_integrals(inst, sch, noise, false);
  const double quoted_bound = pi * pi / (64.0 * 0.04) * (1.0 + 1e-6);
  for (const auto* v : {&ai.first, &ai.degenerate}) {
    EXPECT_TRUE(std::isfinite(v->value));
    EXPECT_GT(v->value, 0.0);
    EXPECT_LE(v->value, quoted_bound);
    EXPECT_LE(v->value, noise.sigma_sq * sch.total_time() * sch.total_time());
    EXPECT_TRUE(v->tolerance_met);
  }
  const auto p0 = perr_adiabatic(inst, NoiseModel::constant_snr(16, 0.0, 20.0), 0.003, ai);
  EXPECT_DOUBLE_EQ(p0.mean_p_err, 0.003);
  const auto p = perr_adiabatic(inst, noise, 0.003, ai);
  EXPECT_NEAR(p.mean_p_err, 0.003 + 0.0025 * (ai.first.value + 14.0 * ai.degenerate.value), 1e-15);
  EXPECT_FALSE(p.validity_warning);

  const auto low = adiabatic_integrals(inst, sch, NoiseModel::constant_snr(16, 0.05, 0.1), false);
  EXPECT_TRUE(perr_adiabatic(inst, NoiseModel::constant_snr(16, 0.05, 0.1), 0.0, low).validity_warning);
}

TEST(Conditions, LowCutoffVerdicts) {
  const auto inst = ProblemInstance::adiabatic(100, 0.1);
  EXPECT_TRUE(check_regimes(inst, NoiseModel::constant_snr(100, 0.05, 0.1)).low_cutoff.holds);
  EXPECT_FALSE(check_regimes(inst, NoiseModel::constant_snr(100, 0.2, 0.1)).low_cutoff.holds);
}

TEST(Conditions, IntermediateBand) {
  const auto inst = ProblemInstance::adiabatic(100, 0.1);
  const auto r = check_regimes(inst, NoiseModel::constant_snr(100, 0.1, 1.0));
  EXPECT_FALSE(r.high_cutoff.holds);
  EXPECT_FALSE(r.low_cutoff.holds);
}

TEST(Conditions, AnalogHighCutoffThreshold) {
  const auto inst = ProblemInstance::analog(100);
  const auto at50 = check_regimes(inst, NoiseModel::constant_snr(100, 0.05, 50.0)).high_cutoff;
  EXPECT_FALSE(at50.holds);
  EXPECT_DOUBLE_EQ(at50.rhs, 100.0);
  EXPECT_TRUE(check_regimes(inst, NoiseModel::constant_snr(100, 0.05, 100.0)).high_cutoff.holds);
}

TEST(Conditions, PerturbedReducesToIdealAtZeroNoise) {
  const auto inst = ProblemInstance::adiabatic(8, 0.2);
  const Schedule sch(inst);
  const auto noise = NoiseModel::constant_snr(8, 0.0, 5.0);
  AdiabaticIntegrals ai;
  ai.first.value = 0.4;
  ai.degenerate.value = 0.3;
  const auto r = check_adiabatic_conditions(inst, noise, sch, ai, 2000);
  ASSERT_TRUE(r.ideal && r.perturbed);
  EXPECT_DOUBLE_EQ(r.ideal->lhs, r.perturbed->lhs);
  EXPECT_EQ(r.ideal->holds, r.perturbed->holds);
  auto noisy = noise;
  noisy.epsilon = 0.1;
  const auto r2 = check_adiabatic_conditions(inst, noisy, sch, ai, 2000);
  EXPECT_GT(r2.perturbed->lhs, r2.ideal->lhs);
}
