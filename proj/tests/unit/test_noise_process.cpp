#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "hamnoise/common.hpp"
#include "hamnoise/noise_process.hpp"

using namespace hamnoise;

namespace {

NoiseModel small_model(std::size_t n = 2, std::uint64_t seed = 7) {
  NoiseModel m;
  m.n_dim = n;
  m.sigma_sq = 0.125;
  m.n_modes = 64;
  m.omega0 = 1.0;
  m.seed = seed;
  return m;
}

struct Moments {
  double mean = 0.0, var = 0.0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(x.size() - 1);
  return m;
}

}  // namespace

TEST(NoiseModel, ConstantSnrSetsSigma) {
  const auto m = NoiseModel::constant_snr(16, 0.05, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(m.sigma_sq, 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(m.element_variance(3, 3), 2.0 * m.sigma_sq);
  EXPECT_DOUBLE_EQ(m.element_variance(3, 4), m.sigma_sq);
  const auto m2 = NoiseModel::constant_snr(16, 0.05, 2.0, 3.0);
  EXPECT_DOUBLE_EQ(m2.sigma_sq, 9.0 / 64.0);
}

TEST(NoiseModel, RejectsInvalidFields) {
  auto m = small_model();
  m.n_modes = 0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = small_model();
  m.omega0 = 0.0;
  EXPECT_THROW(NoisePath::build(m), std::invalid_argument);
  m = small_model();
  m.shape = NoiseShape::Custom;
  m.psd.omega = {0.0, 0.5, 1.0};
  m.psd.density = {1.0, -0.1, 1.0};
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.psd.density = {1.0, 1.0, 1.0};
  m.psd.omega = {0.0, 0.5, 2.0};
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(NoiseModel, ModeGridIsMidpointRule) {
  const auto m = small_model();
  const auto g = make_mode_grid(m);
  ASSERT_EQ(g.freqs.size(), 64u);
  EXPECT_DOUBLE_EQ(g.freqs[0], 0.5 / 64.0);
  EXPECT_DOUBLE_EQ(g.freqs[63], 63.5 / 64.0);
  double w = 0.0;
  for (double x : g.weights) w += x;
  EXPECT_NEAR(w, 1.0, 1e-15);
  EXPECT_NEAR(realized_correlation(g, 0.0), 1.0, 1e-15);
  // Midpoint rule for sinc: O(1/M^2) at fixed tau.
  EXPECT_NEAR(realized_correlation(g, 3.0), std::sin(3.0) / 3.0, 1e-3);
}

TEST(NoiseModel, AutoModeCount) {
  EXPECT_EQ(auto_mode_count(1.0, 10.0), 64u);
  EXPECT_EQ(auto_mode_count(20.0, 100.0), static_cast<std::size_t>(std::ceil(2000.0 / std::numbers::pi)));
}

TEST(NoiseModel, CustomPsdWeightsFollowTable) {
  auto m = small_model();
  m.shape = NoiseShape::Custom;
  m.psd.omega = {0.0, 1.0};
  m.psd.density = {1.0, 1.0};
  const auto flat = make_mode_grid(m);
  for (double w : flat.weights) EXPECT_NEAR(w, 1.0 / 64.0, 1e-15);
  m.psd = lorentzian_psd(0.5, 1.0);
  const auto g = make_mode_grid(m);
  EXPECT_GT(g.weights.front(), g.weights.back());
  EXPECT_FALSE(m.psd.note.empty());
}

TEST(NoisePath, EvaluationIsExactlySymmetric) {
  const auto p = NoisePath::build(small_model(6));
  for (double t : {0.0, 0.37, -12.5, 1e3}) {
    const auto h = p.eval_at(t);
    EXPECT_TRUE(h.isApprox(h.transpose(), 0.0));
    EXPECT_EQ((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(NoisePath, DeterministicForEqualSeeds) {
  const auto m = small_model(5, 99);
  const auto a = NoisePath::build(m);
  const auto b = NoisePath::build(m);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.eval_at(2.5), b.eval_at(2.5));
  EXPECT_EQ(a.eval_at(2.5), a.eval_at(2.5));
  const auto c = NoisePath::build(m, derive_seed(99, 1));
  EXPECT_FALSE(a == c);
}

TEST(NoisePath, SeedDerivationIsStable) {
  EXPECT_EQ(derive_seed(12345, 0), derive_seed(12345, 0));
  EXPECT_NE(derive_seed(12345, 0), derive_seed(12345, 1));
  EXPECT_NE(derive_seed(12345, 0), derive_seed(12346, 0));
}

TEST(NoisePath, SaveLoadRoundTrip) {
  auto m = small_model(4, 3);
  m.omega0 = 2.5;
  const auto p = NoisePath::build(m);
  std::stringstream ss;
  p.save(ss);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 8), "HNPATH01");
  EXPECT_EQ(bytes.size(), 8u + 3 * 8 + 2 * 4 + 2 * 8 + 64 * 8 + 10 * 128 * 8);
  std::stringstream in(bytes);
  const auto q = NoisePath::load(in);
  EXPECT_TRUE(p == q);
  EXPECT_EQ(p.eval_at(1.25), q.eval_at(1.25));
  std::stringstream bad("NOTAPATH");
  EXPECT_THROW(NoisePath::load(bad), std::runtime_error);
}

TEST(NoisePath, EntriesAreSmoothSinusoidSums) {
  // Centered difference of a band-limited path converges at O(h^2).
  const auto p = NoisePath::build(small_model(3));
  const double t = 1.7;
  const Eigen::MatrixXd d1 = (p.eval_at(t + 1e-3) - p.eval_at(t - 1e-3)) / 2e-3;
  const Eigen::MatrixXd d2 = (p.eval_at(t + 5e-4) - p.eval_at(t - 5e-4)) / 1e-3;
  EXPECT_LT((d1 - d2).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(NoiseStatistics, VarianceRatioDiagonalOffDiagonal) {
  const auto m = small_model(8, 11);
  std::vector<double> diag, off;
  for (std::size_t p = 0; p < 4000; ++p) {
    const auto h = NoisePath::build(m, derive_seed(m.seed, p)).eval_at(0.0);
    for (int k = 0; k < 8; ++k) {
      diag.push_back(h(k, k));
      for (int l = k + 1; l < 8; ++l) off.push_back(h(k, l));
    }
  }
  const double vd = moments(diag).var, vo = moments(off).var;
  EXPECT_NEAR(vd, 2.0 * m.sigma_sq, 0.05 * 2.0 * m.sigma_sq);
  EXPECT_NEAR(vo, m.sigma_sq, 0.05 * m.sigma_sq);
  EXPECT_NEAR(vd / vo, 2.0, 0.1);
}

TEST(NoiseStatistics, ProductMomentAtLagThree) {
  const auto m = small_model(2, 21);
  const auto pts = empirical_autocorrelation(m, 10000, {3.0});
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_NEAR(pts[0].expected, std::sin(3.0) / 3.0, 1e-12);
  EXPECT_NEAR(pts[0].r_hat, std::sin(3.0) / 3.0, 3.0 * pts[0].std_err + 1e-3);
}

TEST(NoiseStatistics, AutocorrelationKnownPoints) {
  const auto m = small_model(2, 5);
  const auto pts = empirical_autocorrelation(m, 10000, {0.0, 1.0, std::numbers::pi});
  EXPECT_NEAR(pts[0].expected, 1.0, 1e-15);
  EXPECT_NEAR(pts[0].r_hat, 1.0, 3.0 * pts[0].std_err);
  EXPECT_NEAR(pts[1].r_hat, 0.8414709848, 3.0 * pts[1].std_err);
  EXPECT_NEAR(pts[2].r_hat, 0.0, 3.0 * pts[2].std_err);
  EXPECT_THROW(empirical_autocorrelation(m, 10, {}), std::invalid_argument);
  EXPECT_THROW(empirical_autocorrelation(m, 1, {0.0}), std::invalid_argument);
}

TEST(NoiseStatistics, StationarityUnderTimeShift) {
  const auto m = small_model(3, 8);
  const std::vector<double> taus{0.5, 2.0, 4.0};
  const auto a = empirical_autocorrelation(m, 5000, taus, 0.0);
  auto m2 = m;
  m2.seed = 9;  // independent ensemble at a later base time
  const auto b = empirical_autocorrelation(m2, 5000, taus, 37.0);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double se = std::hypot(a[i].std_err, b[i].std_err);
    EXPECT_NEAR(a[i].r_hat, b[i].r_hat, 3.5 * se) << "tau=" << taus[i];
  }
}

TEST(NoiseStatistics, MarginalsAreGaussian) {
  const auto m = small_model(2, 31);
  const double s = std::sqrt(m.sigma_sq);
  std::vector<double> x4;
  for (std::size_t p = 0; p < 10000; ++p) {
    const double z = NoisePath::build(m, derive_seed(m.seed, p)).eval_at(0.8)(0, 1) / s;
    x4.push_back(z * z * z * z);
  }
  const auto mo = moments(x4);
  EXPECT_NEAR(mo.mean, 3.0, 3.0 * std::sqrt(mo.var / 10000.0));
}

TEST(NoiseStatistics, DistinctElementsUncorrelated) {
  const auto m = small_model(3, 41);
  std::vector<double> p1, p2, p3;
  for (std::size_t p = 0; p < 10000; ++p) {
    const auto h = NoisePath::build(m, derive_seed(m.seed, p)).eval_at(1.3);
    p1.push_back(h(0, 1) * h(0, 2));
    p2.push_back(h(0, 0) * h(1, 2));
    p3.push_back(h(1, 1) * h(0, 1));
  }
  for (const auto* v : {&p1, &p2, &p3}) {
    const auto mo = moments(*v);
    EXPECT_NEAR(mo.mean, 0.0, 3.0 * std::sqrt(mo.var / 10000.0));
  }
}

TEST(NoiseStatistics, TrialSubstreamsIndependent) {
  const auto m = small_model(2, 51);
  std::vector<double> prod;
  for (std::size_t p = 0; p < 5000; ++p) {
    const double a = NoisePath::build(m, derive_seed(m.seed, 2 * p)).eval_at(0.0)(0, 1);
    const double b = NoisePath::build(m, derive_seed(m.seed, 2 * p + 1)).eval_at(0.0)(0, 1);
    prod.push_back(a * b);
  }
  const auto mo = moments(prod);
  EXPECT_NEAR(mo.mean, 0.0, 3.0 * std::sqrt(mo.var / 5000.0));
}

TEST(Semicircle, EdgesAndShapeAtLargeN) {
  auto m = NoiseModel::constant_snr(256, 0.0, 1.0);
  m.seed = 2;
  const auto c = eigenvalue_density_check(m, 20, 40);
  EXPECT_NEAR(c.edge, 1.0, 1e-14);
  EXPECT_NEAR(c.observed_max, 1.0, c.bin_width);
  EXPECT_NEAR(c.observed_min, -1.0, c.bin_width);
  EXPECT_LT(c.sup_deviation, 0.1 * c.peak_density);
  EXPECT_TRUE(c.asymptotic_reliable);
}

TEST(Semicircle, SmallNFlagged) {
  auto m = small_model(2);
  const auto c = eigenvalue_density_check(m, 5, 10);
  EXPECT_FALSE(c.asymptotic_reliable);
}

TEST(NoisePath, LargeEvaluationIsFast) {
  auto m = NoiseModel::constant_snr(256, 0.1, 1.0);
  const auto p = NoisePath::build(m);
  Eigen::MatrixXd h;
  const auto t0 = std::chrono::steady_clock::now();
  p.eval_at(0.3, h);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(ms, 50.0);
}
