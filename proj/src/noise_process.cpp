#include "hamnoise/noise_process.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "hamnoise/common.hpp"

namespace hamnoise {

PsdTable lorentzian_psd(double rate, double cutoff, std::size_t n_points) {
  if (!(rate > 0.0) || !(cutoff > 0.0) || n_points < 2) {
    throw std::invalid_argument("lorentzian_psd: rate, cutoff must be positive, n_points >= 2");
  }
  PsdTable t;
  for (std::size_t i = 0; i < n_points; ++i) {
    const double w = cutoff * static_cast<double>(i) / static_cast<double>(n_points - 1);
    t.omega.push_back(w);
    t.density.push_back(1.0 / (1.0 + (w / rate) * (w / rate)));
  }
  const double kept = 2.0 / std::numbers::pi * std::atan(cutoff / rate);
  t.note = "Lorentzian PSD truncated at omega0=" + std::to_string(cutoff) +
           "; retained power fraction " + std::to_string(kept);
  return t;
}

NoiseModel NoiseModel::constant_snr(std::size_t n_dim, double epsilon, double omega0, double e_bar,
                                    std::size_t n_modes, std::uint64_t seed) {
  NoiseModel m;
  m.n_dim = n_dim;
  m.epsilon = epsilon;
  m.omega0 = omega0;
  m.n_modes = n_modes;
  m.seed = seed;
  m.sigma_sq = e_bar * e_bar / (4.0 * static_cast<double>(n_dim));
  return m;
}

void NoiseModel::validate() const {
  if (n_dim == 0) throw std::invalid_argument("NoiseModel: n_dim must be positive");
  if (n_modes == 0) throw std::invalid_argument("NoiseModel: n_modes must be positive");
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) {
    throw std::invalid_argument("NoiseModel: omega0 must be positive");
  }
  if (!(sigma_sq >= 0.0) || !std::isfinite(sigma_sq)) {
    throw std::invalid_argument("NoiseModel: sigma_sq must be nonnegative");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("NoiseModel: epsilon must be nonnegative");
  }
  if (shape == NoiseShape::Custom) {
    if (psd.omega.size() < 2 || psd.omega.size() != psd.density.size()) {
      throw std::invalid_argument("NoiseModel: custom PSD needs >= 2 (omega, density) pairs");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < psd.omega.size(); ++i) {
      if (!(psd.density[i] >= 0.0)) throw std::invalid_argument("NoiseModel: negative PSD entry");
      if (psd.omega[i] < 0.0 || psd.omega[i] > omega0 * (1.0 + 1e-12)) {
        throw std::invalid_argument("NoiseModel: PSD support must lie in [0, omega0]");
      }
      if (i > 0 && !(psd.omega[i] > psd.omega[i - 1])) {
        throw std::invalid_argument("NoiseModel: PSD frequencies must increase");
      }
      total += psd.density[i];
    }
    if (!(total > 0.0)) throw std::invalid_argument("NoiseModel: PSD is identically zero");
  }
}

std::size_t auto_mode_count(double omega0, double total_time, std::size_t floor) {
  const double need = std::ceil(omega0 * total_time / std::numbers::pi);
  return std::max<std::size_t>(floor, static_cast<std::size_t>(std::max(need, 1.0)));
}

namespace {

double interpolate_psd(const PsdTable& t, double w) {
  if (w <= t.omega.front()) return t.density.front();
  if (w >= t.omega.back()) return w > t.omega.back() * (1.0 + 1e-12) ? 0.0 : t.density.back();
  const auto it = std::upper_bound(t.omega.begin(), t.omega.end(), w);
  const std::size_t i = static_cast<std::size_t>(it - t.omega.begin());
  const double x0 = t.omega[i - 1], x1 = t.omega[i];
  const double y0 = t.density[i - 1], y1 = t.density[i];
  return y0 + (y1 - y0) * (w - x0) / (x1 - x0);
}

}  // namespace

ModeGrid make_mode_grid(const NoiseModel& model) {
  model.validate();
  const std::size_t m = model.n_modes;
  ModeGrid g;
  g.freqs.resize(m);
  g.weights.assign(m, 1.0 / static_cast<double>(m));
  for (std::size_t j = 0; j < m; ++j) {
    g.freqs[j] = (static_cast<double>(j) + 0.5) * model.omega0 / static_cast<double>(m);
  }
  if (model.shape == NoiseShape::Custom) {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      g.weights[j] = interpolate_psd(model.psd, g.freqs[j]);
      total += g.weights[j];
    }
    if (!(total > 0.0)) throw std::invalid_argument("NoiseModel: PSD vanishes on the mode grid");
    for (double& w : g.weights) w /= total;
  }
  return g;
}

double realized_correlation(const ModeGrid& grid, double tau) {
  double s = 0.0;
  for (std::size_t j = 0; j < grid.freqs.size(); ++j) s += grid.weights[j] * std::cos(grid.freqs[j] * tau);
  return s;
}

double model_correlation(const NoiseModel& model, const ModeGrid& grid, double tau) {
  if (model.shape == NoiseShape::WhiteSinc) {
    const double x = model.omega0 * tau;
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
    return std::sin(x) / x;
  }
  return realized_correlation(grid, tau);
}

NoisePath NoisePath::build(const NoiseModel& model) { return build(model, model.seed); }

NoisePath NoisePath::build(const NoiseModel& model, std::uint64_t path_seed) {
  const ModeGrid grid = make_mode_grid(model);
  const std::size_t n = model.n_dim;
  const std::size_t m = model.n_modes;
  NoisePath p;
  p.model_ = model;
  p.seed_ = path_seed;
  p.freqs_ = grid.freqs;
  p.coeffs_.resize(static_cast<Eigen::Index>(model.n_elements()), static_cast<Eigen::Index>(2 * m));
  std::vector<double> amp(m);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k; l < n; ++l) {
      const std::size_t e = element_index(n, k, l);
      const double sigma = std::sqrt(model.element_variance(k, l));
      for (std::size_t j = 0; j < m; ++j) amp[j] = sigma * std::sqrt(grid.weights[j]);
      std::mt19937_64 eng(derive_seed(path_seed, e));
      std::normal_distribution<double> normal(0.0, 1.0);
      const auto row = static_cast<Eigen::Index>(e);
      for (std::size_t j = 0; j < m; ++j) {
        const double a = normal(eng);
        const double b = normal(eng);
        p.coeffs_(row, static_cast<Eigen::Index>(j)) = amp[j] * a;
        p.coeffs_(row, static_cast<Eigen::Index>(m + j)) = amp[j] * b;
      }
    }
  }
  return p;
}

void NoisePath::eval_at(double t, Eigen::MatrixXd& out) const {
  const std::size_t n = model_.n_dim;
  const std::size_t m = freqs_.size();
  Eigen::VectorXd trig(static_cast<Eigen::Index>(2 * m));
  for (std::size_t j = 0; j < m; ++j) {
    const double ph = freqs_[j] * t;
    trig[static_cast<Eigen::Index>(j)] = std::cos(ph);
    trig[static_cast<Eigen::Index>(m + j)] = std::sin(ph);
  }
  const Eigen::VectorXd values = coeffs_ * trig;
  out.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k; l < n; ++l) {
      const double v = values[static_cast<Eigen::Index>(element_index(n, k, l))];
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = v;
      out(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = v;
    }
  }
}

Eigen::MatrixXd NoisePath::eval_at(double t) const {
  Eigen::MatrixXd out;
  eval_at(t, out);
  return out;
}

namespace {

constexpr char kMagic[8] = {'H', 'N', 'P', 'A', 'T', 'H', '0', '1'};

template <typename T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is) throw std::runtime_error("NoisePath::load: truncated stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void NoisePath::save(std::ostream& os) const {
  os.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(os, model_.n_dim);
  put<std::uint64_t>(os, freqs_.size());
  put<std::uint64_t>(os, seed_);
  put<std::uint32_t>(os, model_.shape == NoiseShape::WhiteSinc ? 0U : 1U);
  put<std::uint32_t>(os, 0U);
  put<double>(os, model_.omega0);
  put<double>(os, model_.sigma_sq);
  for (double f : freqs_) put<double>(os, f);
  for (Eigen::Index r = 0; r < coeffs_.rows(); ++r) {
    for (Eigen::Index c = 0; c < coeffs_.cols(); ++c) put<double>(os, coeffs_(r, c));
  }
}

NoisePath NoisePath::load(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("NoisePath::load: bad magic");
  }
  NoisePath p;
  p.model_.n_dim = get<std::uint64_t>(is);
  p.model_.n_modes = get<std::uint64_t>(is);
  p.seed_ = get<std::uint64_t>(is);
  p.model_.seed = p.seed_;
  const auto shape = get<std::uint32_t>(is);
  (void)get<std::uint32_t>(is);
  p.model_.shape = shape == 0 ? NoiseShape::WhiteSinc : NoiseShape::Custom;
  p.model_.omega0 = get<double>(is);
  p.model_.sigma_sq = get<double>(is);
  if (p.model_.n_dim == 0 || p.model_.n_modes == 0 || p.model_.n_dim > (1U << 16) ||
      p.model_.n_modes > (1U << 24)) {
    throw std::runtime_error("NoisePath::load: implausible header");
  }
  p.freqs_.resize(p.model_.n_modes);
  for (double& f : p.freqs_) f = get<double>(is);
  p.coeffs_.resize(static_cast<Eigen::Index>(p.model_.n_elements()),
                   static_cast<Eigen::Index>(2 * p.model_.n_modes));
  for (Eigen::Index r = 0; r < p.coeffs_.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.coeffs_.cols(); ++c) p.coeffs_(r, c) = get<double>(is);
  }
  return p;
}

bool NoisePath::operator==(const NoisePath& other) const {
  return seed_ == other.seed_ && freqs_ == other.freqs_ && coeffs_.rows() == other.coeffs_.rows() &&
         coeffs_.cols() == other.coeffs_.cols() && coeffs_ == other.coeffs_;
}

std::vector<AutocorrPoint> empirical_autocorrelation(const NoiseModel& model, std::size_t n_paths,
                                                     const std::vector<double>& taus, double t0) {
  if (taus.empty()) throw std::invalid_argument("empirical_autocorrelation: empty taus");
  if (n_paths < 2) throw std::invalid_argument("empirical_autocorrelation: n_paths < 2");
  if (model.n_dim < 2) throw std::invalid_argument("empirical_autocorrelation: need N >= 2");
  const ModeGrid grid = make_mode_grid(model);
  const std::size_t n = model.n_dim;
  const std::size_t n_off = n * (n - 1) / 2;
  // One sample per path: the mean over off-diagonal elements of the
  // normalized product. Paths are independent, so the path-level spread
  // yields an honest standard error.
  std::vector<double> sum(taus.size(), 0.0), sum_sq(taus.size(), 0.0);
  Eigen::MatrixXd h0, h1;
  for (std::size_t p = 0; p < n_paths; ++p) {
    const NoisePath path = NoisePath::build(model, derive_seed(model.seed, p));
    path.eval_at(t0, h0);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      path.eval_at(t0 + taus[i], h1);
      double acc = 0.0;
      for (Eigen::Index k = 0; k < h0.rows(); ++k) {
        for (Eigen::Index l = k + 1; l < h0.cols(); ++l) acc += h1(k, l) * h0(k, l);
      }
      const double v = acc / (static_cast<double>(n_off) * model.sigma_sq);
      sum[i] += v;
      sum_sq[i] += v * v;
    }
  }
  std::vector<AutocorrPoint> out;
  const double np = static_cast<double>(n_paths);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    AutocorrPoint pt;
    pt.tau = taus[i];
    pt.r_hat = sum[i] / np;
    const double var = std::max(0.0, (sum_sq[i] - np * pt.r_hat * pt.r_hat) / (np - 1.0));
    pt.std_err = std::sqrt(var / np);
    pt.expected = model_correlation(model, grid, taus[i]);
    out.push_back(pt);
  }
  return out;
}

namespace {

// Integral of sqrt(r^2 - x^2) from 0 to x, clamped to the support.
double semicircle_primitive(double x, double r) {
  x = std::clamp(x, -r, r);
  return 0.5 * (x * std::sqrt(std::max(0.0, r * r - x * x)) + r * r * std::asin(x / r));
}

}  // namespace

SemicircleCheck eigenvalue_density_check(const NoiseModel& model, std::size_t n_samples,
                                         std::size_t n_bins) {
  if (n_samples == 0 || n_bins == 0) {
    throw std::invalid_argument("eigenvalue_density_check: need samples and bins");
  }
  SemicircleCheck c;
  const double n = static_cast<double>(model.n_dim);
  c.edge = std::sqrt(4.0 * model.sigma_sq * n);
  c.asymptotic_reliable = model.n_dim >= 64;
  const double lo = -1.25 * c.edge, hi = 1.25 * c.edge;
  c.bin_width = (hi - lo) / static_cast<double>(n_bins);
  std::vector<double> counts(n_bins, 0.0);
  c.observed_min = std::numeric_limits<double>::infinity();
  c.observed_max = -std::numeric_limits<double>::infinity();
  std::size_t total = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const NoisePath path = NoisePath::build(model, derive_seed(model.seed, s));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(path.eval_at(0.0), Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double e = es.eigenvalues()[i];
      c.observed_min = std::min(c.observed_min, e);
      c.observed_max = std::max(c.observed_max, e);
      ++total;
      if (e < lo || e >= hi) continue;
      counts[static_cast<std::size_t>((e - lo) / c.bin_width)] += 1.0;
    }
  }
  const double r = c.edge;
  const double norm = 2.0 / (std::numbers::pi * r * r);
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double a = lo + c.bin_width * static_cast<double>(b);
    c.bin_centers.push_back(a + 0.5 * c.bin_width);
    c.density.push_back(counts[b] / (static_cast<double>(total) * c.bin_width));
    const double exact =
        r > 0.0 ? norm * (semicircle_primitive(a + c.bin_width, r) - semicircle_primitive(a, r)) /
                      c.bin_width
                : 0.0;
    c.semicircle.push_back(exact);
    c.peak_density = std::max(c.peak_density, exact);
    c.sup_deviation = std::max(c.sup_deviation, std::abs(c.density.back() - exact));
  }
  return c;
}

}  // namespace hamnoise
