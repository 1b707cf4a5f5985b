#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hamnoise {

enum class NoiseShape { WhiteSinc, Custom };

/// Sampled one-sided power spectral density on [0, omega0]. Only the shape
/// matters; the table is normalized when modes are weighted.
struct PsdTable {
  std::vector<double> omega;
  std::vector<double> density;
  std::string note;  // provenance, e.g. truncation of a Lorentzian
};

/// Truncated Lorentzian PSD whose untruncated correlation is exp(-rate*|tau|).
PsdTable lorentzian_psd(double rate, double cutoff, std::size_t n_points = 257);

struct NoiseModel {
  std::size_t n_dim = 2;
  double epsilon = 0.0;
  double omega0 = 1.0;
  NoiseShape shape = NoiseShape::WhiteSinc;
  std::size_t n_modes = 64;
  double sigma_sq = 0.125;
  std::uint64_t seed = 0;
  PsdTable psd;

  /// sigma^2 = e_bar^2 / (4N): keeps the noise spectrum on [-e_bar, e_bar].
  static NoiseModel constant_snr(std::size_t n_dim, double epsilon, double omega0,
                                 double e_bar = 1.0, std::size_t n_modes = 64,
                                 std::uint64_t seed = 0);

  /// (1 + delta_kl) sigma^2.
  double element_variance(std::size_t k, std::size_t l) const {
    return k == l ? 2.0 * sigma_sq : sigma_sq;
  }

  void validate() const;

  std::size_t n_elements() const { return n_dim * (n_dim + 1) / 2; }
};

/// Smallest mode count whose line spacing resolves a run of length T.
/// The equally spaced grid makes each path anti-periodic with half period
/// 2*pi*M/omega0; requiring it to exceed 2T gives M >= omega0*T/pi.
std::size_t auto_mode_count(double omega0, double total_time, std::size_t floor = 64);

/// Mode frequencies and weights (sum of weights is 1).
struct ModeGrid {
  std::vector<double> freqs;
  std::vector<double> weights;
};
ModeGrid make_mode_grid(const NoiseModel& model);

/// Normalized correlation f realized by the discrete modes, as a function of
/// the lag tau: sum_j w_j cos(omega_j tau).
double realized_correlation(const ModeGrid& grid, double tau);

/// Continuous-limit correlation of the model, as a function of tau. For
/// WhiteSinc this is sin(omega0 tau)/(omega0 tau); for Custom it is the
/// discrete realization.
double model_correlation(const NoiseModel& model, const ModeGrid& grid, double tau);

/// Index of the independent element (k <= l) in row-major upper-triangle order.
inline std::size_t element_index(std::size_t n, std::size_t k, std::size_t l) {
  return k * n - k * (k - 1) / 2 + (l - k);
}

class NoisePath {
 public:
  /// Builds the path for the model's own seed.
  static NoisePath build(const NoiseModel& model);
  /// Builds the path for an explicit path seed (e.g. a trial substream).
  static NoisePath build(const NoiseModel& model, std::uint64_t path_seed);

  /// h(t), exactly symmetric. epsilon is not applied.
  Eigen::MatrixXd eval_at(double t) const;
  void eval_at(double t, Eigen::MatrixXd& out) const;

  const NoiseModel& model() const { return model_; }
  const std::vector<double>& mode_freqs() const { return freqs_; }
  std::uint64_t seed() const { return seed_; }
  /// Row e holds sigma_e sqrt(w_j) a_j in columns [0, M) and the b_j terms in [M, 2M).
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }

  /// Little-endian layout: "HNPATH01", u64 N, u64 M, u64 seed, u32 shape,
  /// u32 reserved, f64 omega0, f64 sigma_sq, M f64 frequencies, then
  /// n_elem * 2M f64 coefficients row by row.
  void save(std::ostream& os) const;
  static NoisePath load(std::istream& is);

  bool operator==(const NoisePath& other) const;

 private:
  NoiseModel model_;
  std::uint64_t seed_ = 0;
  std::vector<double> freqs_;
  Eigen::MatrixXd coeffs_;
};

struct AutocorrPoint {
  double tau = 0.0;
  double r_hat = 0.0;    // estimate of R(tau) / sigma^2
  double std_err = 0.0;
  double expected = 0.0; // model_correlation at tau
};

/// Pools the off-diagonal element products h_kl(t0 + tau) h_kl(t0) over
/// n_paths independent paths (path p uses derive_seed(model.seed, p)).
std::vector<AutocorrPoint> empirical_autocorrelation(const NoiseModel& model, std::size_t n_paths,
                                                     const std::vector<double>& taus,
                                                     double t0 = 0.0);

struct SemicircleCheck {
  std::vector<double> bin_centers;
  std::vector<double> density;     // empirical
  std::vector<double> semicircle;  // bin-averaged exact law
  double edge = 0.0;               // sqrt(4 sigma^2 N)
  double observed_min = 0.0;
  double observed_max = 0.0;
  double bin_width = 0.0;
  double peak_density = 0.0;
  double sup_deviation = 0.0;
  bool asymptotic_reliable = true;
};

SemicircleCheck eigenvalue_density_check(const NoiseModel& model, std::size_t n_samples,
                                         std::size_t n_bins = 40);

}  // namespace hamnoise
