#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hamnoise/evolution.hpp"
#include "hamnoise/model.hpp"
#include "hamnoise/noise_process.hpp"

namespace hamnoise::harness {

/// Flat `section.key = value` file. '#' starts a comment; blank lines are
/// ignored. Duplicate keys and unknown keys are errors.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is, const std::string& source = "<config>");
  static KeyValueConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Every key the harness understands.
const std::vector<std::string>& known_keys();

enum class SweepParam { Omega0, NDim, Epsilon, Delta };
std::string to_string(SweepParam p);

struct SweepAxis {
  SweepParam param = SweepParam::Omega0;
  std::vector<double> values;
};

struct ExperimentConfig {
  ProblemInstance instance;
  NoiseModel noise;
  bool sigma_from_snr = true;  // sigma^2 = E^2/(4N) at each point
  bool auto_modes = false;     // n_modes from auto_mode_count
  std::optional<double> lorentzian_rate;  // rebuilds the PSD at each omega0
  std::size_t n_trials = 100;
  std::optional<SweepAxis> sweep;
  std::size_t analytic_points = 200;  // omega0 overlay resolution
  PropagatorConfig propagator;
  std::string out_dir = ".";
  std::string format = "csv";
  std::uint64_t master_seed = 12345;
  double target_p_err = 0.1;
  std::size_t calibration_trials = 0;
  // noise-check
  std::size_t check_paths = 10000;
  std::size_t check_samples = 20;
  std::size_t check_bins = 40;
  std::vector<double> check_omega_tau;
  // spectrum
  std::size_t spectrum_points = 201;

  void validate() const;
};

ExperimentConfig experiment_from(const KeyValueConfig& kv);

/// Applies one sweep value and resolves the derived fields (sigma^2 from the
/// signal-to-noise rule, n_modes = auto, dimensions, seed).
ExperimentConfig at_point(const ExperimentConfig& cfg, std::optional<double> sweep_value);

/// Run time of the instance (analog closed form or schedule).
double run_time(const ProblemInstance& inst);

/// Round-trip echo of the resolved configuration (for metadata).
std::map<std::string, std::string> describe(const ExperimentConfig& cfg);

}  // namespace hamnoise::harness
