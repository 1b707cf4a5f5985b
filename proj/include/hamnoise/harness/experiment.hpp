#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hamnoise/harness/config.hpp"
#include "hamnoise/harness/table.hpp"
#include "hamnoise/perturbative.hpp"

namespace hamnoise::harness {

/// Thread count: explicit value if positive, else HAMNOISE_THREADS, else 1.
std::size_t resolve_threads(std::size_t requested);

/// Calls fn(i) for i in [0, n) on `threads` workers. Work is handed out by
/// an atomic counter; callers store results by index.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct Aggregate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t n = 0;
};

/// Mean and sample-std / sqrt(n), summed in index order.
Aggregate aggregate(const std::vector<double>& values);

struct SweepRow {
  std::string param;  // "none" for a single run
  double value = 0.0;
  std::size_t n_dim = 0;
  double epsilon = 0.0;
  double omega0 = 0.0;
  double delta = 0.0;
  double total_time = 0.0;
  std::size_t n_modes = 0;
  std::size_t n_trials = 0;
  Aggregate p_err;
  Aggregate p_err_alt;
  double ideal_p_err = 0.0;
  std::optional<PerrPrediction> prediction;
  bool regime_high = false;
  bool regime_low = false;
  std::string status = "ok";
  double wall_time = 0.0;  // metadata only, never in the CSV
  std::vector<double> trial_p_err;  // by trial index
};

/// Runs n_trials trials of one resolved configuration and attaches the
/// matching prediction.
SweepRow monte_carlo(const ExperimentConfig& point, std::size_t threads,
                     const std::string& param = "none", double value = 0.0);

struct SweepResult {
  std::vector<SweepRow> rows;
  Table overlay;  // omega0 axis only: analytic curve at fine resolution
};

SweepResult sweep(const ExperimentConfig& cfg, std::size_t threads);

/// Analytic predictions for a resolved point. Adiabatic points run one
/// noiseless propagation for p_bar.
PerrPrediction predict_point(const ExperimentConfig& point);

/// omega0 grid for the overlay: log-spaced over the sweep range, merged
/// with the sweep values themselves.
std::vector<double> overlay_grid(const std::vector<double>& values, std::size_t points);

Table rows_table(const std::vector<SweepRow>& rows);
Table prediction_table(const std::string& param, const std::vector<double>& values,
                       const std::vector<PerrPrediction>& preds, const std::vector<double>& eps,
                       const std::vector<std::string>& regimes);

struct RegimeSheet {
  ConditionReport report;
  double regime_factor = kRegimeFactor;
  // eps*(N) = c N^{-1/4} with c = sqrt(target / K), K = <p_err>/(eps^2 sqrt(N)) at N = 16, omega0 = E.
  double calibration_k = 0.0;
  double calibration_c = 0.0;
  std::string calibration_source;
  double eps_star = 0.0;
  std::size_t n_dim = 0;
};

RegimeSheet regime_report(const ExperimentConfig& cfg, std::size_t threads);
Table regime_table(const RegimeSheet& sheet);
std::string regime_text(const RegimeSheet& sheet);

/// JSON sidecar: git hash, seed, thread count, timings, resolved config.
void write_metadata(const std::string& path, const ExperimentConfig& cfg, std::size_t threads,
                    const std::vector<SweepRow>& rows, const std::string& command,
                    double wall_time);

std::string git_hash();

}  // namespace hamnoise::harness
