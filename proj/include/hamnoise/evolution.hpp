#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "hamnoise/model.hpp"
#include "hamnoise/noise_process.hpp"

namespace hamnoise {

enum class Method { MagnusMidpoint, RK4 };

struct PropagatorConfig {
  Method method = Method::MagnusMidpoint;
  double dt_max = 0.05;
  double tol = 1e-8;
  bool renormalize = false;

  void validate() const;
};

/// Fills H(t). Hamiltonians here are real symmetric: both ideal algorithms
/// are real and the noise is GOE.
using HamiltonianFn = std::function<void(double t, Eigen::MatrixXd& h)>;

/// Frequency scales the step must resolve.
struct StepScales {
  double omega0 = 0.0;     // noise cut-off
  double omega_max = 0.0;  // largest transition frequency of the ideal H
};

/// Number of uniform steps: dt = T / n <= min(dt_max, 0.1/omega0, 0.1/omega_max).
std::size_t step_count(double total_time, const PropagatorConfig& cfg, const StepScales& scales);

struct Propagation {
  Eigen::VectorXcd state;
  double norm_drift = 0.0;
  std::size_t steps = 0;
};

/// Integrates i d/dt psi = H(t) psi over [0, T]. MagnusMidpoint refines the
/// step_count grid further when a sampled estimate of its local error
/// constant says a step of that size would exceed cfg.tol (NumericError
/// past 1e8 steps). It applies
/// exp(-i H(t + dt/2) dt) per step through a scaled Taylor series acting on
/// the state, truncated once a term falls below machine precision; RK4 is the
/// classical fourth-order scheme.
Propagation propagate(const HamiltonianFn& h, const Eigen::VectorXcd& psi0, double total_time,
                      const PropagatorConfig& cfg, const StepScales& scales);

enum class PerrDefinition { VsIdealState, VsInstantGround };

struct TrialResult {
  std::uint64_t trial_index = 0;
  std::uint64_t seed_used = 0;
  Eigen::VectorXcd final_state;
  double fidelity = 1.0;      // |<psi_bar(T)|psi(T)>|^2
  double p_err = 0.0;         // under the variant's definition
  double p_err_alt = 0.0;     // under the other definition
  PerrDefinition p_err_definition = PerrDefinition::VsIdealState;
  double norm_drift = 0.0;
  std::size_t steps = 0;
};

/// Runs trials of one (instance, noise, propagator) triple. The ideal
/// reference propagation is done once at construction.
class TrialRunner {
 public:
  TrialRunner(const ProblemInstance& inst, const NoiseModel& noise, const PropagatorConfig& cfg);

  /// Path seed: derive_seed(noise.seed, trial_index).
  TrialResult run(std::uint64_t trial_index) const;
  /// Propagates with a given path (epsilon taken from the noise model).
  TrialResult run_with_path(const NoisePath& path, std::uint64_t trial_index) const;

  double total_time() const { return total_time_; }
  const Eigen::VectorXcd& ideal_final_state() const { return ideal_state_; }
  /// Error of the noiseless run under the variant's definition.
  double ideal_p_err() const { return ideal_p_err_; }
  const StepScales& scales() const { return scales_; }
  const ProblemInstance& instance() const { return inst_; }
  const NoiseModel& noise() const { return noise_; }
  const Schedule* schedule() const { return schedule_.get(); }

 private:
  HamiltonianFn ideal_hamiltonian() const;

  ProblemInstance inst_;
  NoiseModel noise_;
  PropagatorConfig cfg_;
  std::shared_ptr<const Schedule> schedule_;
  Eigen::MatrixXd h_const_;
  Eigen::MatrixXd h0_, hf_;
  Eigen::VectorXcd psi0_;
  Eigen::VectorXcd ideal_state_;
  double ideal_p_err_ = 0.0;
  double total_time_ = 0.0;
  StepScales scales_;
};

/// Convenience wrapper around TrialRunner.
TrialResult run_trial(const ProblemInstance& inst, const NoiseModel& noise,
                      std::uint64_t trial_index, const PropagatorConfig& cfg);

}  // namespace hamnoise
