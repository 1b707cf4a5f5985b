#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace hamnoise {

enum class Variant { Analog, Adiabatic };

struct ProblemInstance {
  Variant variant = Variant::Analog;
  std::size_t n_dim = 4;
  double e_bar = 1.0;
  std::size_t marked = 0;
  double delta = 0.1;  // adiabatic only, 0 < delta < 1

  void validate() const;
  static ProblemInstance analog(std::size_t n, double e_bar = 1.0, std::size_t marked = 0);
  static ProblemInstance adiabatic(std::size_t n, double delta, double e_bar = 1.0,
                                   std::size_t marked = 0);
};

/// Uniform superposition over the computational basis.
Eigen::VectorXd uniform_state(std::size_t n);

/// Instantaneous eigen-data. Column 0 of `vectors` is the ground state,
/// column 1 the first excited state, columns 2.. span the degenerate level.
struct SpectrumView {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;
  Eigen::VectorXcd ideal_amplitudes;  // b_k
  bool degenerate_empty = false;
  double e_bar = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  /// omega_kl = E_k - E_l.
  double omega(std::size_t k, std::size_t l) const {
    return eigenvalues[static_cast<Eigen::Index>(k)] - eigenvalues[static_cast<Eigen::Index>(l)];
  }
  double gap() const { return size() > 1 ? omega(1, 0) : 0.0; }
  Eigen::VectorXd ground() const { return vectors.col(0); }
  Eigen::VectorXd first_excited() const { return vectors.col(1); }
  Eigen::MatrixXd degenerate_basis() const;
};

// Analog search: H = E(I - |psi0><psi0|) + E(I - |m><m|), constant in time.

Eigen::MatrixXd analog_hamiltonian(const ProblemInstance& inst);
SpectrumView analog_spectrum(const ProblemInstance& inst);
/// T = pi sqrt(N) / (2 E).
double analog_run_time(const ProblemInstance& inst);

// Adiabatic search: H(s) = (1 - s) H0 + s Hf.

Eigen::MatrixXd adiabatic_hamiltonian(const ProblemInstance& inst, double s);
/// H_f - H_0, i.e. dH/ds.
Eigen::MatrixXd adiabatic_hamiltonian_derivative(const ProblemInstance& inst);
SpectrumView adiabatic_spectrum(const ProblemInstance& inst, double s);

/// Gap E1 - E0 at s.
double adiabatic_gap(const ProblemInstance& inst, double s);
/// Minimum gap E / sqrt(N), attained at s = 1/2.
double adiabatic_min_gap(const ProblemInstance& inst);
/// Mixing angle phi(s): ground state is sin(phi)|m> + cos(phi)|m_perp>.
double adiabatic_mixing_angle(const ProblemInstance& inst, double s);

/// Orthonormal basis of the subspace orthogonal to |m> and to the uniform
/// superposition of the unmarked states (N x (N-2)). Built by Gram-Schmidt
/// from (|k> - |k1>)/sqrt(2).
Eigen::MatrixXd degenerate_subspace_basis(std::size_t n, std::size_t marked);

/// Equality schedule ds/dt = delta g(s)^2 / (2 E). t(s) is tabulated by
/// adaptive quadrature on a uniform s grid; s(t) is the cubic Hermite
/// interpolant through the table with exact slopes.
class Schedule {
 public:
  explicit Schedule(const ProblemInstance& inst, std::size_t n_grid = 4096);

  double total_time() const { return total_time_; }
  double s_of_t(double t) const;
  double t_of_s(double s) const;
  /// ds/dt evaluated from the gap at s(t).
  double ds_dt(double t) const;
  /// Derivative of the interpolant itself.
  double interpolant_slope(double t) const;

  const std::vector<double>& s_grid() const { return s_; }
  const std::vector<double>& t_grid() const { return t_; }
  const ProblemInstance& instance() const { return inst_; }

  /// Closed forms for the equality schedule, used as oracles.
  static double exact_total_time(const ProblemInstance& inst);
  static double exact_t_of_s(const ProblemInstance& inst, double s);
  static double exact_s_of_t(const ProblemInstance& inst, double t);

 private:
  ProblemInstance inst_;
  double total_time_ = 0.0;
  std::vector<double> s_;
  std::vector<double> t_;
  std::vector<double> slope_;  // ds/dt at the knots
};

/// Phase accumulated by omega_k0 from 0 to t, k = 1 (gap) or k >= 2
/// (E - E0). Closed form in s.
double adiabatic_phase(const ProblemInstance& inst, const Schedule& sched, std::size_t k,
                       double t);
/// omega_k0 at time t.
double adiabatic_omega(const ProblemInstance& inst, const Schedule& sched, std::size_t k,
                       double t);

/// A_k(t) = |<phi_k| dH/dt |phi_0>| / (E_k - E_0)^2 for k = 1..N-1
/// (index 0 of the returned vector is k = 1). Evaluated from the full
/// eigenvectors, so k >= 2 entries are numerical near-zeros.
std::vector<double> adiabaticity_coefficients(const ProblemInstance& inst, const Schedule& sched,
                                              double t);

struct AdiabaticConditionCheck {
  std::vector<double> sup_a;  // sup over the grid, per k = 1..N-1
  double sup_a1_time = 0.0;
  double lhs = 0.0;  // 4 sum_k sup |A_k|^2
  double rhs = 0.0;  // delta^2
  bool satisfied = false;
};

AdiabaticConditionCheck check_adiabatic_condition(const ProblemInstance& inst,
                                                  const Schedule& sched, std::size_t n_grid);

}  // namespace hamnoise
