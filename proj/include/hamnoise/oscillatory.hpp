#pragma once

#include <complex>
#include <functional>

#include "hamnoise/model.hpp"

namespace hamnoise {

/// n-th derivative of F at x (n = 0 is F itself).
using DerivativeFn = std::function<std::complex<double>(int n, double x)>;

struct IbpSeriesResult {
  std::complex<double> value;
  int n_terms = 0;
  double truncation_bound = 0.0;
  bool converged = false;
  double quadrature_error = 0.0;  // residual integrals (varying frequency only)
};

/// Truncated integration-by-parts series for int_a^b F(x) e^{i w x} dx:
///   -sum_{n < N} (i/w)^{n+1} [F^(n)(x) e^{i w x}]_a^b,
/// with remainder bounded by w^-N int_a^b |F^(N)|. Stops once the bound
/// drops below tol or after n_max terms.
IbpSeriesResult ibp_series(const DerivativeFn& f, double a, double b, double omega, int n_max,
                           double tol);

/// Same with exactly n_terms terms, regardless of the bound.
IbpSeriesResult ibp_series_fixed(const DerivativeFn& f, double a, double b, double omega,
                                 int n_terms);

/// Varying frequency: int_a^b F(x) e^{i Phi(x)} dx with Phi' = w. Each order
/// contributes the boundary term -[(i/w)^{n+1} F^(n) e^{i Phi}]_a^b and the
/// residual int (d/dx (i/w)^{n+1}) F^(n) e^{i Phi}, evaluated by quadrature.
/// The tail after N orders is bounded by int |F^(N)| / |w|^N.
/// Refuses (std::domain_error) when w changes sign or vanishes on [a, b].
IbpSeriesResult ibp_series_varfreq(const DerivativeFn& f, double a, double b,
                                   const std::function<double(double)>& omega,
                                   const std::function<double(double)>& omega_prime,
                                   const std::function<double(double)>& phase, int n_max,
                                   double tol);

struct OracleResult {
  std::complex<double> value;
  double error = 0.0;
  std::size_t panels = 0;
};

/// Adaptive Gauss-Kronrod on panels no longer than 0.75 of the local period
/// (>= 20 nodes per period). The local rate comes from `omega` when given,
/// otherwise from a centered difference of the phase.
OracleResult quadrature_oracle(const std::function<std::complex<double>(double)>& f, double a,
                               double b, const std::function<double(double)>& phase, double tol,
                               const std::function<double(double)>& omega = nullptr,
                               std::size_t max_panels = 2000000);

/// Derivatives by central differences with one Richardson step. The step
/// is h = 1e-2 / sqrt(omega) unless given.
DerivativeFn finite_difference_derivatives(const std::function<double(double)>& f, double omega,
                                           double h = 0.0);

/// First-order excitation amplitude of the adiabatic search written in the
/// schedule variable s:
///   b_1(1) = int_0^1 F(s) e^{i Phi(s)} ds,
/// F = <phi_1|dH/ds|phi_0> / g = -dphi/ds = -C / (2 g^2), C = 2 E^2 sqrt(N-1) / N,
/// Phi' = omega(s) = 2 E / (delta g). Derivatives of F come from the
/// partial fractions of 1/g^2 (poles at s = 1/2 +- i / (2 sqrt(N-1))).
struct AmplitudeIntegrand {
  DerivativeFn f;
  std::function<double(double)> omega;
  std::function<double(double)> omega_prime;
  std::function<double(double)> phase;
  double sup_a1 = 0.0;  // max A_1 = (delta/2) sqrt((N-1)/N), at s = 1/2
};

AmplitudeIntegrand adiabatic_amplitude_integrand(const ProblemInstance& inst);

}  // namespace hamnoise
