#include "hamnoise/oscillatory.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hamnoise/common.hpp"
#include "hamnoise/quadrature.hpp"

namespace hamnoise {
namespace {
std::string hamnoise_fmt(double v) { char b[32]; std::snprintf(b, sizeof b, "%.3e", v); return b; }
}  // namespace

namespace {

using C = std::complex<double>;

C ipow(int p) {
  switch (((p % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// int_a^b |F^(n)(x)| / |w(x)|^n dx on a modest uniform panelling.
double derivative_mass(const DerivativeFn& f, int n, double a, double b,
                       const std::function<double(double)>& omega) {
  const auto edges = quad::uniform_panels(a, b, 0.0, 32);
  const auto r = quad::gauss_kronrod(
      [&](double x) { return std::abs(f(n, x)) / std::pow(std::abs(omega(x)), n); }, edges, 1e-12);
  return r.value;
}

void require_nonzero(double omega) {
  if (omega == 0.0 || !std::isfinite(omega)) throw std::invalid_argument("ibp_series: omega must be nonzero");
}

C boundary_term(const DerivativeFn& f, int n, double a, double b, double wa, double wb, double pa,
                double pb) {
  const C ca = ipow(n + 1) / std::pow(wa, n + 1) * f(n, a) * std::polar(1.0, pa);
  const C cb = ipow(n + 1) / std::pow(wb, n + 1) * f(n, b) * std::polar(1.0, pb);
  return -(cb - ca);
}

}  // namespace

IbpSeriesResult ibp_series(const DerivativeFn& f, double a, double b, double omega, int n_max,
                           double tol) {
  require_nonzero(omega);
  if (n_max < 1) throw std::invalid_argument("ibp_series: n_max must be >= 1");
  const auto w = [omega](double) { return omega; };
  IbpSeriesResult r;
  for (int n = 0; n < n_max; ++n) {
    r.value += boundary_term(f, n, a, b, omega, omega, omega * a, omega * b);
    r.n_terms = n + 1;
    r.truncation_bound = derivative_mass(f, n + 1, a, b, w);
    if (!std::isfinite(r.truncation_bound)) throw NumericError("ibp_series: derivative provider failed");
    if (r.truncation_bound <= tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

IbpSeriesResult ibp_series_fixed(const DerivativeFn& f, double a, double b, double omega,
                                 int n_terms) {
  require_nonzero(omega);
  const auto w = [omega](double) { return omega; };
  IbpSeriesResult r;
  for (int n = 0; n < n_terms; ++n) {
    r.value += boundary_term(f, n, a, b, omega, omega, omega * a, omega * b);
  }
  r.n_terms = n_terms;
  r.truncation_bound = derivative_mass(f, n_terms, a, b, w);
  return r;
}

IbpSeriesResult ibp_series_varfreq(const DerivativeFn& f, double a, double b,
                                   const std::function<double(double)>& omega,
                                   const std::function<double(double)>& omega_prime,
                                   const std::function<double(double)>& phase, int n_max,
                                   double tol) {
  if (n_max < 1) throw std::invalid_argument("ibp_series_varfreq: n_max must be >= 1");
  // Resonance scan.
  constexpr int kScan = 2000;
  const double w_first = omega(a);
  for (int i = 0; i <= kScan; ++i) {
    const double w = omega(a + (b - a) * i / kScan);
    if (w == 0.0 || !std::isfinite(w) || (w > 0.0) != (w_first > 0.0)) {
      throw std::domain_error("ibp_series_varfreq: frequency vanishes on [a, b]");
    }
  }
  const double wa = omega(a), wb = omega(b), pa = phase(a), pb = phase(b);
  IbpSeriesResult r;
  for (int n = 0; n < n_max; ++n) {
    r.value += boundary_term(f, n, a, b, wa, wb, pa, pb);
    // d/dx (i/w)^{n+1} = -(n+1) i^{n+1} w' / w^{n+2}
    const C k = -static_cast<double>(n + 1) * ipow(n + 1);
    const auto integrand = [&, n, k](double x) {
      const double wp = omega_prime(x);
      if (wp == 0.0) return C(0.0, 0.0);
      return k * wp / std::pow(omega(x), n + 2) * f(n, x);
    };
    const OracleResult res = quadrature_oracle(integrand, a, b, phase, 1e-12, omega);
    r.value += res.value;
    r.quadrature_error += res.error;
    r.n_terms = n + 1;
    r.truncation_bound = derivative_mass(f, n + 1, a, b, omega);
    if (r.truncation_bound + r.quadrature_error <= tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

OracleResult quadrature_oracle(const std::function<std::complex<double>(double)>& f, double a,
                               double b, const std::function<double(double)>& phase, double tol,
                               const std::function<double(double)>& omega,
                               std::size_t max_panels) {
  if (!(tol > 0.0)) throw std::invalid_argument("quadrature_oracle: tol must be positive");
  if (!(b > a)) return {};
  const double span = b - a;
  auto rate = [&](double x) {
    if (omega) return std::abs(omega(x));
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    return std::abs(phase(x + h) - phase(x - h)) / (2.0 * h);
  };
  constexpr double kFraction = 0.75;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> edges{a};
  double x = a;
  const double cap = span / 8.0;
  while (x < b) {
    double len = cap;
    for (int it = 0; it < 3; ++it) {
      const double r = std::max(rate(x), rate(std::min(b, x + len)));
      if (r > 0.0) len = std::min(cap, kFraction * two_pi / r);
    }
    x = std::min(b, x + len);
    if (b - x < 1e-12 * span) x = b;
    edges.push_back(x);
    if (edges.size() > max_panels + 1) throw NumericError("quadrature_oracle: panel budget exhausted");
  }
  const auto g = [&](double t) { return f(t) * std::polar(1.0, phase(t)); };
  const auto res = quad::gauss_kronrod_complex(g, edges, 0.5 * tol);
  OracleResult out;
  out.value = res.value;
  out.error = res.error;
  out.panels = edges.size() - 1;
  if (!(out.error <= tol)) {
    throw NumericError("quadrature_oracle: error estimate " + hamnoise_fmt(out.error) +
                       " above tol");
  }
  return out;
}

DerivativeFn finite_difference_derivatives(const std::function<double(double)>& f, double omega,
                                           double h) {
  if (h <= 0.0) h = 1e-2 / std::sqrt(std::max(std::abs(omega), 1.0));
  return [f, h](int n, double x) -> std::complex<double> {
    if (n == 0) return f(x);
    auto central = [&](double step) {
      double s = 0.0;
      double binom = 1.0;
      for (int k = 0; k <= n; ++k) {
        s += ((k % 2) ? -binom : binom) * f(x + (0.5 * n - k) * step);
        binom = binom * (n - k) / (k + 1);
      }
      return s / std::pow(step, n);
    };
    const double d1 = central(h), d2 = central(0.5 * h);
    return d2 + (d2 - d1) / 3.0;
  };
}

AmplitudeIntegrand adiabatic_amplitude_integrand(const ProblemInstance& inst) {
  inst.validate();
  if (inst.variant != Variant::Adiabatic) throw std::invalid_argument("adiabatic_amplitude_integrand: variant mismatch");
  const double n = static_cast<double>(inst.n_dim);
  const double c = (n - 1.0) / n;
  const double e = inst.e_bar, d = inst.delta;
  const double r = std::sqrt(n - 1.0);
  const double kappa = 1.0 / (2.0 * r);
  const C root(0.5, kappa);
  const double pref = -(2.0 * e * e * r / n) / (8.0 * c * e * e);
  AmplitudeIntegrand out;
  out.f = [=](int k, double s) {
    const C diff = 1.0 / std::pow(C(s, 0.0) - root, k + 1) - 1.0 / std::pow(C(s, 0.0) - std::conj(root), k + 1);
    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= j;
    return pref * (k % 2 ? -fact : fact) * diff / C(0.0, 2.0 * kappa);
  };
  const auto q = [c](double s) { return 1.0 - 4.0 * c * s * (1.0 - s); };
  out.omega = [=](double s) { return 2.0 / (d * std::sqrt(q(s))); };
  out.omega_prime = [=](double s) { return 4.0 * c * (1.0 - 2.0 * s) / (d * std::pow(q(s), 1.5)); };
  out.phase = [=](double s) { return (std::asinh(2.0 * r * (s - 0.5)) + std::asinh(r)) / (d * std::sqrt(c)); };
  out.sup_a1 = 0.5 * d * std::sqrt(c);
  return out;
}

}  // namespace hamnoise
