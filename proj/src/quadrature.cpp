#include "hamnoise/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace hamnoise::quad {

namespace {

using Gauss20 = boost::math::quadrature::gauss<double, 20>;
using Kronrod15 = boost::math::quadrature::gauss_kronrod<double, 15>;

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Boost stores the non-negative half of a symmetric rule.
Rule make_rule() {
  Rule r;
  const auto& x = Gauss20::abscissa();
  const auto& w = Gauss20::weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      r.nodes.push_back(0.0);
      r.weights.push_back(w[i]);
      continue;
    }
    r.nodes.push_back(-x[i]);
    r.weights.push_back(w[i]);
    r.nodes.push_back(x[i]);
    r.weights.push_back(w[i]);
  }
  return r;
}

const Rule& rule() {
  static const Rule r = make_rule();
  return r;
}

using Gauss7 = boost::math::quadrature::gauss<double, 7>;

// Kronrod abscissae 1, 3, 5 (0-based, non-negative half) are the Gauss-7 nodes.
template <class T, class F>
void gk15(const F& f, double a, double b, T& value, double& err, double& mass) {
  const auto& xk = Kronrod15::abscissa();
  const auto& wk = Kronrod15::weights();
  const auto& wg = Gauss7::weights();
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  const T c = f(mid);
  T k = wk[0] * c, g = wg[0] * c;
  double m = wk[0] * std::abs(c);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const T lo = f(mid - half * xk[i]), hi = f(mid + half * xk[i]);
    const T s = lo + hi;
    k += wk[i] * s;
    m += wk[i] * (std::abs(lo) + std::abs(hi));
    if (i % 2 == 0) g += wg[i / 2] * s;
  }
  value = k * half;
  err = std::abs((k - g) * half);
  mass = m * std::abs(half);
}

template <class T, class F>
void adapt(const F& f, double a, double b, double budget, int depth, T& value, double& err) {
  T v{};
  double e = 0.0, mass = 0.0;
  gk15<T>(f, a, b, v, e, mass);
  // Below the rounding floor bisection cannot help.
  if (e <= budget || e <= 50.0 * std::numeric_limits<double>::epsilon() * mass || depth == 0) {
    value += v;
    err += e;
    return;
  }
  const double m = 0.5 * (a + b);
  adapt<T>(f, a, m, 0.5 * budget, depth - 1, value, err);
  adapt<T>(f, m, b, 0.5 * budget, depth - 1, value, err);
}

template <class T, class F>
void integrate_panels(const F& f, const std::vector<double>& edges, double tol, T& value,
                      double& err) {
  if (edges.size() < 2) return;
  const double span = edges.back() - edges.front();
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double share = span > 0.0 ? tol * (edges[i + 1] - edges[i]) / span : tol;
    adapt<T>(f, edges[i], edges[i + 1], share, 20, value, err);
  }
}

}  // namespace

std::vector<double> uniform_panels(double a, double b, double max_length, int min_panels) {
  if (!(b >= a)) throw std::invalid_argument("uniform_panels: b < a");
  int n = std::max(min_panels, 1);
  if (max_length > 0.0 && b > a) {
    n = std::max(n, static_cast<int>(std::ceil((b - a) / max_length)));
  }
  std::vector<double> edges(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) edges[i] = a + (b - a) * static_cast<double>(i) / n;
  edges.back() = b;
  return edges;
}

const std::vector<double>& gauss20_nodes() { return rule().nodes; }
const std::vector<double>& gauss20_weights() { return rule().weights; }

double gauss20(const std::function<double(double)>& f, double a, double b) {
  return Gauss20::integrate(f, a, b);
}

std::complex<double> gauss20(const std::function<std::complex<double>(double)>& f, double a,
                             double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  std::complex<double> s = 0.0;
  const auto& r = rule();
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

AdaptiveResult gauss_kronrod(const std::function<double(double)>& f,
                             const std::vector<double>& edges, double tol) {
  AdaptiveResult out;
  integrate_panels<double>(f, edges, tol, out.value, out.error);
  return out;
}

AdaptiveComplexResult gauss_kronrod_complex(const std::function<std::complex<double>(double)>& f,
                                            const std::vector<double>& edges, double tol) {
  AdaptiveComplexResult out;
  integrate_panels<std::complex<double>>(f, edges, tol, out.value, out.error);
  return out;
}

}  // namespace hamnoise::quad
