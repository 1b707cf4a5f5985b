#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace hamnoise::quad {

/// Splits [a, b] into panels no longer than `max_length`, with at least
/// `min_panels` panels of equal length.
std::vector<double> uniform_panels(double a, double b, double max_length, int min_panels = 1);

/// Fixed 20-point Gauss-Legendre rule on [a, b].
double gauss20(const std::function<double(double)>& f, double a, double b);
std::complex<double> gauss20(const std::function<std::complex<double>(double)>& f, double a,
                             double b);

/// Gauss-Legendre nodes/weights of order 20 on [-1, 1].
const std::vector<double>& gauss20_nodes();
const std::vector<double>& gauss20_weights();

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
};

struct AdaptiveComplexResult {
  std::complex<double> value;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod (7/15) on each panel of `edges`. Panels are bisected
/// until |K15 - G7| fits their share of the absolute tol (length-weighted),
/// at most 20 levels deep, or until it sits at the rounding floor. `error` is the sum of the final |K15 - G7|.
AdaptiveResult gauss_kronrod(const std::function<double(double)>& f,
                             const std::vector<double>& edges, double tol);
AdaptiveComplexResult gauss_kronrod_complex(const std::function<std::complex<double>(double)>& f,
                                            const std::vector<double>& edges, double tol);

}  // namespace hamnoise::quad
