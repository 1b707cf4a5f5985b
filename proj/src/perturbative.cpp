#include "hamnoise/perturbative.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hamnoise/quadrature.hpp"

namespace hamnoise {

namespace {

constexpr double kPi = std::numbers::pi;

// Si by its Maclaurin series; alternating, fine for |x| <= 4.
double si_series(double x) {
  const double x2 = x * x;
  double term = x;  // x^(2n+1) / (2n+1)!
  double sum = x;
  for (int n = 1; n < 40; ++n) {
    term *= -x2 / ((2.0 * n) * (2.0 * n + 1.0));
    const double add = term / (2.0 * n + 1.0);
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Si from E1(ix) by the modified Lentz continued fraction, x > 2.
double si_continued_fraction(double x) {
  using C = std::complex<double>;
  constexpr double tiny = 1e-300;
  C b(1.0, x);
  C c(1.0 / tiny, 0.0);
  C d = 1.0 / b;
  C h = d;
  for (int i = 2; i < 10000; ++i) {
    const double a = -static_cast<double>((i - 1) * (i - 1));
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const C del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-16) break;
  }
  h *= C(std::cos(x), -std::sin(x));
  return kPi / 2.0 + h.imag();
}

// (1 - cos(z T)) / z, finite at z = 0.
double one_minus_cos_over(double z, double total_time) {
  const double y = z * total_time;
  if (std::abs(y) < 1e-4) {
    const double y2 = y * y;
    return total_time * y * (0.5 - y2 / 24.0 + y2 * y2 / 720.0 - y2 * y2 * y2 / 40320.0);
  }
  return (1.0 - std::cos(y)) / z;
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
  return std::sin(x) / x;
}

}  // namespace

double sine_integral(double x) {
  if (x < 0.0) return -sine_integral(-x);
  if (x == 0.0) return 0.0;
  if (x <= 4.0) return si_series(x);
  return si_continued_fraction(x);
}

CorrelationFn white_sinc(double omega0) {
  return [omega0](double tau) { return sinc(omega0 * tau); };
}

CorrelationFn correlation_of(const NoiseModel& model) {
  if (model.shape == NoiseShape::WhiteSinc) return white_sinc(model.omega0);
  const ModeGrid grid = make_mode_grid(model);
  return [grid](double tau) { return realized_correlation(grid, tau); };
}

double i_minus_exact_whitenoise(double omega, double omega0, double total_time, double sigma_sq) {
  if (!(omega0 > 0.0) || !(total_time > 0.0)) {
    throw std::invalid_argument("i_minus_exact_whitenoise: omega0 and T must be positive");
  }
  const double t = total_time;
  const double zp = omega0 + omega;
  const double zm = omega0 - omega;
  const double bracket = t * sine_integral(zp * t) - one_minus_cos_over(zp, t) +
                         t * sine_integral(zm * t) - one_minus_cos_over(zm, t);
  return sigma_sq / omega0 * bracket;
}

namespace {

double panel_length(double omega, double omega0) {
  const double rate = std::abs(omega) + omega0;
  return rate > 0.0 ? kPi / rate : std::numeric_limits<double>::infinity();
}

void require_positive(double omega0, double total_time, const char* who) {
  if (!(omega0 > 0.0) || !(total_time > 0.0)) {
    throw std::invalid_argument(std::string(who) + ": omega0 and T must be positive");
  }
}

}  // namespace

IntegralValue i_minus_numeric(double omega, double omega0, double total_time, double sigma_sq,
                              const CorrelationFn& f, double rel_tol) {
  require_positive(omega0, total_time, "i_minus_numeric");
  const double t = total_time;
  const auto edges = quad::uniform_panels(0.0, t, panel_length(omega, omega0), 4);
  const auto r = quad::gauss_kronrod(
      [&](double u) { return (t - u) * std::cos(omega * u) * f(u); }, edges, 1e-13);
  IntegralValue out;
  out.value = 2.0 * sigma_sq * r.value;
  out.error = 2.0 * sigma_sq * r.error;
  out.tolerance_met = out.error <= rel_tol * std::abs(out.value) + 1e-300;
  return out;
}

ComplexIntegralValue i_plus_numeric(double omega, double omega0, double total_time,
                                    double sigma_sq, const CorrelationFn& f, double rel_tol) {
  require_positive(omega0, total_time, "i_plus_numeric");
  const double t = total_time;
  const auto edges = quad::uniform_panels(0.0, t, panel_length(omega, omega0), 4);
  // sin(omega (T - u)) / omega written as (T - u) sinc(omega (T - u)).
  const auto r = quad::gauss_kronrod(
      [&](double u) { return f(u) * (t - u) * sinc(omega * (t - u)); }, edges, 1e-13);
  ComplexIntegralValue out;
  const std::complex<double> rot = std::polar(1.0, omega * t);
  out.value = 2.0 * sigma_sq * rot * r.value;
  out.error = 2.0 * sigma_sq * r.error;
  out.tolerance_met = out.error <= rel_tol * std::abs(out.value) + 1e-300;
  return out;
}

namespace {

double phase_integral_pass(const PhaseFunction& phase, double omega0, double total_time,
                           const CorrelationFn& f, const OverlapFn& overlap, double refine) {
  const auto& x = quad::gauss20_nodes();
  const auto& w = quad::gauss20_weights();
  const double t_end = total_time;
  const double outer_len = panel_length(phase.rate_max, omega0) / refine;
  const auto outer = quad::uniform_panels(0.0, t_end, outer_len, 8);
  const double spread = std::max(phase.rate_max - phase.rate_min, 0.0);
  double inner_len = t_end / (16.0 * refine);
  if (spread > 0.0) inner_len = std::min(inner_len, kPi / (2.0 * spread * refine));
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < outer.size(); ++p) {
    const double a = outer[p], b = outer[p + 1];
    const double hu = 0.5 * (b - a), mu = 0.5 * (a + b);
    double panel = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = mu + hu * x[i];
      const double fu = f(u);
      const double len = t_end - u;
      if (len <= 0.0) continue;
      const auto inner = quad::uniform_panels(0.0, len, inner_len, 1);
      double inner_sum = 0.0;
      for (std::size_t q = 0; q + 1 < inner.size(); ++q) {
        const double c = inner[q], d = inner[q + 1];
        const double ht = 0.5 * (d - c), mt = 0.5 * (c + d);
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
          const double t2 = mt + ht * x[j];
          const double t1 = t2 + u;
          double v = std::cos(phase.phase(t1) - phase.phase(t2));
          if (overlap) v *= overlap(t1, t2);
          s += w[j] * v;
        }
        inner_sum += s * ht;
      }
      panel += w[i] * fu * inner_sum;
    }
    total += panel * hu;
  }
  return total;
}

}  // namespace

IntegralValue i_minus_numeric_phase(const PhaseFunction& phase, double omega0, double total_time,
                                    double sigma_sq, const CorrelationFn& f,
                                    const OverlapFn& overlap, double rel_tol) {
  require_positive(omega0, total_time, "i_minus_numeric_phase");
  const double coarse = phase_integral_pass(phase, omega0, total_time, f, overlap, 1.0);
  const double fine = phase_integral_pass(phase, omega0, total_time, f, overlap, 1.5);
  IntegralValue out;
  out.value = 2.0 * sigma_sq * fine;
  out.error = 2.0 * sigma_sq * std::abs(fine - coarse);
  out.tolerance_met = out.error <= rel_tol * std::abs(out.value) + 1e-300;
  return out;
}

std::string to_string(IntegralMethod m) {
  switch (m) {
    case IntegralMethod::NumericDouble: return "numeric_double";
    case IntegralMethod::ExactWhiteNoise: return "exact_white_noise";
    case IntegralMethod::AsymptoticHigh: return "asymptotic_high";
    case IntegralMethod::AsymptoticLow: return "asymptotic_low";
  }
  return "unknown";
}

std::string to_string(CutoffRegime r) {
  switch (r) {
    case CutoffRegime::HighCutoff: return "high_cutoff";
    case CutoffRegime::LowCutoff: return "low_cutoff";
    case CutoffRegime::Intermediate: return "intermediate";
  }
  return "unknown";
}

CutoffRegime classify_cutoff(double omega0, double omega_min, double omega_max) {
  if (omega0 >= 2.0 * std::abs(omega_max)) return CutoffRegime::HighCutoff;
  if (omega_min > 0.0 && omega0 <= 0.5 * std::abs(omega_min)) return CutoffRegime::LowCutoff;
  return CutoffRegime::Intermediate;
}

AsymptoticEstimate i_minus_asymptotic(double omega_min, double omega_max, double omega0,
                                      double total_time, double sigma_sq, CutoffRegime regime) {
  AsymptoticEstimate out;
  const double wmax = std::abs(omega_max), wmin = std::abs(omega_min);
  const CutoffRegime actual = classify_cutoff(omega0, wmin, wmax);
  out.regime = actual;
  if (regime == CutoffRegime::HighCutoff) {
    out.separation = wmax > 0.0 ? omega0 / wmax : std::numeric_limits<double>::infinity();
    if (actual != CutoffRegime::HighCutoff) return out;
    out.value = sigma_sq / (omega0 * omega0) * (1.0 + wmax / omega0) * omega0 * total_time;
  } else if (regime == CutoffRegime::LowCutoff) {
    out.separation = wmin / omega0;
    if (actual != CutoffRegime::LowCutoff) return out;
    out.value = sigma_sq / (wmin * wmin) * (1.0 + omega0 / wmin);
  }
  return out;
}

double CouplingIntegrals::minus(std::size_t k, std::size_t l) const {
  if (auto it = i_minus.find({k, l}); it != i_minus.end()) return it->second;
  if (auto it = i_minus.find({l, k}); it != i_minus.end()) return it->second;
  if (k < 2 && l > 2) return minus(k, 2);
  if (l < 2 && k > 2) return minus(2, l);
  throw std::out_of_range("CouplingIntegrals: missing I- entry (" + std::to_string(k) + "," +
                          std::to_string(l) + ")");
}

std::complex<double> CouplingIntegrals::plus(std::size_t k, std::size_t l) const {
  if (auto it = i_plus.find({k, l}); it != i_plus.end()) return it->second;
  if (auto it = i_plus.find({l, k}); it != i_plus.end()) return std::conj(it->second);
  throw std::out_of_range("CouplingIntegrals: missing I+ entry (" + std::to_string(k) + "," +
                          std::to_string(l) + ")");
}

PerrPrediction perr_general(const SpectrumView& spectrum, const CouplingIntegrals& integrals,
                            double epsilon) {
  const std::size_t n = spectrum.size();
  const Eigen::VectorXcd& b = spectrum.ideal_amplitudes;
  double norm = 0.0;
  for (Eigen::Index k = 0; k < b.size(); ++k) norm += std::norm(b[k]);
  if (std::abs(norm - 1.0) > 1e-10) throw std::invalid_argument("perr_general: amplitudes not normalized");
  PerrPrediction out;
  const double e2 = epsilon * epsilon;
  for (std::size_t k = 0; k < n; ++k) {
    const double pk = std::norm(b[static_cast<Eigen::Index>(k)]);
    if (pk == 0.0) continue;
    for (std::size_t l = 0; l < n; ++l) {
      const double pl = std::norm(b[static_cast<Eigen::Index>(l)]);
      const double term = e2 * pk * (1.0 - pl) * integrals.minus(k, l);
      if (pl == 0.0) {
        out.breakdown.degenerate_coupling += term;
      } else {
        out.breakdown.intra_populated += term;
        if (k != l) {
          const std::complex<double> c =
              std::conj(b[static_cast<Eigen::Index>(k)]) * b[static_cast<Eigen::Index>(l)];
          out.breakdown.interference -= e2 * std::real(c * c * integrals.plus(k, l));
        }
      }
    }
  }
  out.mean_p_err = out.breakdown.degenerate_coupling + out.breakdown.intra_populated +
                   out.breakdown.interference;
  out.order_note = "second order in epsilon; O(epsilon^3) remainder not included";
  return out;
}

CouplingIntegrals analog_integrals(const ProblemInstance& inst, const NoiseModel& noise) {
  const SpectrumView sv = analog_spectrum(inst);
  if (inst.n_dim < 3) throw std::invalid_argument("analog_integrals: need N >= 3");
  const double t = analog_run_time(inst);
  const double s2 = noise.sigma_sq;
  CouplingIntegrals ci;
  ci.bound = s2 * t * t;
  const double w01 = sv.omega(0, 1), w02 = sv.omega(0, 2), w12 = sv.omega(1, 2);
  ci.regime = classify_cutoff(noise.omega0, std::abs(w12), std::abs(w02));
  const CorrelationFn f = correlation_of(noise);
  const bool exact = noise.shape == NoiseShape::WhiteSinc;
  ci.method = exact ? IntegralMethod::ExactWhiteNoise : IntegralMethod::NumericDouble;
  auto minus = [&](double w, double var) {
    return exact ? i_minus_exact_whitenoise(w, noise.omega0, t, var)
                 : i_minus_numeric(w, noise.omega0, t, var, f).value;
  };
  ci.i_minus[{0, 0}] = minus(0.0, 2.0 * s2);
  ci.i_minus[{1, 1}] = minus(0.0, 2.0 * s2);
  ci.i_minus[{0, 1}] = minus(w01, s2);
  ci.i_minus[{0, 2}] = minus(w02, s2);
  ci.i_minus[{1, 2}] = minus(w12, s2);
  ci.i_plus[{0, 1}] = i_plus_numeric(w01, noise.omega0, t, s2, f).value;
  return ci;
}

PerrPrediction perr_analog(const ProblemInstance& inst, const NoiseModel& noise) {
  return perr_analog(inst, noise, analog_integrals(inst, noise));
}

PerrPrediction perr_analog(const ProblemInstance& inst, const NoiseModel& noise,
                           const CouplingIntegrals& ci) {
  const SpectrumView sv = analog_spectrum(inst);
  const double b0 = sv.ideal_amplitudes[0].real();
  const double b1 = sv.ideal_amplitudes[1].real();
  const double p0 = b0 * b0, p1 = b1 * b1;
  const double e2 = noise.epsilon * noise.epsilon;
  const double nd = static_cast<double>(inst.n_dim) - 2.0;
  PerrPrediction out;
  out.breakdown.degenerate_coupling = e2 * nd * (p0 * ci.minus(0, 2) + p1 * ci.minus(1, 2));
  out.breakdown.intra_populated =
      e2 * (p0 * p1 * (ci.minus(0, 0) + ci.minus(1, 1)) + (p0 * p0 + p1 * p1) * ci.minus(0, 1));
  const double c = b0 * b1;
  out.breakdown.interference = -2.0 * e2 * std::real(c * c * ci.plus(0, 1));
  out.mean_p_err = out.breakdown.degenerate_coupling + out.breakdown.intra_populated +
                   out.breakdown.interference;
  out.order_note = "second order in epsilon; O(epsilon^3) remainder not included";
  if (ci.regime == CutoffRegime::Intermediate) {
    out.validity_note = "cut-off in the intermediate band";
  }
  return out;
}

AdiabaticIntegrals adiabatic_integrals(const ProblemInstance& inst, const Schedule& sched,
                                       const NoiseModel& noise, bool with_overlap) {
  AdiabaticIntegrals out;
  const double t = sched.total_time();
  out.total_time = t;
  out.omega0_t = noise.omega0 * t;
  const double gmin = adiabatic_min_gap(inst);
  const double e = inst.e_bar;
  const CorrelationFn f = correlation_of(noise);

  PhaseFunction p1;
  p1.phase = [&](double x) { return adiabatic_phase(inst, sched, 1, x); };
  p1.rate = [&](double x) { return adiabatic_omega(inst, sched, 1, x); };
  p1.rate_max = e;
  p1.rate_min = gmin;
  PhaseFunction pk;
  pk.phase = [&](double x) { return adiabatic_phase(inst, sched, 2, x); };
  pk.rate = [&](double x) { return adiabatic_omega(inst, sched, 2, x); };
  pk.rate_max = e;
  pk.rate_min = 0.5 * (e + gmin);

  out.first = i_minus_numeric_phase(p1, noise.omega0, t, noise.sigma_sq, f);
  out.degenerate = i_minus_numeric_phase(pk, noise.omega0, t, noise.sigma_sq, f);
  if (with_overlap) {
    auto angle = [&](double x) { return adiabatic_mixing_angle(inst, sched.s_of_t(x)); };
    OverlapFn o1 = [&](double a, double b) { return std::cos(2.0 * (angle(a) - angle(b))); };
    OverlapFn ok = [&](double a, double b) { return std::cos(angle(a) - angle(b)); };
    out.first_overlap_corrected = i_minus_numeric_phase(p1, noise.omega0, t, noise.sigma_sq, f, o1);
    out.degenerate_overlap_corrected =
        i_minus_numeric_phase(pk, noise.omega0, t, noise.sigma_sq, f, ok);
  }
  return out;
}

PerrPrediction perr_adiabatic(const ProblemInstance& inst, const NoiseModel& noise,
                              double p_bar_err) {
  const Schedule sched(inst);
  return perr_adiabatic(inst, noise, p_bar_err, adiabatic_integrals(inst, sched, noise, false));
}

PerrPrediction perr_adiabatic(const ProblemInstance& inst, const NoiseModel& noise,
                              double p_bar_err, const AdiabaticIntegrals& ai) {
  if (inst.variant != Variant::Adiabatic) throw std::invalid_argument("perr_adiabatic: variant mismatch");
  const double e2 = noise.epsilon * noise.epsilon;
  PerrPrediction out;
  out.breakdown.ideal = p_bar_err;
  out.breakdown.first_excited_coupling = e2 * ai.first.value;
  out.breakdown.degenerate_coupling =
      e2 * (static_cast<double>(inst.n_dim) - 2.0) * ai.degenerate.value;
  out.mean_p_err =
      out.breakdown.ideal + out.breakdown.first_excited_coupling + out.breakdown.degenerate_coupling;
  out.order_note = "O((delta + epsilon)^3) remainder not included";
  if (ai.omega0_t < 10.0) {
    out.validity_warning = true;
    out.validity_note = "omega0 T = " + std::to_string(ai.omega0_t) +
                        " < 10: unit-overlap approximation unjustified";
  }
  return out;
}

namespace {

Verdict at_least(double lhs, double rhs, std::string statement) {
  Verdict v;
  v.lhs = lhs;
  v.rhs = rhs;
  v.holds = lhs >= rhs;
  v.margin = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
  v.statement = std::move(statement);
  return v;
}

Verdict at_most(double lhs, double rhs, std::string statement) {
  Verdict v;
  v.lhs = lhs;
  v.rhs = rhs;
  v.holds = lhs <= rhs;
  v.margin = lhs > 0.0 ? rhs / lhs : std::numeric_limits<double>::infinity();
  v.statement = std::move(statement);
  return v;
}

}  // namespace

ConditionReport check_regimes(const ProblemInstance& inst, const NoiseModel& noise) {
  inst.validate();
  ConditionReport r;
  const double sqrt_n = std::sqrt(static_cast<double>(inst.n_dim));
  const double e = inst.e_bar;
  const double w0 = noise.omega0;
  const double eps = noise.epsilon;
  r.low_cutoff = at_most(w0, e / kRegimeFactor, "omega0 <= E/10");
  if (inst.variant == Variant::Analog) {
    r.high_cutoff = at_least(w0, kRegimeFactor * e * sqrt_n, "omega0 >= 10 E sqrt(N)");
  } else {
    const double d = inst.delta;
    r.high_cutoff = at_least(w0, kRegimeFactor * (eps * eps / (d * d * d)) * e * sqrt_n,
                             "omega0 >= 10 (eps^2/delta^3) E sqrt(N)");
    const bool eps_ok = eps < d;
    r.low_cutoff.holds = r.low_cutoff.holds && eps_ok;
    r.low_cutoff.statement += " and eps < delta";
    r.eps_below_delta_strict = at_most(eps, d / kRegimeFactor, "eps <= delta/10");
  }
  return r;
}

ConditionReport check_adiabatic_conditions(const ProblemInstance& inst, const NoiseModel& noise,
                                           const Schedule& sched,
                                           const AdiabaticIntegrals& integrals,
                                           std::size_t n_grid) {
  ConditionReport r = check_regimes(inst, noise);
  const AdiabaticConditionCheck a = check_adiabatic_condition(inst, sched, n_grid);
  const double d2 = inst.delta * inst.delta;
  r.ideal = at_most(a.lhs, d2, "4 sum sup A_k^2 <= delta^2");
  const double e2 = noise.epsilon * noise.epsilon;
  const double noise_sum = e2 * (integrals.first.value +
                                 (static_cast<double>(inst.n_dim) - 2.0) * integrals.degenerate.value);
  r.perturbed = at_most(a.lhs + noise_sum, d2, "sum (4 sup A_k^2 + eps^2 I_k0) <= delta^2");
  return r;
}

}  // namespace hamnoise
