#pragma once

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "hamnoise/model.hpp"
#include "hamnoise/noise_process.hpp"

namespace hamnoise {

/// Si(x) = int_0^x sin(u)/u du, absolute error below 1e-14.
double sine_integral(double x);

/// Normalized correlation shape f as a function of the lag tau.
using CorrelationFn = std::function<double(double tau)>;

/// sin(omega0 tau) / (omega0 tau).
CorrelationFn white_sinc(double omega0);
/// Correlation of the given model (continuous sinc for WhiteSinc).
CorrelationFn correlation_of(const NoiseModel& model);

struct IntegralValue {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  bool tolerance_met = true;
};

struct ComplexIntegralValue {
  std::complex<double> value;
  double error = 0.0;
  bool tolerance_met = true;
};

/// Closed form of
///   I^- = sigma^2 int_0^T int_0^T cos(omega (t1 - t2)) sinc(omega0 (t1 - t2)) dt1 dt2
/// in terms of Si.
double i_minus_exact_whitenoise(double omega, double omega0, double total_time, double sigma_sq);

/// Numeric I^- for a constant transition frequency. With u = t1 - t2 and
/// v = t1 + t2 the v integral is done in closed form, leaving
///   2 sigma^2 int_0^T (T - u) cos(omega u) f(u) du.
IntegralValue i_minus_numeric(double omega, double omega0, double total_time, double sigma_sq,
                              const CorrelationFn& f, double rel_tol = 1e-10);

/// Numeric I^+ = sigma^2 int int exp(i omega (t1 + t2)) f(t1 - t2). The v
/// integral is again closed-form:
///   2 sigma^2 e^{i omega T} int_0^T f(u) sin(omega (T - u)) / omega du.
ComplexIntegralValue i_plus_numeric(double omega, double omega0, double total_time,
                                    double sigma_sq, const CorrelationFn& f,
                                    double rel_tol = 1e-10);

/// Time-dependent phase: Phi(t) = int_0^t omega(t') dt' and its rate.
struct PhaseFunction {
  std::function<double(double)> phase;
  std::function<double(double)> rate;
  double rate_max = 0.0;  // sup |omega(t)| on [0, T]
  double rate_min = 0.0;  // inf |omega(t)| on [0, T]
};

/// Optional overlap factor multiplying the integrand at (t1, t2).
using OverlapFn = std::function<double(double t1, double t2)>;

/// I^- with the accumulated phase exp(i (Phi(t1) - Phi(t2))):
///   2 sigma^2 Re int_0^T du f(u) int_0^{T-u} dt e^{i (Phi(t+u) - Phi(t))} [overlap(t+u, t)].
/// Outer u panels resolve omega0 and omega; inner t panels resolve the
/// drift of Phi(t+u) - Phi(t). The error estimate comes from a rerun on
/// panels refined by 1.5.
IntegralValue i_minus_numeric_phase(const PhaseFunction& phase, double omega0, double total_time,
                                    double sigma_sq, const CorrelationFn& f,
                                    const OverlapFn& overlap = nullptr, double rel_tol = 1e-6);

enum class IntegralMethod { NumericDouble, ExactWhiteNoise, AsymptoticHigh, AsymptoticLow };
enum class CutoffRegime { HighCutoff, LowCutoff, Intermediate };

std::string to_string(IntegralMethod m);
std::string to_string(CutoffRegime r);

/// HighCutoff when omega0 >= 2 max|omega|, LowCutoff when omega0 <= min|omega| / 2.
CutoffRegime classify_cutoff(double omega0, double omega_min, double omega_max);

struct AsymptoticEstimate {
  std::optional<double> value;  // order-of-magnitude, O(1) constant set to 1
  CutoffRegime regime = CutoffRegime::Intermediate;
  double separation = 0.0;  // omega0 / max|omega| (high) or min|omega| / omega0 (low)
};

/// High: (sigma^2/omega0^2) (1 + omega_max/omega0) omega0 T.
/// Low: (sigma^2/omega_min^2) (1 + omega0/omega_min).
/// Returns no value when the requested regime does not apply.
AsymptoticEstimate i_minus_asymptotic(double omega_min, double omega_max, double omega0,
                                      double total_time, double sigma_sq, CutoffRegime regime);

struct CouplingIntegrals {
  std::map<std::pair<std::size_t, std::size_t>, double> i_minus;
  std::map<std::pair<std::size_t, std::size_t>, std::complex<double>> i_plus;
  IntegralMethod method = IntegralMethod::NumericDouble;
  CutoffRegime regime = CutoffRegime::Intermediate;
  double bound = 0.0;  // sigma^2 T^2 for off-diagonal pairs; diagonal entries use 2x

  double minus(std::size_t k, std::size_t l) const;
  std::complex<double> plus(std::size_t k, std::size_t l) const;
};

struct PerrBreakdown {
  double degenerate_coupling = 0.0;   // populated level -> unpopulated level
  double intra_populated = 0.0;       // both levels populated (incl. k = l)
  double interference = 0.0;          // the I^+ sum
  double ideal = 0.0;                 // adiabatic noiseless error
  double first_excited_coupling = 0.0;
};

struct PerrPrediction {
  double mean_p_err = 0.0;
  PerrBreakdown breakdown;
  std::string order_note;
  bool validity_warning = false;
  std::string validity_note;
};

/// eps^2 { sum_{k,l} |b_k|^2 (1 - |b_l|^2) I^-_kl - sum_{k != l} (b_k^* b_l)^2 I^+_kl }.
/// Integrals must cover every pair with b_k != 0. Pairs (k, l >= 2) fall
/// back to the (k, 2) entry when absent, since the degenerate level shares
/// one transition frequency.
PerrPrediction perr_general(const SpectrumView& spectrum, const CouplingIntegrals& integrals,
                            double epsilon);

/// All integrals needed by the analog formula: (0,0), (1,1), (0,1), (0,2),
/// (1,2) for I^- and (0,1) for I^+. Exact closed forms for WhiteSinc.
CouplingIntegrals analog_integrals(const ProblemInstance& inst, const NoiseModel& noise);

/// eps^2 { (N-2)[|b0|^2 I02 + |b1|^2 I12] + |b0|^2|b1|^2 (I00 + I11)
///         + (|b0|^4 + |b1|^4) I01 - 2 Re[(b0^* b1)^2 I01^+] }.
PerrPrediction perr_analog(const ProblemInstance& inst, const NoiseModel& noise);
PerrPrediction perr_analog(const ProblemInstance& inst, const NoiseModel& noise,
                           const CouplingIntegrals& integrals);

struct AdiabaticIntegrals {
  IntegralValue first;       // I_10 with the gap phase
  IntegralValue degenerate;  // I_k0, k >= 2
  IntegralValue first_overlap_corrected;
  IntegralValue degenerate_overlap_corrected;
  double total_time = 0.0;
  double omega0_t = 0.0;
};

/// Coupling integrals along the local schedule. The instantaneous-overlap
/// factor is set to 1; the overlap-corrected values use cos(2 dphi) for
/// k = 1 and cos(dphi) for k >= 2, with dphi the change of mixing angle.
AdiabaticIntegrals adiabatic_integrals(const ProblemInstance& inst, const Schedule& sched,
                                       const NoiseModel& noise, bool with_overlap = true);

/// p_bar + eps^2 [I_10 + (N - 2) I_k0].
PerrPrediction perr_adiabatic(const ProblemInstance& inst, const NoiseModel& noise,
                              double p_bar_err);
PerrPrediction perr_adiabatic(const ProblemInstance& inst, const NoiseModel& noise,
                              double p_bar_err, const AdiabaticIntegrals& integrals);

/// Much-greater/much-less thresholds used by every verdict below.
inline constexpr double kRegimeFactor = 10.0;

struct Verdict {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs / rhs for ">=" claims, rhs / lhs for "<=" claims
  std::string statement;
};

struct ConditionReport {
  std::optional<Verdict> ideal;      // 4 sum sup A^2 <= delta^2
  std::optional<Verdict> perturbed;  // sum (4 sup A^2 + eps^2 I_k0) <= delta^2
  Verdict high_cutoff;               // analog: w0 >= 10 E sqrt(N); adiabatic: w0 >= 10 (eps^2/delta^3) E sqrt(N)
  Verdict low_cutoff;                // w0 <= E / 10 (and eps < delta for adiabatic)
  std::optional<Verdict> eps_below_delta_strict;  // eps <= delta / 10
};

/// Regime verdicts only (no A_k or integrals needed).
ConditionReport check_regimes(const ProblemInstance& inst, const NoiseModel& noise);

/// Full adiabatic report including the ideal and perturbed conditions.
ConditionReport check_adiabatic_conditions(const ProblemInstance& inst, const NoiseModel& noise,
                                           const Schedule& sched,
                                           const AdiabaticIntegrals& integrals,
                                           std::size_t n_grid = 10000);

}  // namespace hamnoise
