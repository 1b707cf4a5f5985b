#include "hamnoise/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hamnoise/common.hpp"
#include "hamnoise/evolution.hpp"

#ifndef HAMNOISE_GIT_HASH
#define HAMNOISE_GIT_HASH "unknown"
#endif

namespace hamnoise::harness {

std::string git_hash() { return HAMNOISE_GIT_HASH; }

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HAMNOISE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::size_t first_index = n;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.n = values.size();
  if (a.n == 0) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std_err = std::sqrt(ss / static_cast<double>(a.n - 1) / static_cast<double>(a.n));
  }
  return a;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PerrPrediction predict_with(const ExperimentConfig& point, double p_bar, const Schedule* sched) {
  if (point.instance.variant == Variant::Analog) return perr_analog(point.instance, point.noise);
  if (sched) {
    return perr_adiabatic(point.instance, point.noise, p_bar,
                          adiabatic_integrals(point.instance, *sched, point.noise, false));
  }
  return perr_adiabatic(point.instance, point.noise, p_bar);
}

bool predictable(const ExperimentConfig& point) {
  return point.instance.variant == Variant::Adiabatic || point.instance.n_dim >= 3;
}

}  // namespace

SweepRow monte_carlo(const ExperimentConfig& point, std::size_t threads, const std::string& param,
                     double value) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepRow row;
  row.param = param;
  row.value = value;
  row.n_dim = point.instance.n_dim;
  row.epsilon = point.noise.epsilon;
  row.omega0 = point.noise.omega0;
  row.delta = point.instance.variant == Variant::Adiabatic ? point.instance.delta : 0.0;
  row.n_modes = point.noise.n_modes;
  row.n_trials = point.n_trials;

  const TrialRunner runner(point.instance, point.noise, point.propagator);
  row.total_time = runner.total_time();
  row.ideal_p_err = runner.ideal_p_err();
  std::vector<double> p(point.n_trials), alt(point.n_trials);
  parallel_for(point.n_trials, threads, [&](std::size_t i) {
    const TrialResult r = runner.run(i);
    p[i] = r.p_err;
    alt[i] = r.p_err_alt;
  });
  row.p_err = aggregate(p);
  row.p_err_alt = aggregate(alt);
  row.trial_p_err = std::move(p);

  if (predictable(point)) {
    try {
      row.prediction = predict_with(point, row.ideal_p_err, runner.schedule());
    } catch (const std::exception& e) {
      row.status = std::string("prediction failed: ") + e.what();
    }
  }
  const ConditionReport reg = check_regimes(point.instance, point.noise);
  row.regime_high = reg.high_cutoff.holds;
  row.regime_low = reg.low_cutoff.holds;
  row.wall_time = seconds_since(t0);
  return row;
}

std::vector<double> overlay_grid(const std::vector<double>& values, std::size_t points) {
  std::vector<double> grid(values.begin(), values.end());
  if (points >= 2 && !values.empty()) {
    const double lo = std::log(values.front()), hi = std::log(values.back());
    for (std::size_t i = 0; i < points; ++i) {
      grid.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1)));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

PerrPrediction predict_point(const ExperimentConfig& point) {
  double p_bar = 0.0;
  if (point.instance.variant == Variant::Adiabatic) {
    NoiseModel quiet = point.noise;
    quiet.epsilon = 0.0;
    p_bar = TrialRunner(point.instance, quiet, point.propagator).ideal_p_err();
  }
  return predict_with(point, p_bar, nullptr);
}

SweepResult sweep(const ExperimentConfig& cfg, std::size_t threads) {
  SweepResult out;
  if (!cfg.sweep) {
    out.rows.push_back(monte_carlo(at_point(cfg, std::nullopt), threads));
    return out;
  }
  const std::string param = to_string(cfg.sweep->param);
  for (double v : cfg.sweep->values) {
    try {
      out.rows.push_back(monte_carlo(at_point(cfg, v), threads, param, v));
    } catch (const std::exception& e) {
      SweepRow failed;
      failed.param = param;
      failed.value = v;
      failed.status = std::string("failed: ") + e.what();
      out.rows.push_back(failed);
    }
  }
  if (cfg.sweep->param == SweepParam::Omega0 && cfg.analytic_points >= 2) {
    const std::vector<double> grid = overlay_grid(cfg.sweep->values, cfg.analytic_points);
    std::vector<PerrPrediction> preds;
    std::vector<double> eps;
    std::vector<std::string> regimes;
    double p_bar = 0.0;
    bool have_p_bar = false;
    for (double w : grid) {
      const ExperimentConfig point = at_point(cfg, w);
      if (!predictable(point)) break;
      if (point.instance.variant == Variant::Adiabatic && !have_p_bar) {
        NoiseModel quiet = point.noise;
        quiet.epsilon = 0.0;
        p_bar = TrialRunner(point.instance, quiet, point.propagator).ideal_p_err();
        have_p_bar = true;
      }
      preds.push_back(predict_with(point, p_bar, nullptr));
      eps.push_back(point.noise.epsilon);
      const ConditionReport r = check_regimes(point.instance, point.noise);
      regimes.push_back(r.high_cutoff.holds ? "high" : (r.low_cutoff.holds ? "low" : "intermediate"));
    }
    std::vector<double> used(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(preds.size()));
    out.overlay = prediction_table(param, used, preds, eps, regimes);
  }
  return out;
}

namespace {

double or_nan(const std::optional<PerrPrediction>& p, double PerrBreakdown::*field) {
  return p ? p->breakdown.*field : std::nan("");
}

double ratio(double a, double b) { return b != 0.0 ? a / b : std::nan(""); }

}  // namespace

Table rows_table(const std::vector<SweepRow>& rows) {
  Table t;
  t.columns = {"param",          "value",           "n_dim",           "epsilon",
               "omega0",         "delta",           "total_time",      "n_modes",
               "n_trials",       "mean_p_err",      "std_err",         "mean_p_err_over_eps2",
               "mean_p_err_alt", "std_err_alt",     "ideal_p_err",     "pred_p_err",
               "pred_over_eps2", "pred_degenerate", "pred_intra",      "pred_interference",
               "pred_ideal",     "pred_first_excited", "regime_high",  "regime_low",
               "status"};
  for (const SweepRow& r : rows) {
    const double e2 = r.epsilon * r.epsilon;
    const double pred = r.prediction ? r.prediction->mean_p_err : std::nan("");
    t.add({r.param, r.value, static_cast<std::int64_t>(r.n_dim), r.epsilon, r.omega0, r.delta,
           r.total_time, static_cast<std::int64_t>(r.n_modes), static_cast<std::int64_t>(r.n_trials),
           r.p_err.mean, r.p_err.std_err, ratio(r.p_err.mean, e2), r.p_err_alt.mean,
           r.p_err_alt.std_err, r.ideal_p_err, pred, ratio(pred, e2),
           or_nan(r.prediction, &PerrBreakdown::degenerate_coupling),
           or_nan(r.prediction, &PerrBreakdown::intra_populated),
           or_nan(r.prediction, &PerrBreakdown::interference),
           or_nan(r.prediction, &PerrBreakdown::ideal),
           or_nan(r.prediction, &PerrBreakdown::first_excited_coupling),
           static_cast<std::int64_t>(r.regime_high), static_cast<std::int64_t>(r.regime_low),
           r.status});
  }
  return t;
}

Table prediction_table(const std::string& param, const std::vector<double>& values,
                       const std::vector<PerrPrediction>& preds, const std::vector<double>& eps,
                       const std::vector<std::string>& regimes) {
  Table t;
  t.columns = {param,         "epsilon",     "pred_p_err",   "pred_over_eps2",
               "degenerate",  "intra",       "interference", "ideal",
               "first_excited", "regime"};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& b = preds[i].breakdown;
    const double e2 = eps[i] * eps[i];
    t.add({values[i], eps[i], preds[i].mean_p_err, ratio(preds[i].mean_p_err, e2),
           b.degenerate_coupling, b.intra_populated, b.interference, b.ideal,
           b.first_excited_coupling, regimes[i]});
  }
  return t;
}

RegimeSheet regime_report(const ExperimentConfig& cfg, std::size_t threads) {
  const ExperimentConfig point = at_point(cfg, std::nullopt);
  RegimeSheet sheet;
  sheet.n_dim = point.instance.n_dim;
  if (point.instance.variant == Variant::Adiabatic) {
    const Schedule sched(point.instance);
    const AdiabaticIntegrals ai = adiabatic_integrals(point.instance, sched, point.noise, false);
    sheet.report = check_adiabatic_conditions(point.instance, point.noise, sched, ai);
  } else {
    sheet.report = check_regimes(point.instance, point.noise);
  }

  // Calibration at N = 16, omega0 = E (inside the intermediate band).
  ExperimentConfig cal = cfg;
  cal.instance = ProblemInstance::analog(16, cfg.instance.e_bar);
  cal.noise.omega0 = cfg.instance.e_bar;
  cal.noise.shape = NoiseShape::WhiteSinc;
  cal.lorentzian_rate.reset();
  cal.sweep.reset();
  if (!(cal.noise.epsilon > 0.0)) cal.noise.epsilon = 0.05;
  cal = at_point(cal, std::nullopt);
  const double e2 = cal.noise.epsilon * cal.noise.epsilon;
  double p = 0.0;
  if (cfg.calibration_trials > 0) {
    cal.n_trials = cfg.calibration_trials;
    p = monte_carlo(cal, threads).p_err.mean;
    sheet.calibration_source = "monte_carlo N=16 (" + std::to_string(cfg.calibration_trials) + " trials)";
  } else {
    p = perr_analog(cal.instance, cal.noise).mean_p_err;
    sheet.calibration_source = "analytic N=16";
  }
  sheet.calibration_k = p / (e2 * 4.0);
  sheet.calibration_c = std::sqrt(cfg.target_p_err / sheet.calibration_k);
  sheet.eps_star = sheet.calibration_c * std::pow(static_cast<double>(sheet.n_dim), -0.25);
  return sheet;
}

namespace {

void verdict_row(Table& t, const std::string& name, const Verdict& v) {
  t.add({name, v.lhs, v.rhs, v.margin, static_cast<std::int64_t>(v.holds), v.statement});
}

}  // namespace

Table regime_table(const RegimeSheet& s) {
  Table t;
  t.columns = {"condition", "lhs", "rhs", "margin", "holds", "statement"};
  verdict_row(t, "high_cutoff", s.report.high_cutoff);
  verdict_row(t, "low_cutoff", s.report.low_cutoff);
  if (s.report.eps_below_delta_strict) verdict_row(t, "eps_below_delta_strict", *s.report.eps_below_delta_strict);
  if (s.report.ideal) verdict_row(t, "adiabatic_ideal", *s.report.ideal);
  if (s.report.perturbed) verdict_row(t, "adiabatic_perturbed", *s.report.perturbed);
  t.add({std::string("eps_star"), s.eps_star, s.calibration_c, s.calibration_k,
         static_cast<std::int64_t>(s.n_dim), "eps*(N) = c N^-1/4; " + s.calibration_source});
  return t;
}

std::string regime_text(const RegimeSheet& s) {
  std::ostringstream os;
  os << "regime thresholds use a factor of " << s.regime_factor << " for >> and <<\n";
  auto line = [&](const std::string& name, const Verdict& v) {
    os << "  " << name << ": " << (v.holds ? "holds" : "fails") << "  (" << v.statement
       << "; lhs=" << format_double(v.lhs) << ", rhs=" << format_double(v.rhs)
       << ", margin=" << format_double(v.margin) << ")\n";
  };
  line("high cut-off", s.report.high_cutoff);
  line("low cut-off", s.report.low_cutoff);
  if (s.report.eps_below_delta_strict) line("eps << delta (strict)", *s.report.eps_below_delta_strict);
  if (s.report.ideal) line("ideal adiabatic condition", *s.report.ideal);
  if (s.report.perturbed) line("perturbed adiabatic condition", *s.report.perturbed);
  os << "  intermediate-band guidance: eps*(N=" << s.n_dim << ") = " << format_double(s.eps_star)
     << " (c=" << format_double(s.calibration_c) << ", " << s.calibration_source << ")\n";
  return os.str();
}

void write_metadata(const std::string& path, const ExperimentConfig& cfg, std::size_t threads,
                    const std::vector<SweepRow>& rows, const std::string& command,
                    double wall_time) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["git_hash"] = git_hash();
  j["master_seed"] = cfg.master_seed;
  j["threads"] = threads;
  j["regime_factor"] = kRegimeFactor;
  j["seed_scheme"] = "path seed = derive_seed(master, trial); element seed = derive_seed(path seed, element)";
  j["wall_time_s"] = wall_time;
  nlohmann::ordered_json c;
  for (const auto& [k, v] : describe(cfg)) c[k] = v;
  j["config"] = c;
  nlohmann::ordered_json r = nlohmann::ordered_json::array();
  for (const SweepRow& row : rows) {
    nlohmann::ordered_json o;
    o["param"] = row.param;
    o["value"] = row.value;
    o["n_modes"] = row.n_modes;
    o["status"] = row.status;
    o["wall_time_s"] = row.wall_time;
    if (row.prediction) {
      o["order_note"] = row.prediction->order_note;
      if (!row.prediction->validity_note.empty()) o["validity_note"] = row.prediction->validity_note;
    }
    r.push_back(o);
  }
  j["rows"] = r;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace hamnoise::harness
