// hamnoise command-line driver.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hamnoise/common.hpp"
#include "hamnoise/harness/config.hpp"
#include "hamnoise/harness/experiment.hpp"
#include "hamnoise/harness/table.hpp"
#include "hamnoise/model.hpp"
#include "hamnoise/noise_process.hpp"
#include "hamnoise/oscillatory.hpp"
#include "hamnoise/perturbative.hpp"

namespace hh = hamnoise::harness;
using namespace hamnoise;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::size_t threads = 0;
  std::string format;
  std::vector<std::string> overrides;
};

hh::ExperimentConfig load_config(const Globals& g) {
  hh::KeyValueConfig kv;
  if (!g.config.empty()) kv = hh::KeyValueConfig::load(g.config);
  for (const std::string& o : g.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
    kv.set(o.substr(0, eq), o.substr(eq + 1));
  }
  if (g.seed) kv.set("experiment.seed", std::to_string(*g.seed));
  if (!g.out_dir.empty()) kv.set("output.dir", g.out_dir);
  if (!g.format.empty()) kv.set("output.format", g.format);
  return hh::experiment_from(kv);
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string meta_path(const hh::ExperimentConfig& c, const std::string& stem) {
  std::filesystem::create_directories(c.out_dir);
  return (std::filesystem::path(c.out_dir) / (stem + ".meta.json")).string();
}

int cmd_noise_check(const Globals& g) {
  const auto t0 = std::chrono::steady_clock::now();
  const hh::ExperimentConfig c = hh::at_point(load_config(g), std::nullopt);
  NoiseModel m = c.noise;
  if (m.n_dim < 2) throw ConfigError("noise-check needs instance.n_dim >= 2");
  std::vector<double> taus;
  for (double x : c.check_omega_tau) taus.push_back(x / m.omega0);
  const auto ac = empirical_autocorrelation(m, c.check_paths, taus);
  hh::Table t;
  t.columns = {"tau", "omega0_tau", "r_hat", "std_err", "expected", "z_score"};
  for (const auto& p : ac) {
    t.add({p.tau, p.tau * m.omega0, p.r_hat, p.std_err, p.expected,
           p.std_err > 0 ? (p.r_hat - p.expected) / p.std_err : 0.0});
  }
  std::cout << t.save(c.out_dir, "autocorr", c.format) << '\n';

  const auto sc = eigenvalue_density_check(m, c.check_samples, c.check_bins);
  hh::Table s;
  s.columns = {"bin_center", "density", "semicircle"};
  for (std::size_t i = 0; i < sc.bin_centers.size(); ++i) {
    s.add({sc.bin_centers[i], sc.density[i], sc.semicircle[i]});
  }
  std::cout << s.save(c.out_dir, "semicircle", c.format) << '\n';
  std::cout << "semicircle: edge=" << hh::format_double(sc.edge)
            << " observed=[" << hh::format_double(sc.observed_min) << ", "
            << hh::format_double(sc.observed_max) << "] sup_dev/peak="
            << hh::format_double(sc.sup_deviation / sc.peak_density)
            << (sc.asymptotic_reliable ? "" : " (asymptotic law unreliable for N < 64)") << '\n';
  hh::write_metadata(meta_path(c, "noise_check"), c, 1, {}, "noise-check", elapsed(t0));
  return 0;
}

int cmd_spectrum(const Globals& g) {
  const hh::ExperimentConfig c = hh::at_point(load_config(g), std::nullopt);
  hh::Table t;
  if (c.instance.variant == Variant::Adiabatic) {
    const Schedule sched(c.instance);
    t.columns = {"s", "E0", "E1", "gap", "t", "E2"};
    const std::size_t n = std::max<std::size_t>(c.spectrum_points, 2);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = static_cast<double>(i) / static_cast<double>(n - 1);
      const double gap = adiabatic_gap(c.instance, s);
      const double e0 = 0.5 * (c.instance.e_bar - gap);
      t.add({s, e0, e0 + gap, gap, sched.t_of_s(s), c.instance.e_bar});
    }
  } else {
    const SpectrumView sv = analog_spectrum(c.instance);
    t.columns = {"k", "E", "b_k"};
    for (std::size_t k = 0; k < sv.size(); ++k) {
      t.add({static_cast<std::int64_t>(k), sv.eigenvalues[static_cast<Eigen::Index>(k)],
             sv.ideal_amplitudes[static_cast<Eigen::Index>(k)].real()});
    }
  }
  std::cout << t.save(c.out_dir, "spectrum", c.format) << '\n';
  return 0;
}

int cmd_run(const Globals& g) {
  const auto t0 = std::chrono::steady_clock::now();
  hh::ExperimentConfig c = load_config(g);
  c.sweep.reset();
  const std::size_t threads = hh::resolve_threads(g.threads);
  const hh::SweepRow row = hh::monte_carlo(hh::at_point(c, std::nullopt), threads);
  std::cout << hh::rows_table({row}).save(c.out_dir, "run", c.format) << '\n';
  hh::write_metadata(meta_path(c, "run"), c, threads, {row}, "run", elapsed(t0));
  return row.status == "ok" ? 0 : 3;
}

int cmd_sweep(const Globals& g) {
  const auto t0 = std::chrono::steady_clock::now();
  const hh::ExperimentConfig c = load_config(g);
  const std::size_t threads = hh::resolve_threads(g.threads);
  const hh::SweepResult r = hh::sweep(c, threads);
  std::cout << hh::rows_table(r.rows).save(c.out_dir, "sweep", c.format) << '\n';
  if (!r.overlay.rows.empty()) std::cout << r.overlay.save(c.out_dir, "sweep_analytic", c.format) << '\n';
  hh::write_metadata(meta_path(c, "sweep"), c, threads, r.rows, "sweep", elapsed(t0));
  for (const auto& row : r.rows) {
    if (row.status.rfind("failed", 0) == 0) std::cerr << "row " << row.value << ": " << row.status << '\n';
  }
  return 0;
}

int cmd_predict(const Globals& g) {
  const hh::ExperimentConfig c = load_config(g);
  std::vector<double> values;
  std::string param = "none";
  if (c.sweep) {
    param = hh::to_string(c.sweep->param);
    values = c.sweep->param == hh::SweepParam::Omega0 ? hh::overlay_grid(c.sweep->values, c.analytic_points)
                                                      : c.sweep->values;
  }
  std::vector<std::optional<double>> points;
  if (values.empty()) {
    points.push_back(std::nullopt);
    values.push_back(0.0);
  } else {
    for (double v : values) points.emplace_back(v);
  }
  std::vector<PerrPrediction> preds;
  std::vector<double> eps;
  std::vector<std::string> regimes;
  for (const auto& v : points) {
    const hh::ExperimentConfig p = hh::at_point(c, v);
    preds.push_back(hh::predict_point(p));
    eps.push_back(p.noise.epsilon);
    const ConditionReport r = check_regimes(p.instance, p.noise);
    regimes.push_back(r.high_cutoff.holds ? "high" : (r.low_cutoff.holds ? "low" : "intermediate"));
  }
  const hh::Table t = hh::prediction_table(param, values, preds, eps, regimes);
  std::cout << t.save(c.out_dir, "predict", c.format) << '\n';
  return 0;
}

int cmd_regimes(const Globals& g) {
  const hh::ExperimentConfig c = load_config(g);
  const hh::RegimeSheet sheet = hh::regime_report(c, hh::resolve_threads(g.threads));
  std::cout << hh::regime_text(sheet);
  std::cout << hh::regime_table(sheet).save(c.out_dir, "regimes", c.format) << '\n';
  return 0;
}

int cmd_lemma_demo(const Globals& g) {
  const hh::ExperimentConfig c = load_config(g);
  hh::Table t;
  t.columns = {"case", "omega", "n_terms", "series_re", "series_im", "oracle_re", "oracle_im",
               "abs_error", "truncation_bound", "converged"};
  // Fixed frequency: F = 1 / (1 + x) on [0, 1].
  const DerivativeFn f = [](int n, double x) {
    double v = (n % 2 ? -1.0 : 1.0) / std::pow(1.0 + x, n + 1);
    for (int k = 2; k <= n; ++k) v *= k;
    return std::complex<double>(v, 0.0);
  };
  for (double w : {25.0, 50.0, 100.0, 200.0}) {
    const auto oracle = quadrature_oracle([&](double x) { return f(0, x); }, 0.0, 1.0,
                                          [w](double x) { return w * x; }, 1e-12);
    for (int n = 1; n <= 4; ++n) {
      const IbpSeriesResult r = ibp_series_fixed(f, 0.0, 1.0, w, n);
      t.add({std::string("fixed_1/(1+x)"), w, static_cast<std::int64_t>(n), r.value.real(),
             r.value.imag(), oracle.value.real(), oracle.value.imag(), std::abs(r.value - oracle.value),
             r.truncation_bound, static_cast<std::int64_t>(r.truncation_bound <= 1e-12)});
    }
  }
  // Varying frequency: first-order adiabatic amplitude in the s variable.
  const ProblemInstance inst = c.instance.variant == Variant::Adiabatic ? c.instance
                                                                        : ProblemInstance::adiabatic(32, 0.1);
  const AmplitudeIntegrand amp = adiabatic_amplitude_integrand(inst);
  const auto& fs = amp.f;
  const auto& omega = amp.omega;
  const auto& omega_p = amp.omega_prime;
  const auto& phase = amp.phase;
  const auto oracle = quadrature_oracle([&](double s) { return fs(0, s); }, 0.0, 1.0, phase, 1e-12, omega);
  for (int nmax = 1; nmax <= 4; ++nmax) {
    const IbpSeriesResult rv = ibp_series_varfreq(fs, 0.0, 1.0, omega, omega_p, phase, nmax, 1e-300);
    t.add({std::string("varfreq_adiabatic"), omega(0.5), static_cast<std::int64_t>(rv.n_terms),
           rv.value.real(), rv.value.imag(), oracle.value.real(), oracle.value.imag(),
           std::abs(rv.value - oracle.value), rv.truncation_bound + rv.quadrature_error,
           static_cast<std::int64_t>(rv.converged)});
  }
  std::cout << t.save(c.out_dir, "lemma_demo", c.format) << '\n';
  return 0;
}

void write_diagnostics(const Globals& g, const std::string& what) {
  try {
    const std::string dir = g.out_dir.empty() ? "." : g.out_dir;
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / "diagnostics.txt");
    out << "numeric failure: " << what << '\n';
  } catch (...) {
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-robustness simulator for analog and adiabatic quantum search"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Flat key-value config file");
  app.add_option("--seed", g.seed, "Master seed (overrides experiment.seed)");
  app.add_option("--out-dir", g.out_dir, "Output directory (overrides output.dir)");
  app.add_option("--threads", g.threads, "Worker threads (fallback: HAMNOISE_THREADS)");
  app.add_option("--format", g.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--set", g.overrides, "Config override key=value (repeatable)");

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Globals&);
  };
  const Sub subs[] = {
      {"noise-check", "Autocorrelation and semicircle checks", cmd_noise_check},
      {"spectrum", "Spectrum / schedule table", cmd_spectrum},
      {"run", "Single Monte-Carlo row", cmd_run},
      {"sweep", "Monte-Carlo sweep with analytic overlay", cmd_sweep},
      {"predict", "Perturbative predictions only", cmd_predict},
      {"regimes", "Regime verdict sheet", cmd_regimes},
      {"lemma-demo", "Integration-by-parts series demo", cmd_lemma_demo},
  };
  int (*chosen)(const Globals&) = nullptr;
  for (const Sub& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    sc->callback([&chosen, fn = s.fn] { chosen = fn; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return chosen(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    write_diagnostics(g, e.what());
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    write_diagnostics(g, e.what());
    return 3;
  }
}
