#include "hamnoise/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "hamnoise/common.hpp"

namespace hamnoise::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "instance.variant",     "instance.n_dim",         "instance.e_bar",
      "instance.marked",      "instance.delta",         "noise.epsilon",
      "noise.omega0",         "noise.shape",            "noise.n_modes",
      "noise.sigma_sq",       "noise.psd",              "noise.psd_file",
      "noise.lorentzian_rate", "experiment.n_trials",   "experiment.seed",
      "sweep.param",          "sweep.values",           "sweep.analytic_points",
      "propagator.method",    "propagator.dt_max",      "propagator.tol",
      "propagator.renormalize", "output.dir",           "output.format",
      "regimes.target_p_err", "regimes.calibration_trials", "noise_check.paths",
      "noise_check.samples",  "noise_check.bins",       "noise_check.omega_tau",
      "spectrum.points"};
  return keys;
}

KeyValueConfig KeyValueConfig::parse(std::istream& is, const std::string& source) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos) throw ConfigError(where + ": key must be section.key");
    if (cfg.has(key)) throw ConfigError(where + ": duplicate key " + key);
    cfg.set(key, value);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse(in, path);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw ConfigError("unknown config key " + key);
  }
  values_[key] = value;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string l = lower(v);
  if (l == "true" || l == "1" || l == "yes") return true;
  if (l == "false" || l == "0" || l == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

PsdTable parse_psd_pairs(const std::string& key, const std::string& text) {
  PsdTable t;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(key + ": expected omega:density pairs");
    t.omega.push_back(to_double(key, trim(item.substr(0, colon))));
    t.density.push_back(to_double(key, trim(item.substr(colon + 1))));
  }
  t.note = "custom PSD table from config";
  return t;
}

PsdTable load_psd_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open PSD file " + path);
  PsdTable t;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double w = 0.0, d = 0.0;
    if (!(ls >> w >> d)) throw ConfigError(path + ": expected two columns");
    t.omega.push_back(w);
    t.density.push_back(d);
  }
  t.note = "custom PSD table from " + path;
  return t;
}

}  // namespace

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Omega0: return "omega0";
    case SweepParam::NDim: return "n_dim";
    case SweepParam::Epsilon: return "epsilon";
    case SweepParam::Delta: return "delta";
  }
  return "unknown";
}

ExperimentConfig experiment_from(const KeyValueConfig& kv) {
  ExperimentConfig c;
  auto str = [&](const std::string& k, const std::string& def) { return kv.get(k).value_or(def); };
  auto num = [&](const std::string& k, double def) {
    const auto v = kv.get(k);
    return v ? to_double(k, *v) : def;
  };
  auto uint = [&](const std::string& k, std::uint64_t def) {
    const auto v = kv.get(k);
    return v ? to_uint(k, *v) : def;
  };

  const std::string variant = lower(str("instance.variant", "analog"));
  if (variant == "analog") {
    c.instance.variant = Variant::Analog;
  } else if (variant == "adiabatic") {
    c.instance.variant = Variant::Adiabatic;
  } else {
    throw ConfigError("instance.variant: expected analog or adiabatic, got '" + variant + "'");
  }
  c.instance.n_dim = uint("instance.n_dim", 16);
  c.instance.e_bar = num("instance.e_bar", 1.0);
  c.instance.marked = uint("instance.marked", 0);
  c.instance.delta = num("instance.delta", 0.1);

  c.noise.epsilon = num("noise.epsilon", 0.05);
  c.noise.omega0 = num("noise.omega0", 1.0);
  const std::string shape = lower(str("noise.shape", "white_sinc"));
  if (shape == "white_sinc") {
    c.noise.shape = NoiseShape::WhiteSinc;
  } else if (shape == "custom") {
    c.noise.shape = NoiseShape::Custom;
    if (const auto inline_psd = kv.get("noise.psd")) {
      c.noise.psd = parse_psd_pairs("noise.psd", *inline_psd);
    } else if (const auto file = kv.get("noise.psd_file")) {
      c.noise.psd = load_psd_file(*file);
    } else {
      throw ConfigError("noise.shape = custom needs noise.psd or noise.psd_file");
    }
  } else if (shape == "lorentzian") {
    c.noise.shape = NoiseShape::Custom;
    c.lorentzian_rate = num("noise.lorentzian_rate", c.noise.omega0);
  } else {
    throw ConfigError("noise.shape: expected white_sinc, custom or lorentzian");
  }
  const std::string modes = lower(str("noise.n_modes", "64"));
  if (modes == "auto") {
    c.auto_modes = true;
  } else {
    c.noise.n_modes = to_uint("noise.n_modes", modes);
  }
  const std::string sigma = lower(str("noise.sigma_sq", "snr"));
  if (sigma == "snr") {
    c.sigma_from_snr = true;
  } else {
    c.sigma_from_snr = false;
    c.noise.sigma_sq = to_double("noise.sigma_sq", sigma);
  }

  c.n_trials = uint("experiment.n_trials", 100);
  c.master_seed = uint("experiment.seed", 12345);

  if (const auto p = kv.get("sweep.param")) {
    SweepAxis axis;
    const std::string name = lower(*p);
    if (name == "omega0") {
      axis.param = SweepParam::Omega0;
    } else if (name == "n_dim") {
      axis.param = SweepParam::NDim;
    } else if (name == "epsilon") {
      axis.param = SweepParam::Epsilon;
    } else if (name == "delta") {
      axis.param = SweepParam::Delta;
    } else {
      throw ConfigError("sweep.param: expected omega0, n_dim, epsilon or delta");
    }
    const auto vals = kv.get("sweep.values");
    if (!vals) throw ConfigError("sweep.param given without sweep.values");
    axis.values = to_list("sweep.values", *vals);
    std::sort(axis.values.begin(), axis.values.end());
    c.sweep = axis;
  } else if (kv.has("sweep.values")) {
    throw ConfigError("sweep.values given without sweep.param");
  }
  c.analytic_points = uint("sweep.analytic_points", 200);

  const std::string method = lower(str("propagator.method", "magnus"));
  if (method == "magnus" || method == "magnus_midpoint") {
    c.propagator.method = Method::MagnusMidpoint;
  } else if (method == "rk4") {
    c.propagator.method = Method::RK4;
  } else {
    throw ConfigError("propagator.method: expected magnus or rk4");
  }
  c.propagator.dt_max = num("propagator.dt_max", 0.05);
  c.propagator.tol = num("propagator.tol", 1e-8);
  if (const auto r = kv.get("propagator.renormalize")) {
    c.propagator.renormalize = to_bool("propagator.renormalize", *r);
  }

  c.out_dir = str("output.dir", ".");
  c.format = lower(str("output.format", "csv"));
  c.target_p_err = num("regimes.target_p_err", 0.1);
  c.calibration_trials = uint("regimes.calibration_trials", 0);
  c.check_paths = uint("noise_check.paths", 10000);
  c.check_samples = uint("noise_check.samples", 20);
  c.check_bins = uint("noise_check.bins", 40);
  if (const auto taus = kv.get("noise_check.omega_tau")) {
    c.check_omega_tau = to_list("noise_check.omega_tau", *taus);
  } else {
    c.check_omega_tau = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, std::acos(-1.0), 4.0, 5.0, 6.0, 8.0, 10.0};
  }
  c.spectrum_points = uint("spectrum.points", 201);
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (n_trials < 1) throw ConfigError("experiment.n_trials must be >= 1");
  if (format != "csv" && format != "json") throw ConfigError("output.format: expected csv or json");
  if (sweep) {
    for (double v : sweep->values) {
      const bool ok = sweep->param == SweepParam::Epsilon ? v >= 0.0 : v > 0.0;
      if (!ok) throw ConfigError("sweep.values must be positive for " + to_string(sweep->param));
      if (sweep->param == SweepParam::NDim && v != std::floor(v)) {
        throw ConfigError("sweep.values for n_dim must be integers");
      }
    }
  }
  try {
    instance.validate();
    propagator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

double run_time(const ProblemInstance& inst) {
  if (inst.variant == Variant::Analog) return analog_run_time(inst);
  return Schedule(inst).total_time();
}

ExperimentConfig at_point(const ExperimentConfig& cfg, std::optional<double> sweep_value) {
  ExperimentConfig p = cfg;
  if (sweep_value && cfg.sweep) {
    const double v = *sweep_value;
    switch (cfg.sweep->param) {
      case SweepParam::Omega0: p.noise.omega0 = v; break;
      case SweepParam::NDim: p.instance.n_dim = static_cast<std::size_t>(v); break;
      case SweepParam::Epsilon: p.noise.epsilon = v; break;
      case SweepParam::Delta: p.instance.delta = v; break;
    }
  }
  p.noise.n_dim = p.instance.n_dim;
  p.noise.seed = p.master_seed;
  if (p.sigma_from_snr) {
    p.noise.sigma_sq = p.instance.e_bar * p.instance.e_bar / (4.0 * static_cast<double>(p.instance.n_dim));
  }
  if (p.lorentzian_rate) p.noise.psd = lorentzian_psd(*p.lorentzian_rate, p.noise.omega0);
  try {
    p.instance.validate();
    if (p.auto_modes) p.noise.n_modes = auto_mode_count(p.noise.omega0, run_time(p.instance));
    p.noise.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

std::map<std::string, std::string> describe(const ExperimentConfig& c) {
  std::map<std::string, std::string> m;
  auto d = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  m["instance.variant"] = c.instance.variant == Variant::Analog ? "analog" : "adiabatic";
  m["instance.n_dim"] = std::to_string(c.instance.n_dim);
  m["instance.e_bar"] = d(c.instance.e_bar);
  m["instance.marked"] = std::to_string(c.instance.marked);
  m["instance.delta"] = d(c.instance.delta);
  m["noise.epsilon"] = d(c.noise.epsilon);
  m["noise.omega0"] = d(c.noise.omega0);
  m["noise.shape"] = c.noise.shape == NoiseShape::WhiteSinc ? "white_sinc" : "custom";
  m["noise.n_modes"] = c.auto_modes ? "auto" : std::to_string(c.noise.n_modes);
  m["noise.sigma_sq"] = c.sigma_from_snr ? "snr" : d(c.noise.sigma_sq);
  if (!c.noise.psd.note.empty()) m["noise.psd_note"] = c.noise.psd.note;
  m["experiment.n_trials"] = std::to_string(c.n_trials);
  m["experiment.seed"] = std::to_string(c.master_seed);
  if (c.sweep) {
    m["sweep.param"] = to_string(c.sweep->param);
    std::string vals;
    for (double v : c.sweep->values) vals += (vals.empty() ? "" : ",") + d(v);
    m["sweep.values"] = vals;
  }
  m["propagator.method"] = c.propagator.method == Method::MagnusMidpoint ? "magnus" : "rk4";
  m["propagator.dt_max"] = d(c.propagator.dt_max);
  m["propagator.tol"] = d(c.propagator.tol);
  m["propagator.renormalize"] = c.propagator.renormalize ? "true" : "false";
  return m;
}

}  // namespace hamnoise::harness
