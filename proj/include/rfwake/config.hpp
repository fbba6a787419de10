#pragma once

// Experiment configuration: one flat key/value document with sections
// mirroring the module names. The built-in defaults are the stock
// simulation scenario.

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfwake/controller.hpp"
#include "rfwake/gpr.hpp"
#include "rfwake/rbe.hpp"
#include "rfwake/selftrain.hpp"
#include "rfwake/sim_core.hpp"
#include "rfwake/util.hpp"
#include "rfwake/world.hpp"

namespace rfwake {

enum class Policy { kAlways, kRnd, kGt, kS2gpr };

inline std::string policy_name(Policy p) {
  switch (p) {
    case Policy::kAlways: return "always";
    case Policy::kRnd: return "rnd";
    case Policy::kGt: return "gt";
    case Policy::kS2gpr: return "s2gpr";
  }
  throw std::logic_error("policy_name: bad enum");
}

inline Policy policy_from_name(const std::string& name) {
  if (name == "always") return Policy::kAlways;
  if (name == "rnd") return Policy::kRnd;
  if (name == "gt") return Policy::kGt;
  if (name == "s2gpr") return Policy::kS2gpr;
  throw std::invalid_argument("unknown policy: " + name);
}

struct ExperimentConfig {
  // [time]
  double t_rf = 0.1;
  int nu = 10;
  int n_train = 900;
  int n_test = 500;

  // [energy]
  EnergyModelParams energy;  // defaults already match the reference table

  // [world]
  ProcessModelParams process;
  PathLossParams path_loss;
  PodCurve pod;  // logistic(5, 3.5) by default

  // [selftrain]
  // Floor on the per-label noise variance handed to the GP. The CLT value
  // p(1-p)/nu vanishes at saturated labels, but observed labels still scatter
  // because the RSSI input itself is noisy; (1/nu)^2 (the label grid
  // resolution) keeps the regression honest about that.
  double variance_floor = 0.01;

  // [gpr]
  double gpr_smoothness = 2.5;
  double gpr_init_lengthscale = 5.0;
  double gpr_init_signal_var = 1.0;
  GprFitConfig gpr_fit;

  // [rbe]
  int n_particles = 100;
  double guessed_noise_std = 0.1;
  double sigma_rf_guess = 3.0;
  double ess_threshold = 0.5;
  std::string filter_model = "random_walk_rssi";  // or mapped_distance_walk
  double init_rssi_min = -70.0;
  double init_rssi_max = -10.0;

  // [controller]
  double alpha = 1.0;
  int gt_rollouts = 100;

  // [campaign]
  int n_tests = 50;
  std::uint64_t master_seed = 1;
  std::vector<Policy> policies = {Policy::kAlways, Policy::kRnd, Policy::kGt,
                                  Policy::kS2gpr};
  std::string out_dir = "out";
  int threads = 0;  // 0 = hardware concurrency

  TimeBase time_base() const { return TimeBase::from_rf_period(t_rf, nu, n_test); }

  KernelParams gpr_init_kernel() const {
    return KernelParams{gpr_smoothness, gpr_init_lengthscale, gpr_init_signal_var};
  }

  FilterProcessParams filter_params() const {
    FilterProcessParams f;
    f.model = filter_model == "mapped_distance_walk"
                  ? FilterProcessParams::Model::kMappedDistanceWalk
                  : FilterProcessParams::Model::kRandomWalkRssi;
    f.guessed_noise_std = guessed_noise_std;
    f.path_loss = path_loss;
    f.process = process;
    return f;
  }

  ControllerParams controller_params() const {
    return ControllerParams::make(alpha, time_base(), energy);
  }

  void validate() const {
    time_base();  // throws on bad values
    energy.validate();
    process.validate();
    path_loss.validate();
    pod.validate();
    if (n_train < 1) throw std::invalid_argument("config: n_train must be >= 1");
    if (!(variance_floor > 0)) throw std::invalid_argument("config: variance_floor must be > 0");
    gpr_init_kernel().validate();
    if (!(gpr_fit.lengthscale_min > 0) ||
        !(gpr_fit.lengthscale_max > gpr_fit.lengthscale_min) ||
        !(gpr_fit.signal_var_min > 0) ||
        !(gpr_fit.signal_var_max > gpr_fit.signal_var_min))
      throw std::invalid_argument("config: bad gpr search box");
    if (gpr_fit.restarts < 0 || gpr_fit.max_evals_per_start < 3)
      throw std::invalid_argument("config: bad gpr fit budget");
    if (n_particles < 1) throw std::invalid_argument("config: n_particles must be >= 1");
    filter_params().validate();
    if (!(sigma_rf_guess > 0)) throw std::invalid_argument("config: sigma_rf_guess must be > 0");
    if (ess_threshold < 0 || ess_threshold > 1)
      throw std::invalid_argument("config: ess_threshold must lie in [0,1]");
    if (filter_model != "random_walk_rssi" && filter_model != "mapped_distance_walk")
      throw std::invalid_argument("config: unknown filter_model " + filter_model);
    if (!(init_rssi_min < init_rssi_max))
      throw std::invalid_argument("config: bad init RSSI range");
    if (alpha < 0) throw std::invalid_argument("config: alpha must be >= 0");
    if (gt_rollouts < 1) throw std::invalid_argument("config: gt_rollouts must be >= 1");
    if (n_tests < 1) throw std::invalid_argument("config: n_tests must be >= 1");
    if (policies.empty()) throw std::invalid_argument("config: empty policy list");
  }
};

namespace config_detail {

using KvMap = std::map<std::string, std::string>;  // "section.key" -> value

inline KvMap parse_ini(const std::string& text) {
  KvMap kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    kv[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

inline std::vector<std::pair<double, double>> parse_knots(const std::string& s) {
  std::vector<std::pair<double, double>> knots;
  for (const auto& item : split(s, ';')) {
    auto parts = split(trim(item), ':');
    if (parts.size() != 2)
      throw std::runtime_error("config: pod knot must be d:p, got " + item);
    knots.emplace_back(std::stod(parts[0]), std::stod(parts[1]));
  }
  return knots;
}

inline std::string knots_to_string(const std::vector<std::pair<double, double>>& knots) {
  std::string s;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (i) s += ';';
    s += fmt_double(knots[i].first) + ":" + fmt_double(knots[i].second);
  }
  return s;
}

struct Reader {
  KvMap kv;
  double num(const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    seen.insert(key);
    return std::stod(it->second);
  }
  long integer(const std::string& key, long fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    seen.insert(key);
    return std::stol(it->second);
  }
  std::string str(const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    seen.insert(key);
    return it->second;
  }
  void finish() const {
    for (const auto& [key, value] : kv)
      if (!seen.count(key))
        throw std::runtime_error("config: unknown key " + key);
  }
  std::set<std::string> seen;
};

}  // namespace config_detail

inline ExperimentConfig config_from_ini(const std::string& text) {
  config_detail::Reader r{config_detail::parse_ini(text), {}};
  ExperimentConfig c;

  c.t_rf = r.num("time.t_rf", c.t_rf);
  c.nu = static_cast<int>(r.integer("time.nu", c.nu));
  c.n_train = static_cast<int>(r.integer("time.n_train", c.n_train));
  c.n_test = static_cast<int>(r.integer("time.n_test", c.n_test));

  c.energy.p_active = r.num("energy.p_active", c.energy.p_active);
  c.energy.p_detector = r.num("energy.p_detector", c.energy.p_detector);
  c.energy.p_sleep = r.num("energy.p_sleep", c.energy.p_sleep);
  c.energy.p_trans = r.num("energy.p_trans", c.energy.p_trans);
  c.energy.t_trans = r.num("energy.t_trans", c.energy.t_trans);
  c.energy.p_rx = r.num("energy.p_rx", c.energy.p_rx);

  c.process.noise_std = r.num("world.process_noise_std", c.process.noise_std);
  c.process.d0_min = r.num("world.d0_min", c.process.d0_min);
  c.process.d0_max = r.num("world.d0_max", c.process.d0_max);
  c.process.d_min = r.num("world.d_min", c.process.d_min);
  c.path_loss.kappa = r.num("world.kappa", c.path_loss.kappa);
  c.path_loss.exponent = r.num("world.exponent", c.path_loss.exponent);
  c.path_loss.ref_dist = r.num("world.ref_dist", c.path_loss.ref_dist);
  c.path_loss.sigma_rf = r.num("world.sigma_rf", c.path_loss.sigma_rf);
  const std::string pod_kind = r.str("world.pod", "logistic");
  if (pod_kind == "logistic") {
    c.pod = PodCurve::logistic(r.num("world.pod_slope", 5.0),
                               r.num("world.pod_midpoint", 3.5));
  } else if (pod_kind == "tabulated") {
    c.pod = PodCurve::tabulated(
        config_detail::parse_knots(r.str("world.pod_knots", "")));
  } else {
    throw std::runtime_error("config: world.pod must be logistic or tabulated");
  }

  c.variance_floor = r.num("selftrain.variance_floor", c.variance_floor);

  c.gpr_smoothness = r.num("gpr.smoothness", c.gpr_smoothness);
  c.gpr_init_lengthscale = r.num("gpr.init_lengthscale", c.gpr_init_lengthscale);
  c.gpr_init_signal_var = r.num("gpr.init_signal_var", c.gpr_init_signal_var);
  c.gpr_fit.restarts = static_cast<int>(r.integer("gpr.restarts", c.gpr_fit.restarts));
  c.gpr_fit.max_evals_per_start =
      static_cast<int>(r.integer("gpr.max_evals_per_start", c.gpr_fit.max_evals_per_start));
  c.gpr_fit.lengthscale_min = r.num("gpr.lengthscale_min", c.gpr_fit.lengthscale_min);
  c.gpr_fit.lengthscale_max = r.num("gpr.lengthscale_max", c.gpr_fit.lengthscale_max);
  c.gpr_fit.signal_var_min = r.num("gpr.signal_var_min", c.gpr_fit.signal_var_min);
  c.gpr_fit.signal_var_max = r.num("gpr.signal_var_max", c.gpr_fit.signal_var_max);

  c.n_particles = static_cast<int>(r.integer("rbe.n_particles", c.n_particles));
  c.guessed_noise_std = r.num("rbe.guessed_noise_std", c.guessed_noise_std);
  c.sigma_rf_guess = r.num("rbe.sigma_rf_guess", c.sigma_rf_guess);
  c.ess_threshold = r.num("rbe.ess_threshold", c.ess_threshold);
  c.filter_model = r.str("rbe.filter_model", c.filter_model);
  c.init_rssi_min = r.num("rbe.init_rssi_min", c.init_rssi_min);
  c.init_rssi_max = r.num("rbe.init_rssi_max", c.init_rssi_max);

  c.alpha = r.num("controller.alpha", c.alpha);
  c.gt_rollouts = static_cast<int>(r.integer("controller.gt_rollouts", c.gt_rollouts));

  c.n_tests = static_cast<int>(r.integer("campaign.n_tests", c.n_tests));
  c.master_seed = static_cast<std::uint64_t>(r.integer("campaign.master_seed",
                                                       static_cast<long>(c.master_seed)));
  const std::string pol = r.str("campaign.policies", "always,rnd,gt,s2gpr");
  c.policies.clear();
  for (const auto& name : split(pol, ','))
    if (!trim(name).empty()) c.policies.push_back(policy_from_name(trim(name)));
  c.out_dir = r.str("campaign.out_dir", c.out_dir);
  c.threads = static_cast<int>(r.integer("campaign.threads", c.threads));

  r.finish();
  c.validate();
  return c;
}

inline ExperimentConfig config_from_file(const std::string& path) {
  return config_from_ini(read_file(path));
}

// Canonical serialization: every key in a fixed order. Feeding this back
// through config_from_ini reproduces the config; its hash fingerprints it.
inline std::string config_to_ini(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[time]\n";
  o << "t_rf = " << fmt_double(c.t_rf) << "\n";
  o << "nu = " << c.nu << "\n";
  o << "n_train = " << c.n_train << "\n";
  o << "n_test = " << c.n_test << "\n";
  o << "\n[energy]\n";
  o << "p_active = " << fmt_double(c.energy.p_active) << "\n";
  o << "p_detector = " << fmt_double(c.energy.p_detector) << "\n";
  o << "p_sleep = " << fmt_double(c.energy.p_sleep) << "\n";
  o << "p_trans = " << fmt_double(c.energy.p_trans) << "\n";
  o << "t_trans = " << fmt_double(c.energy.t_trans) << "\n";
  o << "p_rx = " << fmt_double(c.energy.p_rx) << "\n";
  o << "\n[world]\n";
  o << "process_noise_std = " << fmt_double(c.process.noise_std) << "\n";
  o << "d0_min = " << fmt_double(c.process.d0_min) << "\n";
  o << "d0_max = " << fmt_double(c.process.d0_max) << "\n";
  o << "d_min = " << fmt_double(c.process.d_min) << "\n";
  o << "kappa = " << fmt_double(c.path_loss.kappa) << "\n";
  o << "exponent = " << fmt_double(c.path_loss.exponent) << "\n";
  o << "ref_dist = " << fmt_double(c.path_loss.ref_dist) << "\n";
  o << "sigma_rf = " << fmt_double(c.path_loss.sigma_rf) << "\n";
  if (c.pod.kind == PodCurve::Kind::kLogistic) {
    o << "pod = logistic\n";
    o << "pod_slope = " << fmt_double(c.pod.slope) << "\n";
    o << "pod_midpoint = " << fmt_double(c.pod.midpoint) << "\n";
  } else {
    o << "pod = tabulated\n";
    o << "pod_knots = " << config_detail::knots_to_string(c.pod.knots) << "\n";
  }
  o << "\n[selftrain]\n";
  o << "variance_floor = " << fmt_double(c.variance_floor) << "\n";
  o << "\n[gpr]\n";
  o << "smoothness = " << fmt_double(c.gpr_smoothness) << "\n";
  o << "init_lengthscale = " << fmt_double(c.gpr_init_lengthscale) << "\n";
  o << "init_signal_var = " << fmt_double(c.gpr_init_signal_var) << "\n";
  o << "restarts = " << c.gpr_fit.restarts << "\n";
  o << "max_evals_per_start = " << c.gpr_fit.max_evals_per_start << "\n";
  o << "lengthscale_min = " << fmt_double(c.gpr_fit.lengthscale_min) << "\n";
  o << "lengthscale_max = " << fmt_double(c.gpr_fit.lengthscale_max) << "\n";
  o << "signal_var_min = " << fmt_double(c.gpr_fit.signal_var_min) << "\n";
  o << "signal_var_max = " << fmt_double(c.gpr_fit.signal_var_max) << "\n";
  o << "\n[rbe]\n";
  o << "n_particles = " << c.n_particles << "\n";
  o << "guessed_noise_std = " << fmt_double(c.guessed_noise_std) << "\n";
  o << "sigma_rf_guess = " << fmt_double(c.sigma_rf_guess) << "\n";
  o << "ess_threshold = " << fmt_double(c.ess_threshold) << "\n";
  o << "filter_model = " << c.filter_model << "\n";
  o << "init_rssi_min = " << fmt_double(c.init_rssi_min) << "\n";
  o << "init_rssi_max = " << fmt_double(c.init_rssi_max) << "\n";
  o << "\n[controller]\n";
  o << "alpha = " << fmt_double(c.alpha) << "\n";
  o << "gt_rollouts = " << c.gt_rollouts << "\n";
  o << "\n[campaign]\n";
  o << "n_tests = " << c.n_tests << "\n";
  o << "master_seed = " << c.master_seed << "\n";
  o << "policies = ";
  for (std::size_t i = 0; i < c.policies.size(); ++i)
    o << (i ? "," : "") << policy_name(c.policies[i]);
  o << "\n";
  o << "out_dir = " << c.out_dir << "\n";
  o << "threads = " << c.threads << "\n";
  return o.str();
}

// Hash of everything that affects simulation results (output location and
// thread count excluded).
inline std::string config_fingerprint(const ExperimentConfig& c) {
  ExperimentConfig canon = c;
  canon.out_dir = "";
  canon.threads = 0;
  return to_hex(fnv1a(config_to_ini(canon)));
}

}  // namespace rfwake
