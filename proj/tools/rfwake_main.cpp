// Command-line front end: train / run / campaign / plot / replay.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rfwake/campaign.hpp"
#include "rfwake/config.hpp"
#include "rfwake/gpr.hpp"
#include "rfwake/policy.hpp"
#include "rfwake/svg.hpp"
#include "rfwake/util.hpp"

namespace {

using namespace rfwake;

ExperimentConfig load_config(const std::string& path,
                             std::optional<std::uint64_t> seed_override,
                             const std::string& policies_override) {
  ExperimentConfig cfg =
      path.empty() ? ExperimentConfig{} : config_from_file(path);
  if (seed_override) cfg.master_seed = *seed_override;
  if (!policies_override.empty()) {
    cfg.policies.clear();
    for (const auto& name : split(policies_override, ','))
      if (!trim(name).empty()) cfg.policies.push_back(policy_from_name(trim(name)));
  }
  cfg.validate();
  return cfg;
}

GprModel load_model(const std::string& path) {
  return GprModel::from_json(nlohmann::json::parse(read_file(path)));
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec && !std::filesystem::is_directory(dir))
    throw std::runtime_error("cannot create output directory: " + dir);
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir, const std::string& dataset_path) {
  ExperimentConfig cfg = load_config(config_path, seed, "");
  ensure_dir(out_dir);

  TrainingDataset dataset;
  if (!dataset_path.empty()) {
    dataset = dataset_from_csv(read_file(dataset_path));
    std::cout << "imported " << dataset.n_train() << " training pairs from "
              << dataset_path << "\n";
  } else {
    dataset = collect_training_data(cfg);
    std::cout << "collected " << dataset.n_train() << " training pairs over "
              << fmt_double(cfg.n_train * cfg.t_rf) << " s\n";
  }
  write_file(out_dir + "/dataset.csv", dataset_to_csv(dataset));

  const GprModel model = train_model(cfg, dataset);
  write_file(out_dir + "/model.json", model.to_json().dump(2) + "\n");
  write_file(out_dir + "/pod_curve.svg", pod_curve_svg(model, dataset));

  std::cout << "fitted kernel: lengthscale=" << fmt_double(model.kernel().lengthscale)
            << " dB, signal_var=" << fmt_double(model.kernel().signal_var)
            << ", log marginal likelihood=" << fmt_double(model.log_marginal_likelihood())
            << "\n";
  std::cout << "wrote " << out_dir << "/{dataset.csv,model.json,pod_curve.svg}\n";
  return 0;
}

int run_single(const std::string& config_path, std::optional<std::uint64_t> seed,
               const std::string& policy_name_str, std::uint64_t run_id,
               const std::string& out_dir, const std::string& model_path,
               bool dump_particles, bool full_trace) {
  ExperimentConfig cfg = load_config(config_path, seed, "");
  const Policy policy = policy_from_name(policy_name_str);
  ensure_dir(out_dir);

  GprModel model;
  const GprModel* model_ptr = nullptr;
  if (policy == Policy::kS2gpr) {
    if (!model_path.empty()) {
      model = load_model(model_path);
    } else {
      std::cout << "no --model given; training in-process\n";
      model = train_model(cfg, collect_training_data(cfg));
    }
    model_ptr = &model;
  }

  const std::string tag = policy_name_str + "_" + std::to_string(run_id);
  std::ofstream decisions_out, particles_out;
  RunSinks sinks;
  if (policy == Policy::kGt || policy == Policy::kS2gpr) {
    decisions_out.open(out_dir + "/decisions_" + tag + ".csv");
    sinks.decisions = &decisions_out;
  }
  if (dump_particles && policy == Policy::kS2gpr) {
    particles_out.open(out_dir + "/particles_" + tag + ".csv");
    sinks.particles = &particles_out;
  }

  const RunTrace trace = run_policy(cfg, policy, run_id, model_ptr, sinks);
  const RunMetrics m = metrics_of(trace);

  if (full_trace) {
    std::ostringstream o;
    o << "t,mode,detectable,detected,distance_m,energy_j\n";
    for (const auto& f : trace.frames)
      o << fmt_double(f.t) << ',' << f.mode << ',' << (f.detectable ? 1 : 0)
        << ',' << (f.detected ? 1 : 0) << ',' << fmt_double(f.d) << ','
        << fmt_double(f.energy_j) << '\n';
    write_file(out_dir + "/trace_" + tag + ".csv", o.str());
  }

  std::cout << "policy=" << m.policy << " seed=" << m.run_id
            << " acc=" << fmt_double(m.accuracy)
            << " e_total_j=" << fmt_double(m.energy_j)
            << " ce=" << fmt_double(m.confusion_energy) << "\n";
  return 0;
}

int cmd_campaign(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& policies, const std::string& out_dir,
                 const std::string& model_path) {
  ExperimentConfig cfg = load_config(config_path, seed, policies);
  const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;

  GprModel model;
  const GprModel* model_ptr = nullptr;
  if (!model_path.empty()) {
    model = load_model(model_path);
    model_ptr = &model;
  }

  const CampaignSummary summary = run_campaign_to_dir(cfg, dir, model_ptr);
  std::cout << "campaign " << summary.config_fingerprint << ": "
            << summary.runs.size() << " runs -> " << dir << "\n";
  for (const auto& [policy, metrics] : summary.by_policy) {
    const auto& acc = metrics.at("accuracy");
    const auto& e = metrics.at("energy_j");
    const auto& ce = metrics.at("confusion_energy");
    std::cout << "  " << policy << ": acc mean=" << fmt_double(acc.mean)
              << " min=" << fmt_double(acc.min)
              << " | energy mean=" << fmt_double(e.mean)
              << " J | ce mean=" << fmt_double(ce.mean) << "\n";
  }
  return 0;
}

int cmd_plot(const std::string& results_path, const std::string& out_dir) {
  const auto runs = results_from_csv(read_file(results_path));
  ensure_dir(out_dir);
  write_ecdf_plots(runs, out_dir);
  std::cout << "wrote ECDF plots for " << runs.size() << " runs to " << out_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSSI-assisted probabilistic camera wake-up simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", model_path, dataset_path,
              policies, policy = "s2gpr", results_path;
  std::uint64_t run_id = 0;
  bool dump_particles = false;
  std::optional<std::uint64_t> seed;
  auto add_seed = [&seed](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&seed](const std::uint64_t& v) { seed = v; },
        "override the master seed");
  };

  auto* train = app.add_subcommand("train", "collect data and fit the POD model");
  train->add_option("--config", config_path, "config file (defaults otherwise)");
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--dataset", dataset_path, "import a dataset CSV instead of simulating");
  add_seed(train);

  auto* run = app.add_subcommand("run", "single run of one policy");
  run->add_option("--config", config_path, "config file");
  run->add_option("--policy", policy, "always|rnd|gt|s2gpr")->required();
  run->add_option("--run-id", run_id, "run index within the campaign pairing");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--model", model_path, "fitted model JSON (s2gpr)");
  run->add_flag("--dump-particles", dump_particles, "write the particle cloud per step");
  add_seed(run);

  auto* campaign = app.add_subcommand("campaign", "full Monte Carlo comparison");
  campaign->add_option("--config", config_path, "config file");
  campaign->add_option("--out", out_dir, "output directory");
  campaign->add_option("--policies", policies, "comma-separated policy list");
  campaign->add_option("--model", model_path, "reuse a fitted model JSON");
  add_seed(campaign);

  auto* plot = app.add_subcommand("plot", "rebuild ECDF plots from results.csv");
  plot->add_option("--results", results_path, "results CSV")->required();
  plot->add_option("--out", out_dir, "output directory");

  auto* replay = app.add_subcommand("replay", "reproduce one run with full traces");
  replay->add_option("--config", config_path, "config file");
  replay->add_option("--policy", policy, "always|rnd|gt|s2gpr")->required();
  replay->add_option("--run-id", run_id, "run index to reproduce");
  replay->add_option("--out", out_dir, "output directory");
  replay->add_option("--model", model_path, "fitted model JSON (s2gpr)");
  replay->add_flag("--dump-particles", dump_particles, "write the particle cloud per step");
  add_seed(replay);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return cmd_train(config_path, seed, out_dir, dataset_path);
    if (run->parsed())
      return run_single(config_path, seed, policy, run_id, out_dir, model_path,
                        dump_particles, /*full_trace=*/false);
    if (campaign->parsed())
      return cmd_campaign(config_path, seed, policies, out_dir, model_path);
    if (plot->parsed()) return cmd_plot(results_path, out_dir);
    if (replay->parsed())
      return run_single(config_path, seed, policy, run_id, out_dir, model_path,
                        dump_particles, /*full_trace=*/true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
