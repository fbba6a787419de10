#pragma once

// Monte Carlo campaign over policies with paired seeds, plus the artifact
// writers (results CSV, summary JSON, ECDF SVGs). Runs are independent and
// may execute on a thread pool; aggregation sorts by (policy, run) so output
// bytes do not depend on scheduling.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfwake/config.hpp"
#include "rfwake/metrics.hpp"
#include "rfwake/policy.hpp"
#include "rfwake/svg.hpp"
#include "rfwake/util.hpp"

namespace rfwake {

struct RunMetrics {
  std::string policy;
  std::uint64_t run_id = 0;
  double accuracy = 0.0;
  double energy_j = 0.0;
  double confusion_energy = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  EcdfCurve ecdf;
};

struct CampaignSummary {
  std::string config_fingerprint;
  std::uint64_t master_seed = 0;
  int n_tests = 0;
  std::vector<RunMetrics> runs;  // sorted by (policy order, run id)
  // policy -> metric name ("accuracy" | "energy_j" | "confusion_energy")
  std::map<std::string, std::map<std::string, MetricSummary>> by_policy;
};

inline RunMetrics metrics_of(const RunTrace& trace) {
  RunMetrics m;
  m.policy = trace.policy;
  m.run_id = trace.run_id;
  m.accuracy = accuracy(trace);
  m.energy_j = trace.ledger.total;
  m.confusion_energy = confusion_energy(trace);
  return m;
}

inline CampaignSummary run_campaign(const ExperimentConfig& cfg,
                                    const GprModel* pretrained = nullptr) {
  cfg.validate();

  bool needs_model = false;
  for (Policy p : cfg.policies) needs_model |= p == Policy::kS2gpr;
  GprModel model;
  const GprModel* model_ptr = pretrained;
  if (needs_model && model_ptr == nullptr) {
    model = train_model(cfg, collect_training_data(cfg));
    model_ptr = &model;
  }

  struct Job {
    Policy policy;
    std::uint64_t run_id;
  };
  std::vector<Job> jobs;
  for (Policy p : cfg.policies)
    for (int r = 0; r < cfg.n_tests; ++r)
      jobs.push_back({p, static_cast<std::uint64_t>(r)});

  std::vector<RunMetrics> results(jobs.size());
  auto work = [&](std::size_t i) {
    results[i] = metrics_of(run_policy(cfg, jobs[i].policy, jobs[i].run_id,
                                       model_ptr));
  };
  unsigned n_threads =
      cfg.threads > 0 ? cfg.threads : std::thread::hardware_concurrency();
  if (n_threads <= 1 || jobs.size() == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(n_threads, jobs.size()); ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size();
             i = next.fetch_add(1))
          work(i);
      });
    for (auto& t : pool) t.join();
  }

  CampaignSummary summary;
  summary.config_fingerprint = config_fingerprint(cfg);
  summary.master_seed = cfg.master_seed;
  summary.n_tests = cfg.n_tests;
  summary.runs = std::move(results);  // job order is already (policy, run)

  for (Policy p : cfg.policies) {
    const std::string name = policy_name(p);
    std::vector<double> acc, energy, ce;
    for (const auto& r : summary.runs) {
      if (r.policy != name) continue;
      acc.push_back(r.accuracy);
      energy.push_back(r.energy_j);
      ce.push_back(r.confusion_energy);
    }
    auto summarize = [](const std::vector<double>& v) {
      MetricSummary s;
      s.ecdf = ecdf(v);
      s.mean = mean_of(v);
      s.min = s.ecdf.sorted.front();
      s.max = s.ecdf.sorted.back();
      return s;
    };
    summary.by_policy[name]["accuracy"] = summarize(acc);
    summary.by_policy[name]["energy_j"] = summarize(energy);
    summary.by_policy[name]["confusion_energy"] = summarize(ce);
  }
  return summary;
}

inline std::string results_to_csv(const CampaignSummary& summary) {
  std::ostringstream o;
  o << "policy,seed,acc,e_total_j,ce\n";
  for (const auto& r : summary.runs)
    o << r.policy << ',' << r.run_id << ',' << fmt_double(r.accuracy) << ','
      << fmt_double(r.energy_j) << ',' << fmt_double(r.confusion_energy) << '\n';
  return o.str();
}

inline std::vector<RunMetrics> results_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "policy,seed,acc,e_total_j,ce")
    throw std::runtime_error("results_from_csv: unexpected header");
  std::vector<RunMetrics> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != 5) throw std::runtime_error("results_from_csv: bad row: " + line);
    RunMetrics m;
    m.policy = cols[0];
    m.run_id = std::stoull(cols[1]);
    m.accuracy = std::stod(cols[2]);
    m.energy_j = std::stod(cols[3]);
    m.confusion_energy = std::stod(cols[4]);
    out.push_back(m);
  }
  return out;
}

inline nlohmann::ordered_json summary_to_json(const CampaignSummary& summary) {
  nlohmann::ordered_json j;
  j["format"] = "rfwake-campaign-summary";
  j["config_fingerprint"] = summary.config_fingerprint;
  j["master_seed"] = summary.master_seed;
  j["n_tests"] = summary.n_tests;
  nlohmann::ordered_json pols;
  for (const auto& [policy, metrics] : summary.by_policy) {
    nlohmann::ordered_json pj;
    for (const auto& [metric, s] : metrics) {
      nlohmann::ordered_json mj;
      mj["mean"] = s.mean;
      mj["min"] = s.min;
      mj["max"] = s.max;
      nlohmann::ordered_json pts = nlohmann::ordered_json::array();
      const std::size_t n = s.ecdf.sorted.size();
      for (std::size_t i = 0; i < n; ++i)
        pts.push_back({s.ecdf.sorted[i], static_cast<double>(i + 1) / n});
      mj["ecdf"] = pts;
      pj[metric] = mj;
    }
    pols[policy] = pj;
  }
  j["policies"] = pols;
  return j;
}

// Rebuilds the three ECDF plots from per-run metric rows.
inline void write_ecdf_plots(const std::vector<RunMetrics>& runs,
                             const std::string& dir) {
  std::map<std::string, std::vector<double>> acc, energy, ce;
  for (const auto& r : runs) {
    acc[r.policy].push_back(r.accuracy);
    energy[r.policy].push_back(r.energy_j);
    ce[r.policy].push_back(r.confusion_energy);
  }
  write_file(dir + "/ecdf_accuracy.svg",
             ecdf_plot_svg(acc, "accuracy ECDF", "accuracy"));
  write_file(dir + "/ecdf_energy.svg",
             ecdf_plot_svg(energy, "total energy ECDF", "energy [J]"));
  write_file(dir + "/ecdf_confusion_energy.svg",
             ecdf_plot_svg(ce, "confusion-energy ECDF", "confusion-energy"));
}

// Full campaign with artifacts on disk (dataset, model, plots, CSV, JSON).
inline CampaignSummary run_campaign_to_dir(const ExperimentConfig& cfg,
                                           const std::string& out_dir,
                                           const GprModel* pretrained = nullptr) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec && !std::filesystem::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory: " + out_dir);

  bool needs_model = false;
  for (Policy p : cfg.policies) needs_model |= p == Policy::kS2gpr;
  GprModel model;
  const GprModel* model_ptr = pretrained;
  if (needs_model && model_ptr == nullptr) {
    const TrainingDataset dataset = collect_training_data(cfg);
    write_file(out_dir + "/dataset.csv", dataset_to_csv(dataset));
    model = train_model(cfg, dataset);
    write_file(out_dir + "/model.json", model.to_json().dump(2) + "\n");
    write_file(out_dir + "/pod_curve.svg", pod_curve_svg(model, dataset));
    model_ptr = &model;
  }

  const CampaignSummary summary = run_campaign(cfg, model_ptr);
  write_file(out_dir + "/results.csv", results_to_csv(summary));
  write_file(out_dir + "/summary.json", summary_to_json(summary).dump(2) + "\n");
  write_ecdf_plots(summary.runs, out_dir);
  return summary;
}

}  // namespace rfwake
