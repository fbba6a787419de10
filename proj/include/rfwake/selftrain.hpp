#pragma once

// Self-supervised data collection: the camera is pinned active while the
// target moves in front of it; detection outcomes between consecutive RSSI
// samples are windowed into empirical-POD labels paired with the RSSI input.

#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfwake/rng.hpp"
#include "rfwake/sim_core.hpp"
#include "rfwake/util.hpp"
#include "rfwake/world.hpp"

namespace rfwake {

struct TrainingPair {
  double timestamp = 0.0;  // [s]
  double rssi = 0.0;       // input z_RF [dBm]
  double label = 0.0;      // empirical POD, on the grid {k/nu}
  int nu = 1;              // window length
  double noise_var = 1.0;  // per-point variance handed to the GP
};

struct TrainingDataset {
  std::vector<TrainingPair> pairs;

  int n_train() const { return static_cast<int>(pairs.size()); }
};

inline double empirical_pod(const std::vector<int>& window, int nu) {
  if (nu < 1 || static_cast<int>(window.size()) != nu)
    throw std::invalid_argument("empirical_pod: window length must equal nu >= 1");
  long count = 0;
  for (int d : window) count += d != 0;
  return static_cast<double>(count) / nu;
}

// Plug-in CLT variance: the observed label stands in for the latent POD, and
// a floor keeps the GP noise matrix away from singular at labels 0 and 1.
inline double label_noise_variance(double label, int nu, double floor = 1e-4) {
  if (nu < 1) throw std::invalid_argument("label_noise_variance: nu must be >= 1");
  return std::max(label * (1.0 - label) / nu, floor);
}

struct SelfTrainParams {
  int n_train = 900;
  double variance_floor = 1e-4;
};

// Runs the collection phase: n_train RSSI intervals with the camera active.
// Pair i couples the RSSI observation at t = i*T_RF with the mean of the nu
// detection outcomes of the preceding interval.
inline TrainingDataset collect_dataset(const ProcessModelParams& process,
                                       const PathLossParams& path_loss,
                                       const PodCurve& pod, const TimeBase& time,
                                       const SelfTrainParams& params,
                                       Rng& traj_rng, Rng& det_rng, Rng& rssi_rng) {
  if (params.n_train < 1)
    throw std::invalid_argument("collect_dataset: n_train must be >= 1");
  if (time.nu < 5)
    std::cerr << "[selftrain] warning: nu=" << time.nu
              << " is small; the CLT label-noise approximation is coarse\n";

  TrainingDataset ds;
  ds.pairs.reserve(params.n_train);
  TargetState target = sample_initial_target(process, traj_rng);
  std::vector<int> window(time.nu, 0);

  for (int i = 1; i <= params.n_train; ++i) {
    for (int l = 0; l < time.nu; ++l) {
      target = step_target(target, process, traj_rng);
      const long frame = static_cast<long>(i - 1) * time.nu + l + 1;
      auto ev = sample_detection(target.d, 1, pod, det_rng, time.frame_time(frame));
      window[l] = ev.detected ? 1 : 0;
    }
    const long rf_frame = static_cast<long>(i) * time.nu;
    auto obs = observe_rssi_at_frame(target.d, rf_frame, path_loss, time, rssi_rng);
    TrainingPair pair;
    pair.timestamp = obs.timestamp;
    pair.rssi = *obs.value;
    pair.label = empirical_pod(window, time.nu);
    pair.nu = time.nu;
    pair.noise_var = label_noise_variance(pair.label, time.nu, params.variance_floor);
    ds.pairs.push_back(pair);
  }
  return ds;
}

inline std::string dataset_to_csv(const TrainingDataset& ds) {
  std::ostringstream out;
  out << "timestamp_s,rssi_dbm,label,nu,noise_var\n";
  for (const auto& p : ds.pairs)
    out << fmt_double(p.timestamp) << ',' << fmt_double(p.rssi) << ','
        << fmt_double(p.label) << ',' << p.nu << ',' << fmt_double(p.noise_var)
        << '\n';
  return out.str();
}

inline TrainingDataset dataset_from_csv(const std::string& csv) {
  TrainingDataset ds;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("dataset_from_csv: empty input");
  if (trim(line) != "timestamp_s,rssi_dbm,label,nu,noise_var")
    throw std::runtime_error("dataset_from_csv: unexpected header: " + line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != 5)
      throw std::runtime_error("dataset_from_csv: bad row: " + line);
    TrainingPair p;
    p.timestamp = std::stod(cols[0]);
    p.rssi = std::stod(cols[1]);
    p.label = std::stod(cols[2]);
    p.nu = std::stoi(cols[3]);
    p.noise_var = std::stod(cols[4]);
    if (p.noise_var <= 0)
      throw std::runtime_error("dataset_from_csv: noise_var must be > 0");
    ds.pairs.push_back(p);
  }
  return ds;
}

}  // namespace rfwake
