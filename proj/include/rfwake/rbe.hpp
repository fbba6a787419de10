#pragma once

// Particle-filter recursive Bayesian estimation of the target RSSI state from
// intermittent observations. The belief is a weighted particle cloud in dBm.

#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rfwake/rng.hpp"
#include "rfwake/world.hpp"

namespace rfwake {

struct ParticleSet {
  std::vector<double> particles;  // RSSI hypotheses [dBm]
  std::vector<double> weights;    // normalized, sum to 1

  std::size_t size() const { return particles.size(); }

  double ess() const {
    double s2 = 0.0;
    for (double w : weights) s2 += w * w;
    return 1.0 / s2;
  }
};

struct FilterProcessParams {
  enum class Model { kRandomWalkRssi, kMappedDistanceWalk };
  Model model = Model::kRandomWalkRssi;
  double guessed_noise_std = 0.1;  // per-frame step std [dB] for the RSSI walk
  // Used only by the mapped model: propagate in distance, map back via PLM.
  PathLossParams path_loss;
  ProcessModelParams process;

  void validate() const {
    if (guessed_noise_std < 0)
      throw std::invalid_argument("FilterProcessParams: guessed_noise_std < 0");
  }
};

inline ParticleSet init_particles(int n, std::optional<double> first_obs,
                                  double sigma_rf, std::pair<double, double> rssi_range,
                                  Rng& rng) {
  if (n < 1) throw std::invalid_argument("init_particles: n must be >= 1");
  ParticleSet set;
  set.particles.resize(n);
  set.weights.assign(n, 1.0 / n);
  if (first_obs) {
    std::normal_distribution<double> g(*first_obs, 3.0 * sigma_rf);
    for (auto& p : set.particles) p = g(rng);
  } else {
    std::uniform_real_distribution<double> u(rssi_range.first, rssi_range.second);
    for (auto& p : set.particles) p = u(rng);
  }
  return set;
}

// PREDICTION: each particle through the guessed process model with an
// independent noise draw; weights untouched.
inline void predict(ParticleSet& set, const FilterProcessParams& params, Rng& rng) {
  if (params.model == FilterProcessParams::Model::kRandomWalkRssi) {
    if (params.guessed_noise_std <= 0) return;
    std::normal_distribution<double> n(0.0, params.guessed_noise_std);
    for (auto& p : set.particles) p += n(rng);
  } else {
    for (auto& p : set.particles) {
      TargetState s{std::max(rssi_to_distance(p, params.path_loss),
                             params.process.d_min)};
      s = step_target(s, params.process, rng);
      p = rssi_true(s.d, params.path_loss);
    }
  }
}

// UPDATE: empty observations carry likelihood 1 and leave the set unchanged;
// otherwise weights are scaled by the Gaussian RF likelihood and normalized.
// Total weight collapse resets to uniform with a warning.
inline void update(ParticleSet& set, const RssiObservation& obs,
                   double sigma_rf_guess) {
  if (obs.empty()) return;
  if (!(sigma_rf_guess > 0))
    throw std::invalid_argument("update: sigma_rf_guess must be > 0");
  const double z = *obs.value;
  const double inv2s2 = 1.0 / (2.0 * sigma_rf_guess * sigma_rf_guess);

  // log-likelihoods shifted by their maximum before exponentiation
  double max_ll = -std::numeric_limits<double>::infinity();
  std::vector<double> ll(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double e = z - set.particles[i];
    ll[i] = -e * e * inv2s2;
    if (set.weights[i] > 0 && ll[i] > max_ll) max_ll = ll[i];
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    set.weights[i] *= std::exp(ll[i] - max_ll);
    sum += set.weights[i];
  }
  if (!(sum > 0) || !std::isfinite(sum)) {
    std::cerr << "[rbe] warning: filter diverged (all weights underflowed); "
                 "resetting to uniform\n";
    set.weights.assign(set.size(), 1.0 / set.size());
    return;
  }
  for (auto& w : set.weights) w /= sum;
}

// Systematic resampling when the effective sample size drops below
// threshold_fraction * N_s (strict inequality).
inline bool resample_if_needed(ParticleSet& set, double threshold_fraction, Rng& rng) {
  const std::size_t n = set.size();
  if (set.ess() >= threshold_fraction * n) return false;

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double step = 1.0 / n;
  double u = u01(rng) * step;
  std::vector<double> out;
  out.reserve(n);
  double cum = set.weights[0];
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = u + k * step;
    while (cum < target && i + 1 < n) cum += set.weights[++i];
    out.push_back(set.particles[i]);
  }
  set.particles = std::move(out);
  set.weights.assign(n, step);
  return true;
}

inline std::pair<double, double> posterior_summary(const ParticleSet& set) {
  double mean = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i)
    mean += set.weights[i] * set.particles[i];
  double var = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double e = set.particles[i] - mean;
    var += set.weights[i] * e * e;
  }
  return {mean, var};
}

}  // namespace rfwake
