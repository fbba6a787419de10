#pragma once

// Energy-aware switching controller. At every RSSI instant the cost
// J(s+u) = J_D(s+u) - alpha * E_c(s+u, s) / E_max is evaluated over the
// admissible inputs and the argmax is applied; between RSSI instants the
// input is forced to zero.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rfwake/gpr.hpp"
#include "rfwake/rbe.hpp"
#include "rfwake/rng.hpp"
#include "rfwake/sim_core.hpp"
#include "rfwake/world.hpp"

namespace rfwake {

struct ControllerParams {
  double alpha = 1.0;  // weight of the energy term
  int nu = 10;         // camera frames per control interval
  double e_max = 0.0;  // (P_A + P_D) * T_RF + E_trans

  static ControllerParams make(double alpha, const TimeBase& time,
                               const EnergyModelParams& energy) {
    if (alpha < 0) throw std::invalid_argument("ControllerParams: alpha must be >= 0");
    ControllerParams c;
    c.alpha = alpha;
    c.nu = time.nu;
    c.e_max = (energy.p_active + energy.p_detector) * time.t_rf + energy.e_trans();
    return c;
  }
};

struct CostBreakdown {
  double j_detection = 0.0;  // J_D in [0,1]
  double j_energy = 0.0;     // -alpha * E_c / E_max, <= 0
  double j_total = 0.0;
};

struct DecisionResult {
  int u_star = 0;
  CostBreakdown cost_on;   // candidate with next mode 1
  CostBreakdown cost_off;  // candidate with next mode 0
};

// Probability of at least one success among nu independent Bernoulli(p) draws.
inline double at_least_one_probability(double p, int nu) {
  if (nu < 1) throw std::invalid_argument("at_least_one_probability: nu must be >= 1");
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("at_least_one_probability: p must lie in [0,1]");
  return 1.0 - std::pow(1.0 - p, nu);
}

// Core fold shared by the belief-based and ground-truth detection terms:
// 1 - sum_i w_i (1 - pod_i)^nu.
inline double detection_term_from_pods(const std::vector<double>& weights,
                                       const std::vector<double>& pods, int nu) {
  if (weights.size() != pods.size())
    throw std::invalid_argument("detection_term_from_pods: length mismatch");
  double miss = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    miss += weights[i] * std::pow(1.0 - pods[i], nu);
  return 1.0 - miss;
}

// Expected probability of detecting the target at least once before the next
// RSSI sample, under the particle belief propagated one control interval
// ahead. The live filter state is not touched.
inline double detection_term(const ParticleSet& set, const GprModel& model,
                             const ControllerParams& params,
                             const FilterProcessParams& filter_params, Rng& rng) {
  ParticleSet ahead = set;
  for (int l = 0; l < params.nu; ++l) predict(ahead, filter_params, rng);
  std::vector<double> pods(ahead.size());
  for (std::size_t i = 0; i < ahead.size(); ++i)
    pods[i] = model.predict_mean_clamped(ahead.particles[i]);
  return detection_term_from_pods(ahead.weights, pods, params.nu);
}

// Ground-truth variant: perfect knowledge of the distance, the POD curve and
// the process model; the expectation is Monte-Carlo averaged over rollouts of
// the true dynamics.
inline double detection_term_truth(double d, const PodCurve& pod,
                                   const ProcessModelParams& process,
                                   const ControllerParams& params, int rollouts,
                                   Rng& rng) {
  if (rollouts < 1)
    throw std::invalid_argument("detection_term_truth: rollouts must be >= 1");
  double miss = 0.0;
  for (int k = 0; k < rollouts; ++k) {
    TargetState s{d};
    for (int l = 0; l < params.nu; ++l) s = step_target(s, process, rng);
    miss += std::pow(1.0 - pod(s.d), params.nu);
  }
  return 1.0 - miss / rollouts;
}

// Normalized energy cost of holding s_new for one interval, in (0, 1].
inline double energy_term(PlatformState s_new, PlatformState s_old,
                          const EnergyModelParams& energy,
                          const ControllerParams& params, double t_rf) {
  return step_energy(energy, s_new, s_old, t_rf) / params.e_max;
}

namespace controller_detail {

inline DecisionResult select(double j_d_on, PlatformState s,
                             const EnergyModelParams& energy,
                             const ControllerParams& params, double t_rf) {
  const double e_on = energy_term(PlatformState{1}, s, energy, params, t_rf);
  const double e_off = energy_term(PlatformState{0}, s, energy, params, t_rf);
  DecisionResult r;
  r.cost_on.j_detection = j_d_on;
  r.cost_on.j_energy = -params.alpha * e_on;
  r.cost_on.j_total = r.cost_on.j_detection + r.cost_on.j_energy;
  r.cost_off.j_detection = 0.0;  // J_D(0) = 0
  r.cost_off.j_energy = -params.alpha * e_off;
  r.cost_off.j_total = r.cost_off.j_detection + r.cost_off.j_energy;

  // exact ties resolve to the lower-energy candidate
  int next_mode;
  if (r.cost_on.j_total > r.cost_off.j_total) next_mode = 1;
  else if (r.cost_on.j_total < r.cost_off.j_total) next_mode = 0;
  else next_mode = e_on < e_off ? 1 : 0;
  r.u_star = next_mode - s.mode;
  return r;
}

}  // namespace controller_detail

inline DecisionResult decide(const ParticleSet& set, const GprModel& model,
                             PlatformState s, const EnergyModelParams& energy,
                             const ControllerParams& params,
                             const FilterProcessParams& filter_params,
                             double t_rf, Rng& rng) {
  const double j_d_on = detection_term(set, model, params, filter_params, rng);
  return controller_detail::select(j_d_on, s, energy, params, t_rf);
}

inline DecisionResult decide_truth(double d, const PodCurve& pod,
                                   const ProcessModelParams& process,
                                   PlatformState s, const EnergyModelParams& energy,
                                   const ControllerParams& params, int rollouts,
                                   double t_rf, Rng& rng) {
  const double j_d_on = detection_term_truth(d, pod, process, params, rollouts, rng);
  return controller_detail::select(j_d_on, s, energy, params, t_rf);
}

}  // namespace rfwake
