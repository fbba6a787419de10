#pragma once

// One evaluation run under a wake-up policy. All policies share the paired
// world streams (trajectory, detection outcomes, RSSI noise); policy-owned
// randomness lives in separate streams so baselines stay comparable.
//
// Schedule per control interval N = 0 .. n_test-1:
//   t = N*T_RF : RSSI sample (receiver-enabled policies), belief update,
//                control decision; the chosen mode holds for the interval.
//   interval   : nu camera frames; target steps, detection outcome drawn,
//                per-frame energy charged, filter prediction per frame.

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "rfwake/config.hpp"
#include "rfwake/controller.hpp"
#include "rfwake/gpr.hpp"
#include "rfwake/metrics.hpp"
#include "rfwake/rbe.hpp"
#include "rfwake/rng.hpp"
#include "rfwake/selftrain.hpp"
#include "rfwake/sim_core.hpp"
#include "rfwake/world.hpp"

namespace rfwake {

// Optional per-run artifact sinks; null streams disable the corresponding dump.
struct RunSinks {
  std::ostream* decisions = nullptr;  // t,s_old,j_d_on,j_e_on,j_e_off,u_star
  std::ostream* particles = nullptr;  // t,particle,rssi,weight
};

inline const char* kDecisionLogHeader = "t,s_old,j_d_on,j_e_on,j_e_off,u_star";
inline const char* kParticleLogHeader = "t,particle,rssi,weight";

namespace policy_detail {

inline void log_decision(std::ostream* out, double t, int s_old,
                         const DecisionResult& d) {
  if (!out) return;
  *out << fmt_double(t) << ',' << s_old << ',' << fmt_double(d.cost_on.j_detection)
       << ',' << fmt_double(d.cost_on.j_energy) << ','
       << fmt_double(d.cost_off.j_energy) << ',' << d.u_star << '\n';
}

inline void log_particles(std::ostream* out, double t, const ParticleSet& set) {
  if (!out) return;
  for (std::size_t i = 0; i < set.size(); ++i)
    *out << fmt_double(t) << ',' << i << ',' << fmt_double(set.particles[i])
         << ',' << fmt_double(set.weights[i]) << '\n';
}

}  // namespace policy_detail

inline RunTrace run_policy(const ExperimentConfig& cfg, Policy policy,
                           std::uint64_t run_id,
                           const GprModel* model = nullptr,
                           RunSinks sinks = {}) {
  cfg.validate();
  if (policy == Policy::kS2gpr && model == nullptr)
    throw std::invalid_argument("run_policy: s2gpr requires a fitted GPR model");

  const TimeBase time = cfg.time_base();
  EnergyModelParams energy = cfg.energy;
  energy.rx_enabled = policy == Policy::kGt || policy == Policy::kS2gpr;
  const ControllerParams ctrl = cfg.controller_params();
  const FilterProcessParams filter_params = cfg.filter_params();
  const std::uint64_t policy_tag = static_cast<std::uint64_t>(policy);

  Rng traj = make_stream(cfg.master_seed, run_id, Stream::kTrajectory);
  Rng det = make_stream(cfg.master_seed, run_id, Stream::kDetection);
  Rng rssi = make_stream(cfg.master_seed, run_id, Stream::kRssiNoise);
  Rng filter = make_stream(cfg.master_seed, run_id, Stream::kFilter, policy_tag);
  Rng policy_rng = make_stream(cfg.master_seed, run_id, Stream::kPolicy, policy_tag);

  RunTrace trace;
  trace.policy = policy_name(policy);
  trace.run_id = run_id;
  trace.frames.reserve(time.frames_per_run());

  TargetState target = sample_initial_target(cfg.process, traj);
  PlatformState s{policy == Policy::kAlways ? 1 : 0};
  ParticleSet belief;

  if (sinks.decisions) *sinks.decisions << kDecisionLogHeader << '\n';
  if (sinks.particles) *sinks.particles << kParticleLogHeader << '\n';

  for (int n = 0; n < time.n_test; ++n) {
    const long rf_frame = static_cast<long>(n) * time.nu;
    const double t_decision = time.frame_time(rf_frame);

    // receiver sample and belief maintenance
    if (energy.rx_enabled) {
      const RssiObservation obs =
          observe_rssi_at_frame(target.d, rf_frame, cfg.path_loss, time, rssi);
      if (policy == Policy::kS2gpr) {
        if (n == 0) {
          belief = init_particles(cfg.n_particles, obs.value, cfg.sigma_rf_guess,
                                  {cfg.init_rssi_min, cfg.init_rssi_max}, filter);
        } else {
          update(belief, obs, cfg.sigma_rf_guess);
          resample_if_needed(belief, cfg.ess_threshold, filter);
        }
        policy_detail::log_particles(sinks.particles, t_decision, belief);
      }
    }

    // control input
    PlatformState s_new = s;
    switch (policy) {
      case Policy::kAlways:
        s_new.mode = 1;
        break;
      case Policy::kRnd: {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        s_new.mode = u(policy_rng) < 0.5 ? 1 : 0;
        break;
      }
      case Policy::kGt: {
        Rng lookahead = make_stream(cfg.master_seed, run_id, Stream::kLookahead,
                                    policy_tag, static_cast<std::uint64_t>(n));
        const DecisionResult d =
            decide_truth(target.d, cfg.pod, cfg.process, s, energy, ctrl,
                         cfg.gt_rollouts, time.t_rf, lookahead);
        policy_detail::log_decision(sinks.decisions, t_decision, s.mode, d);
        s_new = transition(s, d.u_star);
        break;
      }
      case Policy::kS2gpr: {
        Rng lookahead = make_stream(cfg.master_seed, run_id, Stream::kLookahead,
                                    policy_tag, static_cast<std::uint64_t>(n));
        const DecisionResult d = decide(belief, *model, s, energy, ctrl,
                                        filter_params, time.t_rf, lookahead);
        policy_detail::log_decision(sinks.decisions, t_decision, s.mode, d);
        s_new = transition(s, d.u_star);
        break;
      }
    }

    // energy of this interval, attributed per frame
    const double base_frame =
        time.t_c * ((energy.p_active + energy.p_detector) * s_new.mode +
                    energy.p_sleep * (1 - s_new.mode));
    const double trans = energy.e_trans() * std::abs(s_new.mode - s.mode);
    const EnergyCategory hold_cat =
        s_new.mode == 1 ? EnergyCategory::kActive : EnergyCategory::kSleep;

    for (int l = 1; l <= time.nu; ++l) {
      target = step_target(target, cfg.process, traj);
      const long frame = rf_frame + l;
      const double t_frame = time.frame_time(frame);
      const DetectionEvent ev =
          sample_detection(target.d, s_new.mode, cfg.pod, det, t_frame);
      const bool mis = ev.detectable != (s_new.mode == 1);

      double frame_energy = base_frame;
      accumulate(trace.ledger, base_frame, hold_cat, mis);
      if (l == 1 && trans > 0.0) {
        accumulate(trace.ledger, trans, EnergyCategory::kTransition, mis);
        frame_energy += trans;
      }
      if (energy.rx_enabled) {
        const double rx = time.t_c * energy.p_rx;
        accumulate(trace.ledger, rx, EnergyCategory::kReceiver, mis);
        frame_energy += rx;
      }

      trace.frames.push_back(FrameRecord{t_frame, s_new.mode, ev.detectable,
                                         ev.detected, target.d, frame_energy});

      if (policy == Policy::kS2gpr) predict(belief, filter_params, filter);
    }
    s = s_new;
  }
  return trace;
}

// Self-supervised collection with the training streams of this master seed.
inline TrainingDataset collect_training_data(const ExperimentConfig& cfg) {
  const TimeBase time = TimeBase::from_rf_period(cfg.t_rf, cfg.nu, cfg.n_train);
  SelfTrainParams params{cfg.n_train, cfg.variance_floor};
  Rng traj = make_stream(cfg.master_seed, 0, Stream::kTraining, kPaired, 1);
  Rng det = make_stream(cfg.master_seed, 0, Stream::kTraining, kPaired, 2);
  Rng rssi = make_stream(cfg.master_seed, 0, Stream::kTraining, kPaired, 3);
  return collect_dataset(cfg.process, cfg.path_loss, cfg.pod, time, params,
                         traj, det, rssi);
}

inline GprModel train_model(const ExperimentConfig& cfg,
                            const TrainingDataset& dataset) {
  GprFitConfig fit_cfg = cfg.gpr_fit;
  fit_cfg.seed = cfg.master_seed;
  fit_cfg.threads = cfg.threads;
  return fit(dataset, cfg.gpr_init_kernel(), fit_cfg);
}

}  // namespace rfwake
