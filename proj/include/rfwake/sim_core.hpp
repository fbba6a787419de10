#pragma once

// Simulated time, the two-mode platform state machine, and energy bookkeeping.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rfwake {

// Two clock rates and their integer ratio. Camera frames tick every t_c,
// RSSI samples and control inputs every t_rf = nu * t_c. All scheduling is
// done on integer frame indices; seconds are derived for display only.
struct TimeBase {
  double t_c = 0.01;    // camera frame period [s]
  double t_rf = 0.1;    // receiver sampling period [s]
  int nu = 10;          // t_rf / t_c
  int n_test = 500;     // RSSI samples per evaluation run

  static TimeBase from_rf_period(double t_rf, int nu, int n_test) {
    if (t_rf <= 0.0) throw std::invalid_argument("TimeBase: t_rf must be > 0");
    if (nu < 1) throw std::invalid_argument("TimeBase: nu must be >= 1");
    if (n_test < 1) throw std::invalid_argument("TimeBase: n_test must be >= 1");
    TimeBase tb;
    tb.t_rf = t_rf;
    tb.nu = nu;
    tb.t_c = t_rf / nu;
    tb.n_test = n_test;
    return tb;
  }

  double horizon() const { return n_test * t_rf; }        // T_W
  long frames_per_run() const { return static_cast<long>(n_test) * nu; }
  double frame_time(long frame) const { return frame * t_c; }
  bool is_rf_instant(long frame) const { return frame % nu == 0; }
};

struct PlatformState {
  int mode = 0;  // 0 = sleep, 1 = active
};

// A(s): wake is admissible from sleep, shutdown from active, hold always.
inline std::array<int, 2> admissible_inputs(PlatformState s) {
  return s.mode == 0 ? std::array<int, 2>{0, 1} : std::array<int, 2>{0, -1};
}

inline bool is_admissible(PlatformState s, int u) {
  auto a = admissible_inputs(s);
  return u == a[0] || u == a[1];
}

inline PlatformState transition(PlatformState s, int u) {
  if (!is_admissible(s, u))
    throw std::invalid_argument("transition: input " + std::to_string(u) +
                                " not admissible from mode " +
                                std::to_string(s.mode));
  return PlatformState{s.mode + u};
}

struct EnergyModelParams {
  double p_active = 0.1;     // P_A [W]
  double p_detector = 0.1;   // P_D [W]
  double p_sleep = 0.001;    // P_S [W]
  double p_trans = 0.05;     // P_trans [W]
  double t_trans = 0.003;    // T_trans [s]
  double p_rx = 0.02;        // P_Rx [W]
  bool rx_enabled = false;   // receiver unused by the always/rnd baselines

  double e_trans() const { return p_trans * t_trans; }

  void validate() const {
    if (p_active <= 0 || p_detector <= 0 || p_sleep <= 0 || p_trans <= 0 ||
        t_trans <= 0 || p_rx <= 0)
      throw std::invalid_argument("EnergyModelParams: powers must be > 0");
    if (p_sleep >= p_active)
      throw std::invalid_argument("EnergyModelParams: p_sleep must be < p_active");
  }
};

// Energy of one control interval: new mode holds for the whole interval,
// plus a transition charge when the mode changed.
inline double step_energy(const EnergyModelParams& p, PlatformState s_new,
                          PlatformState s_old, double interval) {
  if (interval < 0.0)
    throw std::invalid_argument("step_energy: negative interval");
  const double hold = interval * ((p.p_active + p.p_detector) * s_new.mode +
                                  p.p_sleep * (1 - s_new.mode));
  return hold + p.e_trans() * std::abs(s_new.mode - s_old.mode);
}

enum class EnergyCategory { kActive = 0, kSleep, kTransition, kReceiver };

struct EnergyLedger {
  double total = 0.0;
  std::array<double, 4> per_category{};  // indexed by EnergyCategory
  double misclassified = 0.0;            // numerator of the confusion-energy

  double category(EnergyCategory c) const {
    return per_category[static_cast<int>(c)];
  }
};

inline void accumulate(EnergyLedger& ledger, double increment,
                       EnergyCategory category, bool misclassified) {
  if (increment < 0.0)
    throw std::invalid_argument("accumulate: negative increment");
  ledger.total += increment;
  ledger.per_category[static_cast<int>(category)] += increment;
  if (misclassified) ledger.misclassified += increment;
}

}  // namespace rfwake
