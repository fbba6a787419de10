#pragma once

// Hidden ground truth: target trajectory, true RSSI map, noisy RSSI
// observations and Bernoulli detection outcomes. Policies never see these
// internals (the gt baseline excepted).

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rfwake/rng.hpp"
#include "rfwake/sim_core.hpp"

namespace rfwake {

struct TargetState {
  double d = 1.0;  // distance from camera focal point [m]
};

struct ProcessModelParams {
  double noise_std = 0.2;   // std of the per-frame step [m]
  double d0_min = 0.5;      // initial condition interval [m]
  double d0_max = 6.0;
  double d_min = 0.01;      // clamp keeping the walk away from zero

  void validate() const {
    if (noise_std < 0) throw std::invalid_argument("ProcessModelParams: noise_std < 0");
    if (!(d0_min > 0) || !(d0_max >= d0_min))
      throw std::invalid_argument("ProcessModelParams: bad d0 range");
    if (!(d_min > 0)) throw std::invalid_argument("ProcessModelParams: d_min must be > 0");
  }
};

// Log-distance path-loss model r = kappa - 10 n log10(d / delta).
struct PathLossParams {
  double kappa = -30.0;   // RSSI at the reference distance [dBm]
  double exponent = 2.0;  // n
  double ref_dist = 1.0;  // delta [m]
  double sigma_rf = 3.0;  // observation noise std [dB]

  void validate() const {
    if (!(exponent > 0)) throw std::invalid_argument("PathLossParams: exponent must be > 0");
    if (!(ref_dist > 0)) throw std::invalid_argument("PathLossParams: ref_dist must be > 0");
    if (sigma_rf < 0) throw std::invalid_argument("PathLossParams: sigma_rf < 0");
  }
};

inline double rssi_true(double d, const PathLossParams& p) {
  if (!(d > 0)) throw std::invalid_argument("rssi_true: d must be > 0");
  return p.kappa - 10.0 * p.exponent * std::log10(d / p.ref_dist);
}

// Inverse of the path-loss map: the distance producing RSSI r.
inline double rssi_to_distance(double r, const PathLossParams& p) {
  return p.ref_dist * std::pow(10.0, (p.kappa - r) / (10.0 * p.exponent));
}

// Probability of detection as a function of distance. Default is the
// decreasing logistic; the tabulated form allows non-monotone shapes such as
// a near-field blind zone.
struct PodCurve {
  enum class Kind { kLogistic, kTabulated };
  Kind kind = Kind::kLogistic;
  double slope = 5.0;      // [1/m]
  double midpoint = 3.5;   // [m]
  std::vector<std::pair<double, double>> knots;  // (d, p), d ascending

  static PodCurve logistic(double slope, double midpoint) {
    PodCurve c;
    c.kind = Kind::kLogistic;
    c.slope = slope;
    c.midpoint = midpoint;
    return c;
  }

  static PodCurve tabulated(std::vector<std::pair<double, double>> knots) {
    PodCurve c;
    c.kind = Kind::kTabulated;
    c.knots = std::move(knots);
    c.validate();
    return c;
  }

  void validate() const {
    if (kind != Kind::kTabulated) return;
    if (knots.size() < 2) throw std::invalid_argument("PodCurve: need >= 2 knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!(knots[i].first > 0))
        throw std::invalid_argument("PodCurve: knot distances must be > 0");
      if (knots[i].second < 0.0 || knots[i].second > 1.0)
        throw std::invalid_argument("PodCurve: knot values must lie in [0,1]");
      if (i > 0 && !(knots[i].first > knots[i - 1].first))
        throw std::invalid_argument("PodCurve: knot distances must be ascending");
    }
  }

  double operator()(double d) const {
    if (kind == Kind::kLogistic)
      return 1.0 / (1.0 + std::exp(slope * (d - midpoint)));
    if (d <= knots.front().first) return knots.front().second;
    if (d >= knots.back().first) return knots.back().second;
    auto hi = std::upper_bound(
        knots.begin(), knots.end(), d,
        [](double x, const std::pair<double, double>& k) { return x < k.first; });
    auto lo = hi - 1;
    const double w = (d - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
  }
};

struct RssiObservation {
  std::optional<double> value;  // dBm; empty off the RSSI grid
  double timestamp = 0.0;

  bool empty() const { return !value.has_value(); }
};

struct DetectionEvent {
  bool detectable = false;  // Bernoulli(p_D(d)) outcome for this frame
  bool detected = false;    // detectable AND camera active
  double timestamp = 0.0;
};

inline TargetState sample_initial_target(const ProcessModelParams& p, Rng& rng) {
  std::uniform_real_distribution<double> u(p.d0_min, p.d0_max);
  return TargetState{std::max(u(rng), p.d_min)};
}

inline TargetState step_target(TargetState s, const ProcessModelParams& p, Rng& rng) {
  double step = 0.0;
  if (p.noise_std > 0) {
    std::normal_distribution<double> n(0.0, p.noise_std);
    step = n(rng);
  }
  return TargetState{std::max(s.d + step, p.d_min)};
}

inline RssiObservation observe_rssi_at_frame(double d, long frame,
                                             const PathLossParams& p,
                                             const TimeBase& time, Rng& rng) {
  RssiObservation obs;
  obs.timestamp = time.frame_time(frame);
  if (!time.is_rf_instant(frame)) return obs;
  double noise = 0.0;
  if (p.sigma_rf > 0) {
    std::normal_distribution<double> n(0.0, p.sigma_rf);
    noise = n(rng);
  }
  obs.value = rssi_true(d, p) + noise;
  return obs;
}

inline RssiObservation observe_rssi(double d, double t, const PathLossParams& p,
                                    const TimeBase& time, Rng& rng) {
  const double m = std::round(t / time.t_rf);
  const bool on_grid = std::abs(t - m * time.t_rf) <= 1e-9 * std::max(1.0, std::abs(t));
  RssiObservation obs;
  obs.timestamp = t;
  if (!on_grid) return obs;
  double noise = 0.0;
  if (p.sigma_rf > 0) {
    std::normal_distribution<double> n(0.0, p.sigma_rf);
    noise = n(rng);
  }
  obs.value = rssi_true(d, p) + noise;
  return obs;
}

// One draw per camera frame. The detectability outcome is drawn regardless of
// the camera mode so that policies sharing a detection stream see identical
// outcomes; the realized detection requires the camera to be active.
inline DetectionEvent sample_detection(double d, int mode, const PodCurve& curve,
                                       Rng& rng, double timestamp = 0.0) {
  if (!(d > 0)) throw std::invalid_argument("sample_detection: d must be > 0");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DetectionEvent ev;
  ev.timestamp = timestamp;
  ev.detectable = u(rng) < curve(d);
  ev.detected = ev.detectable && mode == 1;
  return ev;
}

}  // namespace rfwake
