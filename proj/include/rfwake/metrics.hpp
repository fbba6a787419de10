#pragma once

// Per-run accuracy, total energy, confusion-energy, and cross-run ECDFs.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfwake/sim_core.hpp"

namespace rfwake {

struct FrameRecord {
  double t = 0.0;
  int mode = 0;             // s_t during this frame
  bool detectable = false;  // D_t, the detection outcome the camera would see
  bool detected = false;    // detectable AND active
  double d = 0.0;           // true distance (ground truth, for diagnostics)
  double energy_j = 0.0;    // energy attributed to this frame
};

struct RunTrace {
  std::string policy;
  std::uint64_t run_id = 0;
  std::vector<FrameRecord> frames;
  EnergyLedger ledger;
};

// Empirical probability of a true positive or true negative: the camera mode
// agrees with the detection outcome.
inline double accuracy(const RunTrace& trace) {
  if (trace.frames.empty()) throw std::invalid_argument("accuracy: empty trace");
  long agree = 0;
  for (const auto& f : trace.frames)
    agree += (f.mode == 1) == f.detectable;
  return static_cast<double>(agree) / trace.frames.size();
}

// Frame-mean of the CE weight term s + D - 2sD; complements accuracy to 1.
inline double misclassification_rate(const RunTrace& trace) {
  if (trace.frames.empty())
    throw std::invalid_argument("misclassification_rate: empty trace");
  long bad = 0;
  for (const auto& f : trace.frames)
    bad += (f.mode == 1) != f.detectable;
  return static_cast<double>(bad) / trace.frames.size();
}

// Fraction of the consumed energy spent while mode and detection outcome
// disagreed.
inline double confusion_energy(const RunTrace& trace) {
  double total = 0.0;
  double bad = 0.0;
  for (const auto& f : trace.frames) {
    total += f.energy_j;
    if ((f.mode == 1) != f.detectable) bad += f.energy_j;
  }
  if (total <= 0.0)
    throw std::invalid_argument("confusion_energy: zero total energy");
  return bad / total;
}

struct EcdfCurve {
  std::vector<double> sorted;  // sample values, ascending

  double operator()(double q) const {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), q);
    return static_cast<double>(it - sorted.begin()) / sorted.size();
  }
};

inline EcdfCurve ecdf(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("ecdf: no samples");
  std::sort(samples.begin(), samples.end());
  return EcdfCurve{std::move(samples)};
}

inline double ecdf_evaluate(const EcdfCurve& curve, double q) { return curve(q); }

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace rfwake
