#pragma once

// Deterministic stream derivation: every random draw in a run comes from a
// named substream keyed on (master seed, run id, stream tag, owner). Streams
// shared by all policies within a run (target trajectory, detection outcomes,
// RSSI noise) use owner = kPaired, so baseline comparisons are paired.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rfwake {

using Rng = std::mt19937_64;

namespace detail {

// splitmix64 finalizer (Steele et al.); good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

enum class Stream : std::uint64_t {
  kTrajectory = 1,       // target random walk + initial distance
  kDetection = 2,        // per-frame Bernoulli detectability draws
  kRssiNoise = 3,        // observation noise at RSSI instants
  kFilter = 4,           // particle init, prediction noise, resampling
  kLookahead = 5,        // controller decision-scoped propagation
  kPolicy = 6,           // policy-owned draws (rnd's Bernoulli)
  kTraining = 7,         // self-supervised data collection phase
  kGprRestarts = 8,      // hyperparameter restart points
};

// Owner tag: streams with owner kPaired are identical across policies.
inline constexpr std::uint64_t kPaired = 0xfffffffffffffff0ULL;

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = detail::mix64(master);
  for (std::uint64_t p : path) h = detail::mix64(h ^ p);
  return h;
}

inline Rng make_stream(std::uint64_t master, std::uint64_t run_id,
                       Stream stream, std::uint64_t owner = kPaired,
                       std::uint64_t counter = 0) {
  return Rng(derive_seed(
      master, {run_id, static_cast<std::uint64_t>(stream), owner, counter}));
}

}  // namespace rfwake
