#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rfwake/controller.hpp"
#include "rfwake/gpr.hpp"
#include "rfwake/rbe.hpp"
#include "rfwake/rng.hpp"

using namespace rfwake;

namespace {

const double kTrf = 0.1;

ControllerParams table_controller(double alpha = 1.0) {
  return ControllerParams::make(alpha, TimeBase::from_rf_period(kTrf, 10, 500),
                                EnergyModelParams{});
}

// Single training point with negligible noise pins the GP mean to the label
// there; far away the zero prior takes over.
GprModel pinned_model() {
  return GprModel({-30.0}, {1.0}, {1e-10}, KernelParams{2.5, 3.0, 1.0});
}

ParticleSet single_particle(double r) {
  ParticleSet s;
  s.particles = {r};
  s.weights = {1.0};
  return s;
}

FilterProcessParams frozen_filter() {
  FilterProcessParams f;
  f.guessed_noise_std = 0.0;
  return f;
}

// Exhaustive oracle: sum the probability of every outcome vector with at
// least one success.
double at_least_one_by_enumeration(double p, int nu) {
  double total = 0.0;
  for (unsigned long mask = 1; mask < (1UL << nu); ++mask) {
    double prob = 1.0;
    for (int bit = 0; bit < nu; ++bit)
      prob *= (mask >> bit) & 1UL ? p : 1.0 - p;
    total += prob;
  }
  return total;
}

}  // namespace

TEST_CASE("at-least-one probability endpoints and closed form") {
  CHECK(at_least_one_probability(0.0, 10) == 0.0);
  CHECK(at_least_one_probability(1.0, 10) == 1.0);
  CHECK(at_least_one_probability(0.5, 10) ==
        Catch::Approx(0.9990234375).margin(1e-15));
  CHECK_THROWS_AS(at_least_one_probability(0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(at_least_one_probability(1.5, 3), std::invalid_argument);
}

TEST_CASE("at-least-one probability matches exhaustive enumeration") {
  for (int nu : {1, 2, 5, 8})
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0})
      CHECK(at_least_one_probability(p, nu) ==
            Catch::Approx(at_least_one_by_enumeration(p, nu)).margin(1e-12));
}

TEST_CASE("detection term saturates with the belief") {
  const GprModel model = pinned_model();
  const ControllerParams params = table_controller();
  Rng rng(1);

  // all mass where the POD is pinned at one
  CHECK(detection_term(single_particle(-30.0), model, params, frozen_filter(), rng) ==
        Catch::Approx(1.0).margin(1e-6));
  // all mass far outside the data: prior mean zero
  CHECK(detection_term(single_particle(500.0), model, params, frozen_filter(), rng) ==
        Catch::Approx(0.0).margin(1e-6));

  ParticleSet mixed;
  mixed.particles = {-30.0, 500.0};
  mixed.weights = {0.5, 0.5};
  CHECK(detection_term(mixed, model, params, frozen_filter(), rng) ==
        Catch::Approx(0.5).margin(1e-6));
}

TEST_CASE("detection term fold is monotone in each POD") {
  Rng rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 5;
    std::vector<double> w(n), pods(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] = u01(rng) + 1e-3;
      sum += w[i];
    }
    for (auto& x : w) x /= sum;
    for (auto& p : pods) p = u01(rng);

    const double before = detection_term_from_pods(w, pods, 10);
    const int bump = rep % n;
    pods[bump] = pods[bump] + (1.0 - pods[bump]) * u01(rng);
    CHECK(detection_term_from_pods(w, pods, 10) >= before - 1e-12);
  }
}

TEST_CASE("energy term values for the reference constants") {
  const EnergyModelParams energy;
  const ControllerParams params = table_controller();
  CHECK(params.e_max == Catch::Approx(0.02015).epsilon(1e-12));
  CHECK(energy_term(PlatformState{1}, PlatformState{0}, energy, params, kTrf) ==
        Catch::Approx(1.0).epsilon(1e-12));
  CHECK(energy_term(PlatformState{0}, PlatformState{0}, energy, params, kTrf) ==
        Catch::Approx(0.0001 / 0.02015).epsilon(1e-9));
  CHECK(energy_term(PlatformState{1}, PlatformState{1}, energy, params, kTrf) ==
        Catch::Approx(0.02 / 0.02015).epsilon(1e-9));
}

TEST_CASE("decide weighs detection against energy") {
  const GprModel model = pinned_model();
  const EnergyModelParams energy;
  const ControllerParams params = table_controller();
  Rng rng(3);

  // certain detection: waking costs exactly its normalized energy, J(1)=0
  const DecisionResult wake = decide(single_particle(-30.0), model,
                                     PlatformState{0}, energy, params,
                                     frozen_filter(), kTrf, rng);
  CHECK(wake.u_star == 1);
  CHECK(wake.cost_on.j_total ==
        Catch::Approx(wake.cost_on.j_detection + wake.cost_on.j_energy));
  CHECK(wake.cost_off.j_total < 0.0);

  // J_D around 0.5 is not worth the wake-up energy at alpha = 1
  ParticleSet mixed;
  mixed.particles = {-30.0, 500.0};
  mixed.weights = {0.5, 0.5};
  const DecisionResult stay = decide(mixed, model, PlatformState{0}, energy,
                                     params, frozen_filter(), kTrf, rng);
  CHECK(stay.u_star == 0);
}

TEST_CASE("alpha zero keeps the camera on whenever detection is possible") {
  const GprModel model = pinned_model();
  const EnergyModelParams energy;
  const ControllerParams params = table_controller(0.0);
  Rng rng(5);
  ParticleSet barely;
  barely.particles = {-36.0};  // two lengthscales out: small but positive POD
  barely.weights = {1.0};

  const DecisionResult from_sleep = decide(barely, model, PlatformState{0},
                                           energy, params, frozen_filter(), kTrf, rng);
  CHECK(from_sleep.u_star == 1);
  const DecisionResult from_active = decide(barely, model, PlatformState{1},
                                            energy, params, frozen_filter(), kTrf, rng);
  CHECK(from_active.u_star == 0);
}

TEST_CASE("wake-from-sleep threshold matches the closed-form characterization") {
  // GP transitioning from POD 0 to POD 1 as the particle moves right
  std::vector<double> xs, ys, noise;
  for (int i = 0; i < 8; ++i) {
    xs.push_back(-58.0 + 2.0 * i);
    ys.push_back(0.0);
    noise.push_back(1e-8);
  }
  for (int i = 0; i < 8; ++i) {
    xs.push_back(-32.0 + 2.0 * i);
    ys.push_back(1.0);
    noise.push_back(1e-8);
  }
  const GprModel model(xs, ys, noise, KernelParams{2.5, 4.0, 1.0});
  const EnergyModelParams energy;
  const ControllerParams params = table_controller();
  const double threshold = 1.0 - (energy.p_sleep * kTrf) / params.e_max;
  CHECK(threshold == Catch::Approx(0.995037).margin(1e-6));

  Rng rng(9);
  double last_jd = -1.0;
  bool saw_stay = false, saw_wake = false;
  for (double r = -58.0; r <= -18.0; r += 0.01) {
    const ParticleSet set = single_particle(r);
    const double jd = detection_term(set, model, params, frozen_filter(), rng);
    const DecisionResult d = decide(set, model, PlatformState{0}, energy,
                                    params, frozen_filter(), kTrf, rng);
    if (jd != threshold) CHECK((d.u_star == 1) == (jd > threshold));
    saw_stay |= d.u_star == 0;
    saw_wake |= d.u_star == 1;
    last_jd = std::max(last_jd, jd);
  }
  CHECK(saw_stay);   // the sweep crosses the threshold from below...
  CHECK(saw_wake);   // ...and ends above it
  CHECK(last_jd > threshold);
}

TEST_CASE("decisions are invariant to a common power rescaling") {
  const GprModel model = pinned_model();
  const ControllerParams params = table_controller();
  EnergyModelParams scaled;
  scaled.p_active *= 7.0;
  scaled.p_detector *= 7.0;
  scaled.p_sleep *= 7.0;
  scaled.p_trans *= 7.0;
  const ControllerParams params_scaled =
      ControllerParams::make(1.0, TimeBase::from_rf_period(kTrf, 10, 500), scaled);

  Rng pos_rng(11);
  std::uniform_real_distribution<double> upos(-60.0, -20.0);
  for (int rep = 0; rep < 40; ++rep) {
    const ParticleSet set = single_particle(upos(pos_rng));
    for (int mode : {0, 1}) {
      Rng rng_a(100 + rep), rng_b(100 + rep);  // identical look-ahead streams
      const DecisionResult a = decide(set, model, PlatformState{mode},
                                      EnergyModelParams{}, params,
                                      frozen_filter(), kTrf, rng_a);
      const DecisionResult b = decide(set, model, PlatformState{mode}, scaled,
                                      params_scaled, frozen_filter(), kTrf, rng_b);
      CHECK(a.u_star == b.u_star);
    }
  }
}

TEST_CASE("decide only returns admissible inputs") {
  const GprModel model = pinned_model();
  const EnergyModelParams energy;
  const ControllerParams params = table_controller();
  Rng rng(13);
  std::uniform_real_distribution<double> upos(-80.0, 0.0);
  FilterProcessParams drift;
  drift.guessed_noise_std = 1.0;
  for (int rep = 0; rep < 60; ++rep) {
    const PlatformState s{rep % 2};
    const DecisionResult d = decide(single_particle(upos(rng)), model, s,
                                    energy, params, drift, kTrf, rng);
    CHECK(is_admissible(s, d.u_star));
  }
}

TEST_CASE("look-ahead does not mutate the live particle set") {
  const GprModel model = pinned_model();
  const ControllerParams params = table_controller();
  Rng rng(17);
  ParticleSet set = init_particles(32, -35.0, 3.0, {-70.0, -10.0}, rng);
  const ParticleSet before = set;
  FilterProcessParams drift;
  drift.guessed_noise_std = 2.0;
  detection_term(set, model, params, drift, rng);
  CHECK(set.particles == before.particles);
  CHECK(set.weights == before.weights);
}

TEST_CASE("ground-truth detection term saturates like the belief version") {
  const PodCurve pod = PodCurve::logistic(5.0, 3.5);
  ProcessModelParams still;
  still.noise_std = 0.0;
  const ControllerParams params = table_controller();
  Rng rng(19);
  CHECK(detection_term_truth(0.5, pod, still, params, 100, rng) ==
        Catch::Approx(1.0).margin(1e-3));
  CHECK(detection_term_truth(20.0, pod, still, params, 100, rng) ==
        Catch::Approx(0.0).margin(1e-9));
  CHECK_THROWS_AS(detection_term_truth(2.0, pod, still, params, 0, rng),
                  std::invalid_argument);
}
