#include <catch_amalgamated.hpp>

#include <cmath>

#include "rfwake/rng.hpp"
#include "rfwake/selftrain.hpp"

using namespace rfwake;

TEST_CASE("empirical POD is the window mean") {
  CHECK(empirical_pod({1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, 10) == Catch::Approx(1.0));
  CHECK(empirical_pod({0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, 10) == Catch::Approx(0.0));
  CHECK(empirical_pod({1, 0, 1, 0, 1, 0, 1, 0, 1, 0}, 10) == Catch::Approx(0.5));
  CHECK_THROWS_AS(empirical_pod({1, 0}, 3), std::invalid_argument);
  CHECK_THROWS_AS(empirical_pod({}, 0), std::invalid_argument);
}

TEST_CASE("label noise variance is the floored CLT plug-in") {
  CHECK(label_noise_variance(0.5, 10, 1e-4) == Catch::Approx(0.025));
  CHECK(label_noise_variance(1.0, 10, 1e-4) == Catch::Approx(1e-4));
  CHECK(label_noise_variance(0.0, 10, 1e-4) == Catch::Approx(1e-4));
  CHECK(label_noise_variance(0.3, 10, 1e-4) == Catch::Approx(0.021));
  CHECK_THROWS_AS(label_noise_variance(0.5, 0), std::invalid_argument);
}

namespace {

TrainingDataset collect(int n_train, const ProcessModelParams& process,
                        const PathLossParams& path_loss, const PodCurve& pod,
                        int seed) {
  const TimeBase time = TimeBase::from_rf_period(0.1, 10, n_train);
  Rng traj(seed), det(seed + 1), rssi(seed + 2);
  return collect_dataset(process, path_loss, pod, time,
                         SelfTrainParams{n_train, 1e-4}, traj, det, rssi);
}

}  // namespace

TEST_CASE("collection produces one pair per RSSI interval") {
  const TrainingDataset ds =
      collect(900, ProcessModelParams{}, PathLossParams{}, PodCurve::logistic(5, 3.5), 7);
  REQUIRE(ds.n_train() == 900);
  CHECK(ds.pairs.back().timestamp == Catch::Approx(90.0));

  // timestamps strictly increasing, labels on the 1/nu grid
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    if (i > 0) CHECK(ds.pairs[i].timestamp > ds.pairs[i - 1].timestamp);
    const double scaled = ds.pairs[i].label * 10.0;
    CHECK(scaled == Catch::Approx(std::round(scaled)).margin(1e-12));
  }
}

TEST_CASE("deterministic world yields constant pairs") {
  ProcessModelParams process;
  process.noise_std = 0.0;
  process.d0_min = process.d0_max = 2.0;
  PathLossParams path_loss;
  path_loss.sigma_rf = 0.0;
  // tabulated flat curve: detection certain everywhere the target can be
  const PodCurve sure = PodCurve::tabulated({{0.1, 1.0}, {100.0, 1.0}});

  const TrainingDataset ds = collect(25, process, path_loss, sure, 11);
  for (const auto& p : ds.pairs) {
    CHECK(p.rssi == Catch::Approx(rssi_true(2.0, path_loss)));
    CHECK(p.label == Catch::Approx(1.0));
  }
}

TEST_CASE("single window run and the n_train precondition") {
  const TrainingDataset ds =
      collect(1, ProcessModelParams{}, PathLossParams{}, PodCurve::logistic(5, 3.5), 13);
  CHECK(ds.n_train() == 1);

  const TimeBase time = TimeBase::from_rf_period(0.1, 10, 10);
  Rng a(1), b(2), c(3);
  CHECK_THROWS_AS(collect_dataset(ProcessModelParams{}, PathLossParams{},
                                  PodCurve::logistic(5, 3.5), time,
                                  SelfTrainParams{0, 1e-4}, a, b, c),
                  std::invalid_argument);
}

TEST_CASE("labels of a frozen target match the CLT moments") {
  PathLossParams path_loss;
  path_loss.sigma_rf = 0.0;
  const PodCurve curve = PodCurve::logistic(5.0, 3.5);
  const int nu = 10;

  for (double d : {3.0, 3.5, 4.0}) {
    ProcessModelParams process;
    process.noise_std = 0.0;
    process.d0_min = process.d0_max = d;
    const int windows = 4000;
    const TrainingDataset ds = collect(windows, process, path_loss, curve,
                                       static_cast<int>(d * 100));

    double mean = 0.0, var = 0.0;
    for (const auto& p : ds.pairs) mean += p.label;
    mean /= windows;
    for (const auto& p : ds.pairs) var += (p.label - mean) * (p.label - mean);
    var /= windows - 1;

    const double p_d = curve(d);
    const double clt_var = p_d * (1 - p_d) / nu;
    CHECK(std::abs(mean - p_d) <= 5.0 * std::sqrt(clt_var / windows));
    CHECK(var >= 0.75 * clt_var);
    CHECK(var <= 1.30 * clt_var);
  }
}

TEST_CASE("dataset CSV round-trips") {
  const TrainingDataset ds =
      collect(40, ProcessModelParams{}, PathLossParams{}, PodCurve::logistic(5, 3.5), 17);
  const std::string csv = dataset_to_csv(ds);
  const TrainingDataset back = dataset_from_csv(csv);
  REQUIRE(back.n_train() == ds.n_train());
  for (int i = 0; i < ds.n_train(); ++i) {
    CHECK(back.pairs[i].timestamp == ds.pairs[i].timestamp);
    CHECK(back.pairs[i].rssi == ds.pairs[i].rssi);
    CHECK(back.pairs[i].label == ds.pairs[i].label);
    CHECK(back.pairs[i].nu == ds.pairs[i].nu);
    CHECK(back.pairs[i].noise_var == ds.pairs[i].noise_var);
  }
  CHECK(dataset_to_csv(back) == csv);
  CHECK_THROWS_AS(dataset_from_csv("not,a,header\n"), std::runtime_error);
}
