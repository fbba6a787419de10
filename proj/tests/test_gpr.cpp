#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfwake/gpr.hpp"
#include "rfwake/rng.hpp"
#include "rfwake/world.hpp"

using namespace rfwake;

namespace {

// Brute-force GP oracle: plain Gauss-Jordan inversion of K + diag(noise), no
// shared code with the implementation under test.
struct DenseOracle {
  std::vector<double> xs, ys, noise;
  KernelParams kernel;
  std::vector<std::vector<double>> k_inv;

  void build() {
    const int n = static_cast<int>(xs.size());
    std::vector<std::vector<double>> a(n, std::vector<double>(2 * n, 0.0));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        a[i][j] = kernel(std::abs(xs[i] - xs[j])) + (i == j ? noise[i] : 0.0);
      a[i][n + i] = 1.0;
    }
    for (int col = 0; col < n; ++col) {
      int pivot = col;
      for (int row = col + 1; row < n; ++row)
        if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
      std::swap(a[col], a[pivot]);
      const double div = a[col][col];
      for (int j = 0; j < 2 * n; ++j) a[col][j] /= div;
      for (int row = 0; row < n; ++row) {
        if (row == col) continue;
        const double f = a[row][col];
        for (int j = 0; j < 2 * n; ++j) a[row][j] -= f * a[col][j];
      }
    }
    k_inv.assign(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k_inv[i][j] = a[i][n + j];
  }

  double mean(double r) const {
    const int n = static_cast<int>(xs.size());
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
      double w = 0.0;
      for (int j = 0; j < n; ++j)
        w += kernel(std::abs(r - xs[i])) * k_inv[i][j] * ys[j];
      m += w;
    }
    return m;
  }

  double variance(double r) const {
    const int n = static_cast<int>(xs.size());
    double q = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        q += kernel(std::abs(r - xs[i])) * k_inv[i][j] * kernel(std::abs(r - xs[j]));
    return kernel(0.0) - q;
  }

  double lml() const {
    const int n = static_cast<int>(xs.size());
    // data term via the inverse; log-determinant via Gaussian elimination
    double data = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) data += ys[i] * k_inv[i][j] * ys[j];

    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        a[i][j] = kernel(std::abs(xs[i] - xs[j])) + (i == j ? noise[i] : 0.0);
    double log_det = 0.0;
    for (int col = 0; col < n; ++col) {
      log_det += std::log(a[col][col]);
      for (int row = col + 1; row < n; ++row) {
        const double f = a[row][col] / a[col][col];
        for (int j = col; j < n; ++j) a[row][j] -= f * a[col][j];
      }
    }
    return -0.5 * data - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
  }
};

TrainingDataset make_dataset(const std::vector<double>& xs,
                             const std::vector<double>& ys,
                             const std::vector<double>& noise) {
  TrainingDataset ds;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    TrainingPair p;
    p.timestamp = 0.1 * (i + 1);
    p.rssi = xs[i];
    p.label = ys[i];
    p.nu = 10;
    p.noise_var = noise[i];
    ds.pairs.push_back(p);
  }
  return ds;
}

}  // namespace

TEST_CASE("posterior matches the dense brute-force oracle on small datasets") {
  Rng rng(101);
  std::uniform_real_distribution<double> ux(-55.0, -25.0);
  std::uniform_real_distribution<double> uy(0.0, 1.0);
  std::uniform_real_distribution<double> un(1e-4, 0.05);

  for (int n : {2, 3, 4, 5}) {
    for (int rep = 0; rep < 4; ++rep) {
      std::vector<double> xs, ys, noise;
      for (int i = 0; i < n; ++i) {
        xs.push_back(ux(rng));
        ys.push_back(uy(rng));
        noise.push_back(un(rng));
      }
      const KernelParams kernel{2.5, 6.0, 0.8};
      const GprModel model(xs, ys, noise, kernel);
      DenseOracle oracle{xs, ys, noise, kernel, {}};
      oracle.build();

      CHECK(model.log_marginal_likelihood() ==
            Catch::Approx(oracle.lml()).epsilon(1e-8));
      for (double r : {-60.0, -45.0, -33.3, -20.0}) {
        const PodPrediction p = model.predict(r);
        CHECK(p.mean == Catch::Approx(oracle.mean(r)).margin(1e-8));
        CHECK(p.variance == Catch::Approx(oracle.variance(r)).margin(1e-8));
      }
    }
  }
}

TEST_CASE("two-point fit interpolates within the noise band") {
  const TrainingDataset ds = make_dataset({-45.0, -35.0}, {0.2, 0.9}, {1e-4, 1e-4});
  const GprModel model = fit(ds, KernelParams{2.5, 5.0, 1.0});
  for (int i = 0; i < 2; ++i) {
    const PodPrediction p = model.predict(ds.pairs[i].rssi);
    CHECK(std::abs(p.mean - ds.pairs[i].label) <= 2.0 * std::sqrt(1e-4));
  }
}

TEST_CASE("noiseless logistic-through-path-loss recovery") {
  const PathLossParams plm;
  const PodCurve pod = PodCurve::logistic(5.0, 3.5);
  std::vector<double> xs, ys, noise;
  for (int i = 0; i < 200; ++i) {
    const double r = -55.0 + 30.0 * i / 199.0;
    xs.push_back(r);
    ys.push_back(pod(rssi_to_distance(r, plm)));
    noise.push_back(1e-4);
  }
  const GprModel model = fit(make_dataset(xs, ys, noise), KernelParams{2.5, 5.0, 1.0});

  double se = 0.0;
  const int grid = 157;  // offset grid, held out from the training inputs
  for (int i = 0; i < grid; ++i) {
    const double r = -54.8 + 29.5 * i / (grid - 1);
    const double err = model.predict(r).mean - pod(rssi_to_distance(r, plm));
    se += err * err;
  }
  CHECK(std::sqrt(se / grid) <= 0.05);
}

TEST_CASE("constant labels are recovered across the input hull") {
  std::vector<double> xs, ys, noise;
  for (int i = 0; i < 30; ++i) {
    xs.push_back(-50.0 + i);
    ys.push_back(1.0);
    noise.push_back(1e-4);
  }
  const GprModel model = fit(make_dataset(xs, ys, noise), KernelParams{2.5, 5.0, 1.0});
  for (double r = -50.0; r <= -21.0; r += 0.5) {
    const double m = model.predict(r).mean;
    CHECK(m >= 0.99);
    CHECK(m <= 1.01);
  }
}

TEST_CASE("prediction at a pinned training input honors the label") {
  const TrainingDataset ds =
      make_dataset({-48.0, -40.0, -32.0}, {0.1, 0.6, 0.95}, {1e-6, 1e-6, 1e-6});
  const GprModel model = fit(ds, KernelParams{2.5, 5.0, 1.0});
  for (const auto& p : ds.pairs)
    CHECK(std::abs(model.predict(p.rssi).mean - p.label) <= 3.0 * std::sqrt(1e-6));
}

TEST_CASE("far outside the hull the prior takes over") {
  const GprModel model(std::vector<double>{-45.0, -40.0, -35.0},
                       std::vector<double>{0.3, 0.5, 0.8},
                       std::vector<double>{1e-3, 1e-3, 1e-3},
                       KernelParams{2.5, 2.0, 0.7});
  const PodPrediction far = model.predict(-40.0 + 200.0);  // 100 lengthscales out
  CHECK(std::abs(far.mean) < 1e-6);
  CHECK(far.variance == Catch::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("batch prediction equals pointwise prediction") {
  const GprModel model(std::vector<double>{-45.0, -40.0, -35.0},
                       std::vector<double>{0.3, 0.5, 0.8},
                       std::vector<double>{1e-3, 1e-3, 1e-3},
                       KernelParams{2.5, 4.0, 1.0});
  const std::vector<double> grid{-50.0, -42.0, -37.5, -30.0};
  const auto batch = model.predict_batch(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PodPrediction p = model.predict(grid[i]);
    CHECK(batch[i].mean == p.mean);
    CHECK(batch[i].variance == p.variance);
    CHECK(model.predict_mean_clamped(grid[i]) ==
          Catch::Approx(p.mean_clamped).margin(1e-12));
  }
}

TEST_CASE("posterior variance never exceeds the prior variance") {
  Rng rng(55);
  std::uniform_real_distribution<double> ux(-60.0, -20.0);
  std::uniform_real_distribution<double> uy(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> xs, ys, noise;
    for (int i = 0; i < 8; ++i) {
      xs.push_back(ux(rng));
      ys.push_back(uy(rng));
      noise.push_back(0.01);
    }
    const GprModel model(xs, ys, noise, KernelParams{2.5, 5.0, 1.3});
    for (int q = 0; q < 20; ++q)
      CHECK(model.predict(ux(rng)).variance <= 1.3 + 1e-12);
  }
}

TEST_CASE("adding a training point never increases posterior variance") {
  Rng rng(77);
  std::uniform_real_distribution<double> ux(-55.0, -25.0);
  std::uniform_real_distribution<double> uy(0.0, 1.0);
  const KernelParams kernel{2.5, 6.0, 1.0};
  for (int rep = 0; rep < 8; ++rep) {
    std::vector<double> xs, ys, noise;
    for (int i = 0; i < 5; ++i) {
      xs.push_back(ux(rng));
      ys.push_back(uy(rng));
      noise.push_back(0.02);
    }
    const GprModel small(xs, ys, noise, kernel);
    xs.push_back(ux(rng));
    ys.push_back(uy(rng));
    noise.push_back(0.02);
    const GprModel larger(xs, ys, noise, kernel);
    for (int q = 0; q < 25; ++q) {
      const double r = ux(rng);
      CHECK(larger.predict(r).variance <= small.predict(r).variance + 1e-10);
    }
  }
}

TEST_CASE("prediction is bit-for-bit deterministic") {
  const TrainingDataset ds =
      make_dataset({-48.0, -41.0, -36.0, -30.0}, {0.1, 0.4, 0.7, 0.95},
                   {1e-3, 2e-3, 1e-3, 5e-4});
  const GprModel a = fit(ds, KernelParams{2.5, 5.0, 1.0});
  const GprModel b = fit(ds, KernelParams{2.5, 5.0, 1.0});
  for (double r = -55.0; r <= -25.0; r += 0.37) {
    const PodPrediction pa = a.predict(r), pb = b.predict(r);
    CHECK(pa.mean == pb.mean);
    CHECK(pa.variance == pb.variance);
  }
}

TEST_CASE("fit rejects degenerate datasets") {
  CHECK_THROWS_AS(fit(make_dataset({-40.0}, {0.5}, {1e-3}), KernelParams{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      fit(make_dataset({-40.0, -40.0, -40.0}, {0.1, 0.5, 0.9}, {1e-3, 1e-3, 1e-3}),
          KernelParams{}),
      std::invalid_argument);
}

TEST_CASE("model JSON round-trips with identical predictions and bytes") {
  const TrainingDataset ds =
      make_dataset({-48.0, -41.0, -36.0}, {0.15, 0.55, 0.9}, {1e-3, 1e-3, 1e-3});
  const GprModel model = fit(ds, KernelParams{2.5, 5.0, 1.0});
  const std::string doc = model.to_json().dump(2);
  const GprModel back = GprModel::from_json(nlohmann::json::parse(doc));
  CHECK(back.to_json().dump(2) == doc);
  for (double r = -50.0; r <= -30.0; r += 0.71) {
    CHECK(back.predict(r).mean == model.predict(r).mean);
    CHECK(back.predict(r).variance == model.predict(r).variance);
  }
  CHECK_THROWS_AS(GprModel::from_json(nlohmann::json::parse("{\"x\":1}")),
                  std::runtime_error);
}

TEST_CASE("clamped mean stays inside the unit interval") {
  const GprModel model(std::vector<double>{-45.0, -35.0},
                       std::vector<double>{0.0, 1.0},
                       std::vector<double>{1e-4, 1e-4}, KernelParams{2.5, 2.0, 2.0});
  for (double r = -80.0; r <= 0.0; r += 0.5) {
    const PodPrediction p = model.predict(r);
    CHECK(p.mean_clamped >= 0.0);
    CHECK(p.mean_clamped <= 1.0);
    CHECK(p.mean_clamped == Catch::Approx(std::clamp(p.mean, 0.0, 1.0)));
  }
}
