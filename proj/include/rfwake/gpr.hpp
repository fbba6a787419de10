#pragma once

// Gaussian Process Regression of the probability of detection as a function
// of RSSI, with a fixed per-point (heteroscedastic) noise variance coming
// from the CLT model of the empirical-POD labels.
//
// Zero prior mean, Matern covariance. Hyperparameters maximize the log
// marginal likelihood via Nelder-Mead in log-space with random restarts.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfwake/rng.hpp"
#include "rfwake/selftrain.hpp"

namespace rfwake {

struct KernelParams {
  double smoothness = 2.5;   // Matern order: 0.5, 1.5 or 2.5
  double lengthscale = 5.0;  // [dB]
  double signal_var = 1.0;

  void validate() const {
    if (smoothness != 0.5 && smoothness != 1.5 && smoothness != 2.5)
      throw std::invalid_argument("KernelParams: smoothness must be 0.5, 1.5 or 2.5");
    if (!(lengthscale > 0)) throw std::invalid_argument("KernelParams: lengthscale must be > 0");
    if (!(signal_var > 0)) throw std::invalid_argument("KernelParams: signal_var must be > 0");
  }

  double operator()(double h) const {  // h = |r - r'|
    const double a = h / lengthscale;
    if (smoothness == 0.5) return signal_var * std::exp(-a);
    if (smoothness == 1.5) {
      const double b = std::sqrt(3.0) * a;
      return signal_var * (1.0 + b) * std::exp(-b);
    }
    const double b = std::sqrt(5.0) * a;
    return signal_var * (1.0 + b + b * b / 3.0) * std::exp(-b);
  }
};

struct PodPrediction {
  double mean = 0.0;
  double variance = 0.0;
  double mean_clamped = 0.0;  // mean restricted to [0,1] for the controller
};

struct GprFitConfig {
  int restarts = 5;                 // random restarts on top of the init point
  int max_evals_per_start = 60;
  double lengthscale_min = 0.5;     // [dB]
  double lengthscale_max = 50.0;
  double signal_var_min = 1e-3;
  double signal_var_max = 4.0;
  std::uint64_t seed = 0;           // restart-point stream
  int threads = 0;                  // 0 = hardware concurrency
};

class GprModel {
 public:
  GprModel() = default;

  // Builds the model for fixed hyperparameters (no fitting).
  GprModel(std::vector<double> inputs, std::vector<double> labels,
           std::vector<double> noise_vars, KernelParams kernel) {
    if (inputs.size() != labels.size() || inputs.size() != noise_vars.size())
      throw std::invalid_argument("GprModel: mismatched array lengths");
    if (inputs.size() < 1) throw std::invalid_argument("GprModel: empty dataset");
    for (double v : noise_vars)
      if (!(v > 0)) throw std::invalid_argument("GprModel: noise variances must be > 0");
    kernel.validate();
    inputs_ = std::move(inputs);
    labels_ = std::move(labels);
    noise_vars_ = std::move(noise_vars);
    kernel_ = kernel;
    factorize();
  }

  const std::vector<double>& inputs() const { return inputs_; }
  const std::vector<double>& labels() const { return labels_; }
  const std::vector<double>& noise_vars() const { return noise_vars_; }
  const KernelParams& kernel() const { return kernel_; }
  double log_marginal_likelihood() const { return lml_; }
  int size() const { return static_cast<int>(inputs_.size()); }

  PodPrediction predict(double r) const {
    const int n = size();
    Eigen::VectorXd k_star(n);
    for (int i = 0; i < n; ++i) k_star(i) = kernel_(std::abs(r - inputs_[i]));
    PodPrediction out;
    out.mean = k_star.dot(alpha_);
    const Eigen::VectorXd v = chol_.matrixL().solve(k_star);
    out.variance = std::max(kernel_.signal_var - v.squaredNorm(), 0.0);
    out.mean_clamped = std::clamp(out.mean, 0.0, 1.0);
    return out;
  }

  std::vector<PodPrediction> predict_batch(const std::vector<double>& rs) const {
    std::vector<PodPrediction> out;
    out.reserve(rs.size());
    for (double r : rs) out.push_back(predict(r));
    return out;
  }

  // Mean-only fast path used inside the controller loop; O(n) per query.
  double predict_mean_clamped(double r) const {
    double m = 0.0;
    for (int i = 0; i < size(); ++i)
      m += kernel_(std::abs(r - inputs_[i])) * alpha_(i);
    return std::clamp(m, 0.0, 1.0);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "rfwake-gpr-model";
    j["version"] = 1;
    j["kernel"] = {{"family", "matern"},
                   {"smoothness", kernel_.smoothness},
                   {"lengthscale", kernel_.lengthscale},
                   {"signal_var", kernel_.signal_var}};
    j["log_marginal_likelihood"] = lml_;
    j["inputs"] = inputs_;
    j["labels"] = labels_;
    j["noise_vars"] = noise_vars_;
    return j;
  }

  static GprModel from_json(const nlohmann::json& j) {
    if (!j.contains("format") || j.at("format") != "rfwake-gpr-model")
      throw std::runtime_error("GprModel::from_json: not a model document");
    KernelParams k;
    k.smoothness = j.at("kernel").at("smoothness").get<double>();
    k.lengthscale = j.at("kernel").at("lengthscale").get<double>();
    k.signal_var = j.at("kernel").at("signal_var").get<double>();
    return GprModel(j.at("inputs").get<std::vector<double>>(),
                    j.at("labels").get<std::vector<double>>(),
                    j.at("noise_vars").get<std::vector<double>>(), k);
  }

 private:
  void factorize() {
    const int n = size();
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = kernel_(std::abs(inputs_[i] - inputs_[j]));
        K(i, j) = v;
        K(j, i) = v;
      }
    for (int i = 0; i < n; ++i) K(i, i) += noise_vars_[i];

    // jitter escalation on factorization failure
    double jitter = 0.0;
    for (int attempt = 0;; ++attempt) {
      Eigen::MatrixXd Kj = K;
      if (jitter > 0) Kj.diagonal().array() += jitter;
      chol_.compute(Kj);
      if (chol_.info() == Eigen::Success) break;
      if (attempt == 0) jitter = 1e-10;
      else jitter *= 100.0;
      if (jitter > 1e-6)
        throw std::runtime_error("GprModel: gram matrix not positive definite");
    }

    Eigen::Map<const Eigen::VectorXd> y(labels_.data(), n);
    alpha_ = chol_.solve(y);
    double log_det = 0.0;
    for (int i = 0; i < n; ++i) log_det += std::log(chol_.matrixLLT()(i, i));
    lml_ = -0.5 * y.dot(alpha_) - log_det -
           0.5 * n * std::log(2.0 * std::numbers::pi);
  }

  std::vector<double> inputs_;
  std::vector<double> labels_;
  std::vector<double> noise_vars_;
  KernelParams kernel_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
};

namespace gpr_detail {

// Log marginal likelihood for one hyperparameter pair, reusing a precomputed
// distance matrix. Returns -inf when the factorization fails even with jitter.
inline double lml_for(const Eigen::MatrixXd& dist,
                      Eigen::Ref<const Eigen::VectorXd> y,
                      Eigen::Ref<const Eigen::VectorXd> noise, double smoothness,
                      double lengthscale, double signal_var) {
  const int n = static_cast<int>(y.size());
  KernelParams k{smoothness, lengthscale, signal_var};
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      const double v = k(dist(i, j));
      K(i, j) = v;
      K(j, i) = v;
    }
    K(i, i) = signal_var + noise(i);
  }
  Eigen::LLT<Eigen::MatrixXd> chol;
  double jitter = 0.0;
  for (int attempt = 0;; ++attempt) {
    Eigen::MatrixXd Kj = K;
    if (jitter > 0) Kj.diagonal().array() += jitter;
    chol.compute(Kj);
    if (chol.info() == Eigen::Success) break;
    if (attempt == 0) jitter = 1e-10;
    else jitter *= 100.0;
    if (jitter > 1e-6) return -std::numeric_limits<double>::infinity();
  }
  const Eigen::VectorXd alpha = chol.solve(y);
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += std::log(chol.matrixLLT()(i, i));
  return -0.5 * y.dot(alpha) - log_det -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

struct NmResult {
  double x0 = 0.0, x1 = 0.0;  // log lengthscale, log signal_var
  double value = -std::numeric_limits<double>::infinity();
};

// 2-D Nelder-Mead maximization with box projection, deterministic.
template <typename F>
NmResult nelder_mead_2d(F&& f, double x0, double x1, const double lo[2],
                        const double hi[2], int max_evals) {
  auto clampv = [&](std::array<double, 2> p) {
    p[0] = std::clamp(p[0], lo[0], hi[0]);
    p[1] = std::clamp(p[1], lo[1], hi[1]);
    return p;
  };
  struct Vertex {
    std::array<double, 2> x;
    double v;
  };
  int evals = 0;
  auto eval = [&](std::array<double, 2> p) {
    ++evals;
    return f(p[0], p[1]);
  };

  std::array<Vertex, 3> s;
  s[0].x = clampv({x0, x1});
  s[1].x = clampv({x0 + 0.4, x1});
  s[2].x = clampv({x0, x1 + 0.4});
  for (auto& v : s) v.v = eval(v.x);

  while (evals < max_evals) {
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) {
      return a.v > b.v;  // best first (maximizing)
    });
    if (std::abs(s[0].v - s[2].v) < 1e-7 * (1.0 + std::abs(s[0].v))) break;

    const std::array<double, 2> c = {0.5 * (s[0].x[0] + s[1].x[0]),
                                     0.5 * (s[0].x[1] + s[1].x[1])};
    auto refl = clampv({c[0] + (c[0] - s[2].x[0]), c[1] + (c[1] - s[2].x[1])});
    const double fr = eval(refl);
    if (fr > s[0].v) {
      auto ex = clampv({c[0] + 2.0 * (c[0] - s[2].x[0]), c[1] + 2.0 * (c[1] - s[2].x[1])});
      const double fe = eval(ex);
      s[2] = fe > fr ? Vertex{ex, fe} : Vertex{refl, fr};
    } else if (fr > s[1].v) {
      s[2] = Vertex{refl, fr};
    } else {
      auto con = clampv({c[0] + 0.5 * (s[2].x[0] - c[0]), c[1] + 0.5 * (s[2].x[1] - c[1])});
      const double fc = eval(con);
      if (fc > s[2].v) {
        s[2] = Vertex{con, fc};
      } else {  // shrink toward the best vertex
        for (int i = 1; i < 3; ++i) {
          s[i].x = clampv({0.5 * (s[0].x[0] + s[i].x[0]), 0.5 * (s[0].x[1] + s[i].x[1])});
          s[i].v = eval(s[i].x);
        }
      }
    }
  }
  std::sort(s.begin(), s.end(),
            [](const Vertex& a, const Vertex& b) { return a.v > b.v; });
  return NmResult{s[0].x[0], s[0].x[1], s[0].v};
}

}  // namespace gpr_detail

// Fits kernel hyperparameters by maximizing the log marginal likelihood.
// Start 0 is the caller's init; the rest are drawn uniformly in the log box
// from a dedicated restart stream. Starts run independently (parallel when
// cores allow) and the best final value wins, ties resolved by start index,
// so the result does not depend on scheduling.
inline GprModel fit(const TrainingDataset& dataset, KernelParams init,
                    const GprFitConfig& cfg = {}) {
  const int n = dataset.n_train();
  if (n < 2) throw std::invalid_argument("gpr::fit: need at least 2 training pairs");
  init.validate();

  std::vector<double> inputs, labels, noise_vars;
  inputs.reserve(n);
  labels.reserve(n);
  noise_vars.reserve(n);
  for (const auto& p : dataset.pairs) {
    inputs.push_back(p.rssi);
    labels.push_back(p.label);
    noise_vars.push_back(p.noise_var);
  }
  const auto [mn, mx] = std::minmax_element(inputs.begin(), inputs.end());
  if (*mx - *mn <= 0.0)
    throw std::invalid_argument("gpr::fit: degenerate dataset (all inputs identical)");

  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dist(i, j) = std::abs(inputs[i] - inputs[j]);
  Eigen::Map<const Eigen::VectorXd> y(labels.data(), n);
  Eigen::Map<const Eigen::VectorXd> noise(noise_vars.data(), n);

  const double lo[2] = {std::log(cfg.lengthscale_min), std::log(cfg.signal_var_min)};
  const double hi[2] = {std::log(cfg.lengthscale_max), std::log(cfg.signal_var_max)};
  auto objective = [&](double log_l, double log_sv) {
    return gpr_detail::lml_for(dist, y, noise, init.smoothness,
                               std::exp(log_l), std::exp(log_sv));
  };

  const int n_starts = 1 + std::max(cfg.restarts, 0);
  std::vector<std::array<double, 2>> start_points(n_starts);
  start_points[0] = {std::clamp(std::log(init.lengthscale), lo[0], hi[0]),
                     std::clamp(std::log(init.signal_var), lo[1], hi[1])};
  {
    Rng restart_rng = make_stream(cfg.seed, 0, Stream::kGprRestarts);
    std::uniform_real_distribution<double> u0(lo[0], hi[0]), u1(lo[1], hi[1]);
    for (int i = 1; i < n_starts; ++i) start_points[i] = {u0(restart_rng), u1(restart_rng)};
  }

  std::vector<gpr_detail::NmResult> results(n_starts);
  auto run_start = [&](int i) {
    results[i] = gpr_detail::nelder_mead_2d(objective, start_points[i][0],
                                            start_points[i][1], lo, hi,
                                            cfg.max_evals_per_start);
  };
  unsigned n_threads = cfg.threads > 0 ? cfg.threads : std::thread::hardware_concurrency();
  if (n_threads <= 1 || n_starts == 1) {
    for (int i = 0; i < n_starts; ++i) run_start(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const unsigned workers = std::min<unsigned>(n_threads, n_starts);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n_starts; i = next.fetch_add(1)) run_start(i);
      });
    for (auto& t : pool) t.join();
  }

  int best = 0;
  for (int i = 1; i < n_starts; ++i)
    if (results[i].value > results[best].value) best = i;
  if (!std::isfinite(results[best].value))
    throw std::runtime_error("gpr::fit: no positive-definite hyperparameter point found");

  KernelParams fitted{init.smoothness, std::exp(results[best].x0),
                      std::exp(results[best].x1)};
  return GprModel(std::move(inputs), std::move(labels), std::move(noise_vars), fitted);
}

}  // namespace rfwake
