#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qphase/parallel.hpp"
#include "qphase/rng.hpp"
#include "qphase/statevector.hpp"

namespace qphase {

// Variational classifier: feature map, trainable ansatz, and a measurement
// readout that folds basis-state indices onto classes by modulo.
struct VqcModel {
  FeatureMapSpec feature_map;
  AnsatzSpec ansatz;
  Eigen::VectorXd theta;
  int class_count = 0;
  int shots = 600;   // <= 0 reads exact Born probabilities instead of sampling
  uint64_t seed = 0; // base seed for prediction-time sampling
};

namespace detail {
constexpr uint64_t kThetaInitTag = 0x7e7a0111ULL;
constexpr uint64_t kTrainLossTag = 0x105570a9ULL;
constexpr uint64_t kPredictTag = 0x9ed1c7ULL;
}  // namespace detail

inline int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// Class probabilities for one scaled row: run the circuit, then pool basis
// indices by index mod class_count — sampled with `shots` measurements, or
// exactly from the state when the model's shot count is nonpositive.
inline Eigen::VectorXd vqc_forward(const Eigen::VectorXd& x, const VqcModel& model, uint64_t seed) {
  if (model.class_count < 2) throw std::invalid_argument("vqc_forward: need at least two classes");
  if (x.size() != model.feature_map.n_qubits) {
    throw std::invalid_argument("vqc_forward: feature count must match the feature map");
  }
  const Statevector state =
      apply_ansatz(zfeature_map(x, model.feature_map), model.theta, model.ansatz);
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(model.class_count);
  if (model.shots <= 0) {
    const std::vector<double> p = born_probabilities(state);
    for (std::size_t i = 0; i < p.size(); ++i) {
      probs[static_cast<int>(i % static_cast<std::size_t>(model.class_count))] += p[i];
    }
  } else {
    const std::vector<long> counts = sample_index_counts(state, model.shots, seed);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      probs[static_cast<int>(i % static_cast<std::size_t>(model.class_count))] +=
          static_cast<double>(counts[i]);
    }
    probs /= static_cast<double>(model.shots);
  }
  return probs;
}

// Mean negative log-likelihood with the probability floored at 1e-10.
inline double ce_from_probabilities(const Eigen::MatrixXd& probs, const std::vector<int>& y) {
  const Eigen::Index rows = probs.rows();
  if (rows < 1 || static_cast<Eigen::Index>(y.size()) != rows) {
    throw std::invalid_argument("ce_from_probabilities: batch shape mismatch");
  }
  double loss = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int cls = y[static_cast<std::size_t>(r)];
    if (cls < 0 || cls >= probs.cols()) {
      throw std::invalid_argument("ce_from_probabilities: label out of range");
    }
    loss -= std::log(std::max(probs(r, cls), 1e-10));
  }
  return loss / static_cast<double>(rows);
}

// Full-batch cross entropy; row r samples with a seed derived from (seed, r)
// so parallel evaluation cannot change the result.
inline double ce_loss(const VqcModel& model, const Eigen::MatrixXd& x, const std::vector<int>& y,
                      uint64_t seed, int n_threads = 0) {
  const int rows = static_cast<int>(x.rows());
  if (rows < 1) throw std::invalid_argument("ce_loss: empty batch");
  Eigen::MatrixXd probs(rows, model.class_count);
  parallel_for(
      static_cast<std::size_t>(rows),
      [&](std::size_t r) {
        probs.row(static_cast<Eigen::Index>(r)) =
            vqc_forward(x.row(static_cast<Eigen::Index>(r)).transpose(), model,
                        derive_seed({seed, static_cast<uint64_t>(r)}))
                .transpose();
      },
      n_threads);
  return ce_from_probabilities(probs, y);
}

// Gain schedule and optimizer per Spall: step a_k = a / (A + k + 1)^alpha,
// perturbation c_k = c / (k + 1)^gamma. a <= 0 requests calibration: five
// probe pairs at theta0 estimate the gradient scale and a is set so the
// first step is about target_step.
struct SpsaConfig {
  int iterations = 100;
  double a = 0.0;
  double c = 0.1;
  double big_a = 10.0;
  double alpha = 0.602;
  double gamma_exp = 0.101;
  double target_step = 0.1;
  uint64_t seed = 0;
};

struct SpsaGains {
  double a_k = 0.0;
  double c_k = 0.0;
};

inline SpsaGains spsa_gains(const SpsaConfig& cfg, int k) {
  return {cfg.a / std::pow(cfg.big_a + k + 1.0, cfg.alpha),
          cfg.c / std::pow(k + 1.0, cfg.gamma_exp)};
}

struct SpsaResult {
  Eigen::VectorXd theta;
  std::vector<double> loss_history;  // midpoint (L+ + L-)/2 per iteration
  double a_used = 0.0;
};

// loss must accept (theta, eval_index); eval indices 2k and 2k+1 belong to
// iteration k, calibration probes use indices past 2*iterations.
template <class LossFn>
inline SpsaResult spsa_minimize(LossFn&& loss, const Eigen::VectorXd& theta0,
                                const SpsaConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("spsa_minimize: iterations must be >= 1");
  if (!(cfg.c > 0.0)) throw std::invalid_argument("spsa_minimize: c must be positive");
  const int n = static_cast<int>(theta0.size());
  if (n < 1) throw std::invalid_argument("spsa_minimize: empty parameter vector");

  Rng rng(cfg.seed);
  Eigen::VectorXd delta(n);
  const auto draw_delta = [&]() {
    for (int i = 0; i < n; ++i) delta[i] = static_cast<double>(rng.rademacher());
  };

  SpsaConfig run = cfg;
  if (run.a <= 0.0) {
    uint64_t tag = 2 * static_cast<uint64_t>(cfg.iterations);
    double grad_sum = 0.0;
    constexpr int kProbes = 5;
    for (int p = 0; p < kProbes; ++p) {
      draw_delta();
      const double lp = loss(Eigen::VectorXd(theta0 + run.c * delta), tag++);
      const double lm = loss(Eigen::VectorXd(theta0 - run.c * delta), tag++);
      if (!std::isfinite(lp) || !std::isfinite(lm)) {
        throw std::runtime_error("spsa_minimize: non-finite loss during calibration");
      }
      grad_sum += std::abs(lp - lm) / (2.0 * run.c);
    }
    const double grad_mag = grad_sum / kProbes;
    run.a = grad_mag > 1e-12
                ? run.target_step * std::pow(run.big_a + 1.0, run.alpha) / grad_mag
                : run.target_step;
  }

  SpsaResult result;
  result.a_used = run.a;
  result.theta = theta0;
  result.loss_history.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int k = 0; k < cfg.iterations; ++k) {
    const SpsaGains gains = spsa_gains(run, k);
    draw_delta();
    const double lp = loss(Eigen::VectorXd(result.theta + gains.c_k * delta),
                           2 * static_cast<uint64_t>(k));
    const double lm = loss(Eigen::VectorXd(result.theta - gains.c_k * delta),
                           2 * static_cast<uint64_t>(k) + 1);
    if (!std::isfinite(lp) || !std::isfinite(lm)) {
      throw std::runtime_error("spsa_minimize: non-finite loss at iteration " + std::to_string(k));
    }
    result.loss_history.push_back(0.5 * (lp + lm));
    // 1/delta_i = delta_i for Rademacher perturbations
    const double scale = gains.a_k * (lp - lm) / (2.0 * gains.c_k);
    result.theta -= scale * delta;
  }
  return result;
}

struct VqcTrainResult {
  VqcModel model;
  std::vector<double> loss_history;
  double spsa_a = 0.0;
};

inline VqcTrainResult vqc_train(const Eigen::MatrixXd& train, const std::vector<int>& labels,
                                const FeatureMapSpec& feature_map, const AnsatzSpec& ansatz,
                                const SpsaConfig& spsa, int class_count, int shots = 600,
                                uint64_t seed = 0, int n_threads = 0) {
  feature_map.validate();
  ansatz.validate();
  if (feature_map.n_qubits != ansatz.n_qubits || train.cols() != feature_map.n_qubits) {
    throw std::invalid_argument("vqc_train: feature map, ansatz, and data widths must agree");
  }
  if (train.rows() < 1 || static_cast<Eigen::Index>(labels.size()) != train.rows()) {
    throw std::invalid_argument("vqc_train: row/label count mismatch");
  }
  if (class_count < 2) throw std::invalid_argument("vqc_train: need at least two classes");
  for (int label : labels) {
    if (label < 0 || label >= class_count) {
      throw std::invalid_argument("vqc_train: label out of range");
    }
  }

  VqcModel model;
  model.feature_map = feature_map;
  model.ansatz = ansatz;
  model.class_count = class_count;
  model.shots = shots;
  model.seed = seed;

  Rng init(derive_seed({seed, detail::kThetaInitTag}));
  Eigen::VectorXd theta0(ansatz.param_count());
  constexpr double kPi = 3.14159265358979323846;
  for (Eigen::Index i = 0; i < theta0.size(); ++i) theta0[i] = init.uniform(-kPi, kPi);

  const auto loss = [&](const Eigen::VectorXd& theta, uint64_t tag) {
    VqcModel probe = model;
    probe.theta = theta;
    return ce_loss(probe, train, labels, derive_seed({seed, detail::kTrainLossTag, tag}),
                   n_threads);
  };
  SpsaResult opt = spsa_minimize(loss, theta0, spsa);
  model.theta = std::move(opt.theta);
  return {std::move(model), std::move(opt.loss_history), opt.a_used};
}

// Argmax class per row under a fixed evaluation seed; ties go to the lowest
// class index.
inline std::vector<int> vqc_predict(const VqcModel& model, const Eigen::MatrixXd& x,
                                    int n_threads = 0) {
  const int rows = static_cast<int>(x.rows());
  if (rows < 1) throw std::invalid_argument("vqc_predict: empty input");
  std::vector<int> out(static_cast<std::size_t>(rows), 0);
  parallel_for(
      static_cast<std::size_t>(rows),
      [&](std::size_t r) {
        const Eigen::VectorXd probs =
            vqc_forward(x.row(static_cast<Eigen::Index>(r)).transpose(), model,
                        derive_seed({model.seed, detail::kPredictTag, static_cast<uint64_t>(r)}));
        out[r] = argmax_lowest(probs);
      },
      n_threads);
  return out;
}

}  // namespace qphase
