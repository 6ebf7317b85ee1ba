// Copyright 2026 The gmip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gmip/sgd.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace gmip {
namespace {

enum Stream : std::uint64_t {
  kDatasetStream = 0,
  kShuffleStream = 1,
  kNoiseStream = 2,
  kParamsStream = 3,
};

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

void validate_task(const SyntheticTask& task) {
  if (task.feature_dim < 1) {
    throw std::invalid_argument("SyntheticTask: feature_dim must be >= 1");
  }
  if (task.true_params.size() != task.feature_dim) {
    throw std::invalid_argument("SyntheticTask: true_params has size " +
                                std::to_string(task.true_params.size()) +
                                ", expected " + std::to_string(task.feature_dim));
  }
  if (!(task.label_noise >= 0.0)) {
    throw std::invalid_argument("SyntheticTask: label_noise must be >= 0");
  }
}

}  // namespace

Dataset make_dataset(const SyntheticTask& task, int n_samples,
                     std::uint64_t seed) {
  validate_task(task);
  if (n_samples < 1) {
    throw std::invalid_argument("make_dataset: n_samples must be >= 1");
  }
  CounterRng rng(seed, kDatasetStream);
  const int d = task.feature_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Dataset ds;
  ds.features.resize(n_samples, d);
  ds.labels.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    for (int j = 0; j < d; ++j) ds.features(i, j) = scale * rng.next_normal();
    double signal = ds.features.row(i).dot(task.true_params);
    if (task.kind == TaskKind::kLinearRegression) {
      ds.labels[i] = signal + std::sqrt(task.label_noise) * rng.next_normal();
    } else {
      ds.labels[i] = rng.next_uniform() < sigmoid(signal) ? 1.0 : 0.0;
    }
  }
  return ds;
}

Eigen::VectorXd example_gradient(const SyntheticTask& task,
                                 const Eigen::VectorXd& params,
                                 const Eigen::VectorXd& x, double y) {
  double pred = x.dot(params);
  double residual = task.kind == TaskKind::kLinearRegression
                        ? pred - y
                        : sigmoid(pred) - y;
  return residual * x;
}

Eigen::VectorXd clip_gradient(Eigen::VectorXd gradient, double clip) {
  if (!(clip > 0.0)) {
    throw std::invalid_argument("clip_gradient: clip must be > 0");
  }
  if (std::isinf(clip)) return gradient;
  double norm = gradient.norm();
  if (norm > clip) gradient *= clip / norm;
  return gradient;
}

Eigen::VectorXd noisy_step(const std::vector<Eigen::VectorXd>& gradients,
                           double clip, double tau, CounterRng& noise_rng) {
  if (gradients.empty()) {
    throw std::invalid_argument("noisy_step: need at least one gradient");
  }
  if (!(tau >= 0.0)) {
    throw std::invalid_argument("noisy_step: tau must be >= 0");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(gradients[0].size());
  for (const Eigen::VectorXd& g : gradients) {
    if (g.size() != sum.size()) {
      throw std::invalid_argument("noisy_step: gradient dimension mismatch");
    }
    sum += clip_gradient(g, clip);
  }
  Eigen::VectorXd mean = sum / static_cast<double>(gradients.size());
  if (tau > 0.0) {
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
      mean[i] += tau * noise_rng.next_normal();
    }
  }
  return mean;
}

TrainResult train(const SyntheticTask& task, const Dataset& dataset,
                  const SgdConfig& config, const std::vector<Probe>& probes) {
  validate_task(task);
  if (dataset.size() < 1 || dataset.features.cols() != task.feature_dim) {
    throw std::invalid_argument("train: dataset does not match the task");
  }
  if (config.batch_size < 1 || config.batch_size > dataset.size()) {
    throw std::invalid_argument(
        "train: batch size must lie in [1, dataset size]");
  }
  if (config.iterations < 1) {
    throw std::invalid_argument("train: iterations must be >= 1");
  }
  if (!(config.clip > 0.0) || !(config.tau >= 0.0) ||
      !std::isfinite(config.learning_rate)) {
    throw std::invalid_argument("train: invalid hyperparameters");
  }

  CounterRng shuffle_rng(config.seed, kShuffleStream);
  CounterRng noise_rng(config.seed, kNoiseStream);

  const int n = config.batch_size;
  const int big_n = dataset.size();
  std::vector<int> order(big_n);
  std::iota(order.begin(), order.end(), 0);
  int cursor = big_n;  // forces a shuffle before the first batch

  TrainResult result;
  result.params = Eigen::VectorXd::Zero(task.feature_dim);
  result.probe_gradients.resize(probes.size());

  std::vector<Eigen::VectorXd> batch_gradients(n);
  for (int t = 0; t < config.iterations; ++t) {
    if (cursor + n > big_n) {
      // Reshuffle at epoch boundaries (Fisher-Yates); a trailing partial
      // batch is folded into the next epoch.
      for (int i = big_n - 1; i > 0; --i) {
        int j = static_cast<int>(
            shuffle_rng.next_below(static_cast<std::uint64_t>(i + 1)));
        std::swap(order[i], order[j]);
      }
      cursor = 0;
    }
    result.param_trajectory.push_back(result.params);
    for (size_t p = 0; p < probes.size(); ++p) {
      result.probe_gradients[p].push_back(
          example_gradient(task, result.params, probes[p].x, probes[p].y));
    }
    for (int i = 0; i < n; ++i) {
      int row = order[cursor + i];
      batch_gradients[i] = example_gradient(
          task, result.params, dataset.features.row(row), dataset.labels[row]);
    }
    cursor += n;
    Eigen::VectorXd published =
        noisy_step(batch_gradients, config.clip, config.tau, noise_rng);
    result.published_means.push_back(published);
    result.params -= config.learning_rate * published;
    if (!result.params.allFinite()) {
      throw std::runtime_error("train: parameters diverged at iteration " +
                               std::to_string(t));
    }
  }
  return result;
}

std::vector<Eigen::MatrixXd> make_background_gradients(
    const SyntheticTask& task,
    const std::vector<Eigen::VectorXd>& param_trajectory, int count,
    std::uint64_t seed) {
  validate_task(task);
  if (count < 2) {
    throw std::invalid_argument(
        "make_background_gradients: need at least 2 samples per step");
  }
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(param_trajectory.size());
  for (size_t t = 0; t < param_trajectory.size(); ++t) {
    // One dataset stream per step, offset past the training streams.
    Dataset fresh = make_dataset(task, count, seed + 1000003 * (t + 1));
    Eigen::MatrixXd block(count, task.feature_dim);
    for (int i = 0; i < count; ++i) {
      block.row(i) = example_gradient(task, param_trajectory[t],
                                      fresh.features.row(i), fresh.labels[i]);
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

SgdRunSpec parse_sgd_run_spec(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("sgd config: invalid JSON: ") +
                                e.what());
  }
  SgdRunSpec spec;
  const auto& task = doc.at("task");
  std::string kind = task.at("kind").get<std::string>();
  if (kind == "linear_regression") {
    spec.task.kind = TaskKind::kLinearRegression;
  } else if (kind == "logistic_regression") {
    spec.task.kind = TaskKind::kLogisticRegression;
  } else {
    throw std::invalid_argument("sgd config: unknown task kind '" + kind + "'");
  }
  spec.task.feature_dim = task.at("feature_dim").get<int>();
  spec.task.label_noise = task.value("label_noise", 0.0);

  const auto& cfg = doc.at("config");
  spec.config.learning_rate = cfg.at("learning_rate").get<double>();
  spec.config.batch_size = cfg.at("batch_size").get<int>();
  spec.config.iterations = cfg.at("iterations").get<int>();
  if (cfg.contains("clip")) {
    if (cfg["clip"].is_string()) {
      spec.config.clip = std::stod(cfg["clip"].get<std::string>());
    } else {
      spec.config.clip = cfg["clip"].get<double>();
    }
  }
  spec.config.tau = cfg.value("tau", 0.0);
  spec.config.seed = cfg.value("seed", std::uint64_t{0});

  spec.n_samples = doc.at("n_samples").get<int>();
  spec.probe_count = doc.value("probes", 1);

  if (task.contains("true_params")) {
    auto values = task["true_params"].get<std::vector<double>>();
    spec.task.true_params =
        Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  } else {
    CounterRng rng(spec.config.seed, kParamsStream);
    spec.task.true_params.resize(spec.task.feature_dim);
    for (int i = 0; i < spec.task.feature_dim; ++i) {
      spec.task.true_params[i] = rng.next_normal();
    }
  }
  return spec;
}

std::string sgd_run_spec_to_json(const SgdRunSpec& spec) {
  nlohmann::json doc;
  doc["task"]["kind"] = spec.task.kind == TaskKind::kLinearRegression
                            ? "linear_regression"
                            : "logistic_regression";
  doc["task"]["feature_dim"] = spec.task.feature_dim;
  doc["task"]["label_noise"] = spec.task.label_noise;
  doc["task"]["true_params"] = std::vector<double>(
      spec.task.true_params.data(),
      spec.task.true_params.data() + spec.task.true_params.size());
  doc["config"]["learning_rate"] = spec.config.learning_rate;
  doc["config"]["batch_size"] = spec.config.batch_size;
  doc["config"]["iterations"] = spec.config.iterations;
  if (std::isinf(spec.config.clip)) {
    doc["config"]["clip"] = "inf";
  } else {
    doc["config"]["clip"] = spec.config.clip;
  }
  doc["config"]["tau"] = spec.config.tau;
  doc["config"]["seed"] = spec.config.seed;
  doc["n_samples"] = spec.n_samples;
  doc["probes"] = spec.probe_count;
  return doc.dump(2);
}

}  // namespace gmip
