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

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gmip/rng.h"

// Desk-scale noisy SGD on synthetic tasks: per-sample clipping, mean
// aggregation, isotropic Gaussian noising, and gradient traces for auditing.
//
// Randomness layout (format version 1): all draws come from counter-based
// streams keyed by the run seed. Stream 0 generates the dataset, stream 1
// the per-epoch batch shuffles, stream 2 the publication noise (per
// iteration, per coordinate, in order). Probe points never consume
// randomness during training.

namespace gmip {

struct SgdConfig {
  double learning_rate = 0.0;
  int batch_size = 0;
  int iterations = 0;  // T >= 1
  double clip = std::numeric_limits<double>::infinity();
  double tau = 0.0;  // noise standard deviation
  std::uint64_t seed = 0;
};

enum class TaskKind { kLinearRegression, kLogisticRegression };

struct SyntheticTask {
  TaskKind kind = TaskKind::kLinearRegression;
  int feature_dim = 0;
  double label_noise = 0.0;  // sigma^2 for the regression targets
  Eigen::VectorXd true_params;
};

struct Dataset {
  Eigen::MatrixXd features;  // rows are examples
  Eigen::VectorXd labels;

  int size() const { return static_cast<int>(features.rows()); }
};

// Features are iid N(0, 1/feature_dim) so example norms are ~1 regardless of
// dimension. Linear targets are x.b + noise; logistic labels are Bernoulli
// with success probability sigmoid(x.b).
Dataset make_dataset(const SyntheticTask& task, int n_samples,
                     std::uint64_t seed);

// Gradient of the per-example loss at `params`: squared error for linear
// regression, log loss for logistic regression.
Eigen::VectorXd example_gradient(const SyntheticTask& task,
                                 const Eigen::VectorXd& params,
                                 const Eigen::VectorXd& x, double y);

// g * min(1, C/|g|): norm capped at C, direction preserved, in-ball vectors
// untouched. An infinite clip is the identity.
Eigen::VectorXd clip_gradient(Eigen::VectorXd gradient, double clip);

// Mean of the clipped gradients plus N(0, tau^2 I).
Eigen::VectorXd noisy_step(const std::vector<Eigen::VectorXd>& gradients,
                           double clip, double tau, CounterRng& noise_rng);

struct Probe {
  Eigen::VectorXd x;
  double y = 0.0;
};

struct TrainResult {
  Eigen::VectorXd params;
  std::vector<Eigen::VectorXd> param_trajectory;  // pre-update, per iteration
  std::vector<Eigen::VectorXd> published_means;   // per iteration
  // probe_gradients[p][t]: raw gradient of probe p at the pre-update
  // parameters of iteration t (the attacker's view).
  std::vector<std::vector<Eigen::VectorXd>> probe_gradients;
};

// Runs `config.iterations` noisy SGD steps over the dataset, sampling batches
// uniformly without replacement and reshuffling each epoch. Throws on
// non-finite parameters, naming the iteration.
TrainResult train(const SyntheticTask& task, const Dataset& dataset,
                  const SgdConfig& config, const std::vector<Probe>& probes);

// Background gradient blocks for scoring a trace: `count` fresh task samples
// per step, differentiated at that step's pre-update parameters.
std::vector<Eigen::MatrixXd> make_background_gradients(
    const SyntheticTask& task,
    const std::vector<Eigen::VectorXd>& param_trajectory, int count,
    std::uint64_t seed);

// JSON run document: {"task": {"kind", "feature_dim", "label_noise",
// "true_params"?}, "config": {"learning_rate", "batch_size", "iterations",
// "clip", "tau", "seed"}, "n_samples": int, "probes": int}. A missing
// true_params is drawn as iid standard normal from stream 3 of the seed;
// "inf" is accepted for clip.
struct SgdRunSpec {
  SyntheticTask task;
  SgdConfig config;
  int n_samples = 0;
  int probe_count = 1;
};

SgdRunSpec parse_sgd_run_spec(const std::string& json_text);
std::string sgd_run_spec_to_json(const SgdRunSpec& spec);

}  // namespace gmip
