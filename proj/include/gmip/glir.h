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
#include <stdexcept>
#include <string>
#include <vector>

#include "gmip/roc.h"

// The analytical gradient likelihood-ratio attack: estimate the gradient
// distribution, whiten, compute the quadratic test statistic, turn it into a
// non-central chi-squared p-value, aggregate over steps, and audit the
// analytical trade-off bound by Monte Carlo.

namespace gmip {

enum class GradientFamily { kGaussian, kUniform };

// Population model for simulated per-example gradients.
struct GradientModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // symmetric positive definite
  GradientFamily family = GradientFamily::kGaussian;

  GradientModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                GradientFamily family);
  int dim() const { return static_cast<int>(mean.size()); }
};

// Estimated gradient distribution with a symmetric whitener
// W = cov_hat^{-1/2}, so W cov_hat W = I.
struct GradientEstimate {
  Eigen::VectorXd mean_hat;
  Eigen::MatrixXd cov_hat;
  Eigen::MatrixXd whitener;
  int sample_count = 0;

  int dim() const { return static_cast<int>(mean_hat.size()); }
};

// Sample mean and covariance of the background rows, with ridge*(trace/d)
// added to the diagonal before inversion. Throws when fewer than 2 rows are
// given or the regularized covariance is numerically singular.
GradientEstimate estimate_distribution(const Eigen::MatrixXd& background_rows,
                                       double ridge);

// Estimate built from the model's true parameters.
GradientEstimate exact_estimate(const GradientModel& model);

// S_hat = (n-1) (m - theta)^T cov_hat^{-1} (m - theta).
double glir_statistic(const Eigen::VectorXd& published_mean,
                      const Eigen::VectorXd& query_gradient,
                      const GradientEstimate& estimate, int batch_size);

// K_hat = || cov_hat^{-1/2} (theta - mean_hat) ||^2.
double susceptibility(const Eigen::VectorXd& query_gradient,
                      const GradientEstimate& estimate);

// log F_{chi'2_d(n K_hat)}(S_hat): the left-tail log probability of the
// (n-1)-scaled statistic under the non-central chi-squared law. Smaller
// values are stronger membership evidence. Clamped to -745 (log of the
// smallest positive double).
double glir_log_pvalue(double statistic, int dim, int batch_size, double k_hat);

struct EstimationSpec {
  bool exact = true;     // use the model's true mean/covariance
  int sample_count = 0;  // background draws per step when !exact
  double ridge = 1e-6;
};

struct AuditConfig {
  int batch_size = 0;  // n >= 2
  int steps = 1;       // T >= 1
  int trials = 0;      // per class, >= 100
  double tau2 = 0.0;
  double clip = std::numeric_limits<double>::infinity();
  EstimationSpec estimation;
  std::uint64_t seed = 0;
};

struct AuditResult {
  RocEstimate roc;
  std::vector<double> member_scores;     // p_total, trial order
  std::vector<double> nonmember_scores;  // p_total, trial order
};

// Simulates `trials` member and `trials` nonmember attack trials against the
// gradient model. Each trial fixes one query gradient and runs `steps`
// independently refreshed batches through one noisy publication each,
// accumulating log p-values. Deterministic for a fixed seed: every trial
// draws from its own counter-based streams.
AuditResult run_audit(const GradientModel& model, const AuditConfig& config);

// ---------------------------------------------------------------------------
// Trace files for auditing externally produced training runs.
//
// Binary format (little-endian): magic "GMIP", u32 version (1), u32 n,
// u32 d, u32 T, then T records of d f64 published mean followed by d f64
// query gradient. The CSV alternative has header `step,kind,idx,value` with
// kind in {mean, query}.

struct GradientTrace {
  int batch_size = 0;
  std::vector<Eigen::VectorXd> published_means;   // T x d
  std::vector<Eigen::VectorXd> query_gradients;   // T x d

  int steps() const { return static_cast<int>(published_means.size()); }
  int dim() const {
    return published_means.empty() ? 0
                                   : static_cast<int>(published_means[0].size());
  }
};

// I/O failures and malformed content throw TraceIoError; for binary files the
// message names the byte offset of the problem.
class TraceIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_trace(const std::string& path, const GradientTrace& trace);
// Sniffs the binary magic and falls back to the CSV format.
GradientTrace read_trace(const std::string& path);

// Per-step background gradient blocks ("GMBG" magic, u32 version, u32 B,
// u32 d, u32 T, then T blocks of B x d f64 rows). Used to estimate the
// gradient distribution when scoring a trace.
void write_background(const std::string& path,
                      const std::vector<Eigen::MatrixXd>& per_step_rows);
std::vector<Eigen::MatrixXd> read_background(const std::string& path);

struct TraceScore {
  std::vector<double> step_statistics;
  std::vector<double> step_susceptibilities;
  std::vector<double> step_log_pvalues;
  double total_log_pvalue = 0.0;
};

TraceScore score_trace(const GradientTrace& trace,
                       const std::vector<Eigen::MatrixXd>& background_per_step,
                       double ridge);

}  // namespace gmip
