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
#include <vector>

#include "gmip/roc.h"
#include "gmip/tradeoff.h"

// Closed-form loss-based likelihood-ratio membership test for ordinary least
// squares under Gaussian label noise. Hypothesis orientation in this module:
// H0 is "the query is a training member"; rejecting (for large loss) declares
// it a nonmember. The member/nonmember loss variances differ through the
// query's leverage, which is the entire signal.

namespace gmip {

struct OlsFit {
  Eigen::MatrixXd design;        // n x p
  Eigen::VectorXd targets;       // n
  Eigen::VectorXd params;        // (X^T X)^{-1} X^T y
  Eigen::MatrixXd gram_inverse;  // (X^T X)^{-1}
  double noise_var = 0.0;        // known label-noise variance sigma^2
  double condition_number = 0.0;

  int rows() const { return static_cast<int>(design.rows()); }
  int cols() const { return static_cast<int>(design.cols()); }
};

// Solves the normal equations; throws when X^T X is numerically singular.
OlsFit fit_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
               double noise_var);

// Member/nonmember variances of the prediction residual at a query point:
// v0 = sigma^2 (1 - h), v1 = sigma^2 (1 + h), h the query leverage.
struct LossTestSpec {
  double v0 = 0.0;
  double v1 = 0.0;
};

// Throws when the leverage reaches 1 (duplicate or degenerate design).
LossTestSpec loss_variances(const Eigen::VectorXd& query, const OlsFit& fit);

// Power (TPR) of the loss LRT at member-side FPR alpha:
//   1 - CDF_chi2_1( (v0/v1) CDF^{-1}_chi2_1(1 - alpha) ).
// Equals alpha at v0 = v1 and tends to 1 as v0/v1 -> 0.
double loss_lrt_power(const LossTestSpec& spec, double alpha);

// The matching trade-off value: FNR = CDF_chi2_1((v0/v1) CDF^{-1}(1-alpha)).
double loss_lrt_fnr(const LossTestSpec& spec, double alpha);

struct LinregSummaryRow {
  double fpr;
  double tpr_empirical;
  double tpr_analytical;  // mean of the per-query closed-form powers
};

struct LinregExperimentResult {
  RocEstimate roc;  // module orientation: positives are nonmembers
  std::vector<LinregSummaryRow> summary;
  std::vector<CurvePoint> analytical_curve;  // at the mean member leverage
  // Normalized loss statistics loss/v0 (chi-squared(1) for members).
  std::vector<double> member_scores;
  std::vector<double> nonmember_scores;
  double ks_statistic = 0.0;       // member scores against chi-squared(1)
  double ks_critical_1pct = 0.0;
  double mean_leverage = 0.0;      // member side
  int redraw_count = 0;            // designs redrawn as near-singular
};

// Teacher-model experiment: per trial draw X, b, noise, fit OLS, and score
// one member and one nonmember query by the normalized squared loss. The
// summary compares the empirical nonmember-detection rate at fixed
// chi-squared thresholds against the per-query analytical power.
// Requires n > p + 1 and trials >= 1000.
LinregExperimentResult run_linreg_experiment(int n, int p, double sigma2,
                                             int trials, std::uint64_t seed);

}  // namespace gmip
