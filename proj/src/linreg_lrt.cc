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

#include "gmip/linreg_lrt.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmip/rng.h"
#include "gmip/specfun.h"

namespace gmip {
namespace {

constexpr double kMaxCondition = 1e10;

enum Stream : std::uint64_t {
  kDesignStream = 0,
  kParamsStream = 1,
  kNoiseStream = 2,
  kQueryStream = 3,
};

}  // namespace

OlsFit fit_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
               double noise_var) {
  if (design.rows() != targets.size()) {
    throw std::invalid_argument("fit_ols: design/target size mismatch");
  }
  if (design.rows() <= design.cols()) {
    throw std::invalid_argument("fit_ols: need more rows than columns");
  }
  if (!(noise_var > 0.0)) {
    throw std::invalid_argument("fit_ols: noise variance must be > 0");
  }
  Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("fit_ols: eigendecomposition failed");
  }
  double min_ev = es.eigenvalues().minCoeff();
  double max_ev = es.eigenvalues().maxCoeff();
  if (!(min_ev > 0.0) || max_ev / min_ev > kMaxCondition) {
    throw std::runtime_error("fit_ols: X^T X is numerically singular");
  }
  OlsFit fit;
  fit.design = design;
  fit.targets = targets;
  fit.gram_inverse = es.eigenvectors() *
                     es.eigenvalues().array().inverse().matrix().asDiagonal() *
                     es.eigenvectors().transpose();
  fit.params = fit.gram_inverse * (design.transpose() * targets);
  fit.noise_var = noise_var;
  fit.condition_number = max_ev / min_ev;
  return fit;
}

LossTestSpec loss_variances(const Eigen::VectorXd& query, const OlsFit& fit) {
  if (query.size() != fit.cols()) {
    throw std::invalid_argument("loss_variances: query dimension mismatch");
  }
  double h = query.dot(fit.gram_inverse * query);
  if (h >= 1.0) {
    throw std::runtime_error(
        "loss_variances: leverage >= 1 (duplicate or degenerate design), h = " +
        std::to_string(h));
  }
  return {fit.noise_var * (1.0 - h), fit.noise_var * (1.0 + h)};
}

double loss_lrt_fnr(const LossTestSpec& spec, double alpha) {
  if (!(spec.v0 > 0.0) || !(spec.v1 > 0.0)) {
    throw std::invalid_argument("loss_lrt: variances must be > 0");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("loss_lrt: alpha must lie in [0,1]");
  }
  if (alpha <= 0.0) return 1.0;
  if (alpha >= 1.0) return 0.0;
  double threshold = chi2_quantile(1, 1.0 - alpha);
  return chi2_cdf(1, spec.v0 / spec.v1 * threshold);
}

double loss_lrt_power(const LossTestSpec& spec, double alpha) {
  return 1.0 - loss_lrt_fnr(spec, alpha);
}

LinregExperimentResult run_linreg_experiment(int n, int p, double sigma2,
                                             int trials, std::uint64_t seed) {
  if (p < 1 || n <= p + 1) {
    throw std::invalid_argument("run_linreg_experiment: need n > p + 1 >= 2");
  }
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("run_linreg_experiment: sigma2 must be > 0");
  }
  if (trials < 1000) {
    throw std::invalid_argument(
        "run_linreg_experiment: need at least 1000 trials, got " +
        std::to_string(trials));
  }

  const std::vector<double> alphas = {0.05, 0.1, 0.25};
  std::vector<double> analytic_sums(alphas.size(), 0.0);

  LinregExperimentResult result;
  result.member_scores.reserve(trials);
  result.nonmember_scores.reserve(trials);
  double leverage_sum = 0.0;

  for (int trial = 0; trial < trials; ++trial) {
    std::uint64_t base = static_cast<std::uint64_t>(trial) * 4;
    CounterRng design_rng(seed, base + kDesignStream);
    CounterRng params_rng(seed, base + kParamsStream);
    CounterRng noise_rng(seed, base + kNoiseStream);
    CounterRng query_rng(seed, base + kQueryStream);

    OlsFit fit;
    Eigen::MatrixXd design(n, p);
    Eigen::VectorXd beta(p), targets(n);
    for (;;) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) design(i, j) = design_rng.next_normal();
      }
      for (int j = 0; j < p; ++j) beta[j] = params_rng.next_normal();
      for (int i = 0; i < n; ++i) {
        targets[i] =
            design.row(i).dot(beta) + std::sqrt(sigma2) * noise_rng.next_normal();
      }
      try {
        fit = fit_ols(design, targets, sigma2);
        break;
      } catch (const std::runtime_error&) {
        ++result.redraw_count;  // near-singular design, redraw
      }
    }

    // Member query: the first training row. Nonmember: a fresh draw from the
    // same teacher model.
    Eigen::VectorXd member_x = design.row(0);
    double member_y = targets[0];
    LossTestSpec member_spec = loss_variances(member_x, fit);
    double member_loss = std::pow(member_y - fit.params.dot(member_x), 2);
    result.member_scores.push_back(member_loss / member_spec.v0);
    leverage_sum += 1.0 - member_spec.v0 / sigma2;

    Eigen::VectorXd query_x(p);
    for (int j = 0; j < p; ++j) query_x[j] = query_rng.next_normal();
    double query_y = query_x.dot(beta) + std::sqrt(sigma2) * query_rng.next_normal();
    LossTestSpec query_spec = loss_variances(query_x, fit);
    double query_loss = std::pow(query_y - fit.params.dot(query_x), 2);
    result.nonmember_scores.push_back(query_loss / query_spec.v0);

    for (size_t a = 0; a < alphas.size(); ++a) {
      analytic_sums[a] += loss_lrt_power(query_spec, alphas[a]);
    }
  }

  result.mean_leverage = leverage_sum / trials;

  // Normalized scores make the member statistic exactly chi-squared(1), so
  // fixed thresholds realize the target FPR per query.
  for (size_t a = 0; a < alphas.size(); ++a) {
    double threshold = chi2_quantile(1, 1.0 - alphas[a]);
    long hits = std::count_if(result.nonmember_scores.begin(),
                              result.nonmember_scores.end(),
                              [&](double s) { return s >= threshold; });
    result.summary.push_back({alphas[a],
                              static_cast<double>(hits) / trials,
                              analytic_sums[a] / trials});
  }

  // ROC in module orientation: positives are nonmembers (large scores).
  std::vector<double> neg_members(result.member_scores.size());
  std::vector<double> neg_nonmembers(result.nonmember_scores.size());
  for (size_t i = 0; i < result.member_scores.size(); ++i) {
    neg_members[i] = -result.member_scores[i];
  }
  for (size_t i = 0; i < result.nonmember_scores.size(); ++i) {
    neg_nonmembers[i] = -result.nonmember_scores[i];
  }
  result.roc = roc_from_scores(neg_nonmembers, neg_members);

  // Kolmogorov-Smirnov distance of the member statistics from chi-squared(1).
  std::vector<double> u(result.member_scores.size());
  for (size_t i = 0; i < u.size(); ++i) {
    u[i] = chi2_cdf(1, result.member_scores[i]);
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  const double m = static_cast<double>(u.size());
  for (size_t i = 0; i < u.size(); ++i) {
    ks = std::max(ks, std::fabs(u[i] - (i + 1) / m));
    ks = std::max(ks, std::fabs(u[i] - i / m));
  }
  result.ks_statistic = ks;
  result.ks_critical_1pct = 1.628 / std::sqrt(m);

  // Analytical trade-off curve at the mean member leverage.
  LossTestSpec mean_spec{sigma2 * (1.0 - result.mean_leverage),
                         sigma2 * (1.0 + result.mean_leverage)};
  for (int k = 0; k <= 200; ++k) {
    double a = static_cast<double>(k) / 200.0;
    result.analytical_curve.push_back({a, loss_lrt_fnr(mean_spec, a)});
  }
  return result;
}

}  // namespace gmip
