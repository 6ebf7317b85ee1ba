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

#include "gmip/glir.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gmip/accountant.h"
#include "gmip/rng.h"
#include "gmip/specfun.h"
#include "gmip/tradeoff.h"
#include "gtest/gtest.h"
#include "testutil.h"

namespace gmip {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GradientModel standard_model(int d, GradientFamily family) {
  return GradientModel(Eigen::VectorXd::Zero(d),
                       Eigen::MatrixXd::Identity(d, d), family);
}

TEST(EstimateDistribution, TwoPointExample) {
  Eigen::MatrixXd rows(2, 1);
  rows << 0.0, 2.0;
  GradientEstimate est = estimate_distribution(rows, 0.1);
  EXPECT_DOUBLE_EQ(est.mean_hat[0], 1.0);
  // Sample variance 2 plus ridge * (trace/d) = 0.1 * 2.
  EXPECT_NEAR(est.cov_hat(0, 0), 2.0 + 0.1 * 2.0, 1e-12);
  EXPECT_EQ(est.sample_count, 2);
}

TEST(EstimateDistribution, RecoversKnownDistribution) {
  // The relative Frobenius error of a Gaussian sample covariance is
  // ~sqrt((d+1)/m); 200d samples put it near 0.07, safely inside the 0.1
  // contract (50d samples would sit at 0.14).
  const int d = 8;
  const int m = 200 * d;
  Eigen::VectorXd mean(d);
  for (int i = 0; i < d; ++i) mean[i] = 0.5 + 0.25 * i;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i + 1 < d; ++i) cov(i, i + 1) = cov(i + 1, i) = 0.3;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::MatrixXd sqrt_cov = es.operatorSqrt();
  CounterRng rng(17, 0);
  Eigen::MatrixXd rows(m, d);
  for (int r = 0; r < m; ++r) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.next_normal();
    rows.row(r) = (mean + sqrt_cov * z).transpose();
  }
  GradientEstimate est = estimate_distribution(rows, 0.0);
  EXPECT_LT((est.mean_hat - mean).norm() / mean.norm(), 0.05);
  EXPECT_LT((est.cov_hat - cov).norm() / cov.norm(), 0.1);
}

TEST(EstimateDistribution, WhitenerContract) {
  CounterRng rng(3, 5);
  Eigen::MatrixXd rows(40, 4);
  for (int r = 0; r < 40; ++r) {
    for (int c = 0; c < 4; ++c) rows(r, c) = rng.next_normal() * (c + 1.0);
  }
  GradientEstimate est = estimate_distribution(rows, 1e-6);
  Eigen::MatrixXd should_be_identity =
      est.whitener * est.cov_hat * est.whitener.transpose();
  EXPECT_LT((should_be_identity - Eigen::MatrixXd::Identity(4, 4))
                .cwiseAbs()
                .maxCoeff(),
            1e-6);
}

TEST(EstimateDistribution, SingularCovarianceRejected) {
  // 3 samples in 5 dimensions cannot yield a full-rank covariance.
  Eigen::MatrixXd rows = Eigen::MatrixXd::Random(3, 5);
  EXPECT_THROW(estimate_distribution(rows, 0.0), std::runtime_error);
  EXPECT_THROW(estimate_distribution(Eigen::MatrixXd::Random(1, 2), 0.1),
               std::invalid_argument);
}

TEST(GlirStatistic, AnchorValues) {
  GradientModel model(Eigen::VectorXd::Zero(1),
                      Eigen::MatrixXd::Constant(1, 1, 4.0),
                      GradientFamily::kGaussian);
  GradientEstimate est = exact_estimate(model);
  Eigen::VectorXd m(1), theta(1);
  m << 2.5;
  theta << 0.5;  // m - theta = 2, Sigma = 4, n = 5: 4 * 4 / 4 = 4
  EXPECT_NEAR(glir_statistic(m, theta, est, 5), 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(glir_statistic(m, m, est, 5), 0.0);
}

TEST(GlirStatistic, AffineInvariance) {
  const int d = 6;
  CounterRng rng(11, 2);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = rng.next_normal();
  }
  a += 3.0 * Eigen::MatrixXd::Identity(d, d);  // keep it invertible
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd m(d), theta(d);
  for (int i = 0; i < d; ++i) {
    m[i] = rng.next_normal();
    theta[i] = rng.next_normal();
  }
  GradientEstimate est = exact_estimate(
      GradientModel(Eigen::VectorXd::Zero(d), cov, GradientFamily::kGaussian));
  Eigen::MatrixXd cov_t = a * cov * a.transpose();
  GradientEstimate est_t = exact_estimate(GradientModel(
      Eigen::VectorXd::Zero(d), cov_t, GradientFamily::kGaussian));
  double s = glir_statistic(m, theta, est, 32);
  double s_t = glir_statistic(a * m, a * theta, est_t, 32);
  EXPECT_NEAR(s, s_t, 1e-8 * std::max(1.0, s));
}

TEST(Susceptibility, AnchorValues) {
  GradientModel model = standard_model(2, GradientFamily::kGaussian);
  GradientEstimate est = exact_estimate(model);
  Eigen::VectorXd theta(2);
  theta << 3.0, 4.0;
  EXPECT_NEAR(susceptibility(theta, est), 25.0, 1e-12);
  EXPECT_DOUBLE_EQ(susceptibility(est.mean_hat, est), 0.0);
}

TEST(Susceptibility, ChiSquaredMeanUnderTheModel) {
  const int d = 30;
  const int kDraws = 10000;
  GradientModel model = standard_model(d, GradientFamily::kGaussian);
  GradientEstimate est = exact_estimate(model);
  CounterRng rng(7, 1);
  double sum = 0.0;
  Eigen::VectorXd theta(d);
  for (int i = 0; i < kDraws; ++i) {
    for (int j = 0; j < d; ++j) theta[j] = rng.next_normal();
    sum += susceptibility(theta, est);
  }
  double mean = sum / kDraws;
  double sigma = std::sqrt(2.0 * d / static_cast<double>(kDraws));
  EXPECT_NEAR(mean, d, 3.0 * sigma);
}

TEST(GlirLogPvalue, AnchorValues) {
  EXPECT_DOUBLE_EQ(glir_log_pvalue(0.0, 5, 20, 4.0), -745.0);
  // At the law's median the p-value is one half.
  double median = noncentral_chi2_quantile(NoncentralChiSq(5, 20 * 4.0), 0.5);
  EXPECT_NEAR(glir_log_pvalue(median, 5, 20, 4.0), std::log(0.5), 1e-7);
}

TEST(RunAudit, DeterministicForFixedSeed) {
  GradientModel model = standard_model(6, GradientFamily::kGaussian);
  AuditConfig config;
  config.batch_size = 12;
  config.trials = 150;
  config.seed = 99;
  AuditResult a = run_audit(model, config);
  AuditResult b = run_audit(model, config);
  ASSERT_EQ(a.member_scores.size(), b.member_scores.size());
  for (size_t i = 0; i < a.member_scores.size(); ++i) {
    EXPECT_EQ(a.member_scores[i], b.member_scores[i]);
    EXPECT_EQ(a.nonmember_scores[i], b.nonmember_scores[i]);
  }
  config.seed = 100;
  AuditResult c = run_audit(model, config);
  EXPECT_NE(a.member_scores[0], c.member_scores[0]);
}

TEST(RunAudit, ExactParamsMatchTheAnalyticalCurve) {
  const int d = 20, n = 50;
  GradientModel model = standard_model(d, GradientFamily::kGaussian);
  AuditConfig config;
  config.batch_size = n;
  config.trials = 4000;
  config.seed = 2026;
  AuditResult result = run_audit(model, config);
  OneStepParams params(n, d, 0.0, kInf, d);
  for (double alpha : {0.1, 0.25, 0.5}) {
    auto check = testutil::fnr_ci_check(
        result.member_scores, result.nonmember_scores, alpha,
        [&](double a) { return onestep_beta(params, a); });
    EXPECT_NEAR(check.empirical_fnr, onestep_beta(params, alpha),
                check.tolerance)
        << alpha;
  }
}

TEST(RunAudit, UniformFamilyMatchesTheSameCurve) {
  const int d = 16, n = 120;
  GradientModel model = standard_model(d, GradientFamily::kUniform);
  AuditConfig config;
  config.batch_size = n;
  config.trials = 4000;
  config.seed = 5;
  AuditResult result = run_audit(model, config);
  OneStepParams params(n, d, 0.0, kInf, d);
  for (double alpha : {0.1, 0.25, 0.5}) {
    auto check = testutil::fnr_ci_check(
        result.member_scores, result.nonmember_scores, alpha,
        [&](double a) { return onestep_beta(params, a); });
    EXPECT_NEAR(check.empirical_fnr, onestep_beta(params, alpha),
                check.tolerance)
        << alpha;
  }
}

TEST(RunAudit, MultiStepAttackStaysAboveComposedBound) {
  const int d = 16, n = 40, steps = 5;
  GradientModel model = standard_model(d, GradientFamily::kGaussian);
  AuditConfig config;
  config.batch_size = n;
  config.steps = steps;
  config.trials = 2500;
  config.seed = 31;
  AuditResult result = run_audit(model, config);
  double mu = compose_k_steps(mu_step(OneStepParams(n, d, 0.0, kInf, d)), steps);
  for (double alpha : {0.05, 0.1, 0.25, 0.5}) {
    auto check = testutil::fnr_ci_check(
        result.member_scores, result.nonmember_scores, alpha,
        [&](double a) { return gaussian_beta(mu, a); });
    EXPECT_GE(check.empirical_fnr, gaussian_beta(mu, alpha) - check.tolerance)
        << alpha;
  }
}

TEST(RunAudit, EstimatedParametersNeverBeatTheBound) {
  const int d = 8, n = 60;
  GradientModel model = standard_model(d, GradientFamily::kGaussian);
  AuditConfig config;
  config.batch_size = n;
  config.trials = 1500;
  config.estimation.exact = false;
  config.estimation.sample_count = 120;
  config.estimation.ridge = 1e-6;
  config.seed = 8;
  AuditResult result = run_audit(model, config);
  OneStepParams params(n, d, 0.0, kInf, d);
  for (double alpha : {0.1, 0.25, 0.5}) {
    auto check = testutil::fnr_ci_check(
        result.member_scores, result.nonmember_scores, alpha,
        [&](double a) { return onestep_beta(params, a); });
    EXPECT_GE(check.empirical_fnr, onestep_beta(params, alpha) - check.tolerance)
        << alpha;
  }
}

TEST(RunAudit, NoisyConfigurationStaysAboveItsBound) {
  const int d = 10, n = 40;
  GradientModel model = standard_model(d, GradientFamily::kGaussian);
  AuditConfig config;
  config.batch_size = n;
  config.trials = 1500;
  config.tau2 = 0.02;
  config.clip = 4.0;
  config.seed = 77;
  AuditResult result = run_audit(model, config);
  OneStepParams params(n, d, config.tau2, config.clip, d);
  for (double alpha : {0.1, 0.25, 0.5}) {
    auto check = testutil::fnr_ci_check(
        result.member_scores, result.nonmember_scores, alpha,
        [&](double a) { return onestep_beta(params, a); });
    EXPECT_GE(check.empirical_fnr, onestep_beta(params, alpha) - check.tolerance)
        << alpha;
  }
}

TEST(RunAudit, DegenerateRegimeSeparatesAlmostPerfectly) {
  // d >> n drives the per-step level through the roof; the attack becomes
  // essentially perfect (AUC -> 1).
  GradientModel model = standard_model(300, GradientFamily::kGaussian);
  AuditConfig config;
  config.batch_size = 2;
  config.trials = 300;
  config.seed = 12;
  AuditResult result = run_audit(model, config);
  EXPECT_LT(fnr_at_fpr(result.member_scores, result.nonmember_scores, 0.5),
            0.02);
  EXPECT_LT(fnr_at_fpr(result.member_scores, result.nonmember_scores, 0.05),
            0.05);
}

TEST(RunAudit, RejectsInvalidConfigs) {
  GradientModel model = standard_model(3, GradientFamily::kGaussian);
  AuditConfig config;
  config.batch_size = 1;
  config.trials = 200;
  EXPECT_THROW(run_audit(model, config), std::invalid_argument);
  config.batch_size = 8;
  config.trials = 10;
  EXPECT_THROW(run_audit(model, config), std::invalid_argument);
  config.trials = 200;
  config.tau2 = 1.0;  // infinite clip
  EXPECT_THROW(run_audit(model, config), std::invalid_argument);
}

TEST(TraceIo, BinaryRoundTripIsBitExact) {
  GradientTrace trace;
  trace.batch_size = 17;
  CounterRng rng(4, 4);
  for (int t = 0; t < 3; ++t) {
    Eigen::VectorXd mean(5), query(5);
    for (int i = 0; i < 5; ++i) {
      mean[i] = rng.next_normal();
      query[i] = rng.next_normal();
    }
    trace.published_means.push_back(mean);
    trace.query_gradients.push_back(query);
  }
  std::string path =
      (std::filesystem::temp_directory_path() / "gmip_trace_test.gmip").string();
  write_trace(path, trace);
  GradientTrace back = read_trace(path);
  EXPECT_EQ(back.batch_size, 17);
  ASSERT_EQ(back.steps(), 3);
  for (int t = 0; t < 3; ++t) {
    for (int i = 0; i < 5; ++i) {
      EXPECT_EQ(back.published_means[t][i], trace.published_means[t][i]);
      EXPECT_EQ(back.query_gradients[t][i], trace.query_gradients[t][i]);
    }
  }
  std::filesystem::remove(path);
}

TEST(TraceIo, TruncatedFileNamesByteOffset) {
  std::string path =
      (std::filesystem::temp_directory_path() / "gmip_trace_trunc.gmip")
          .string();
  {
    std::ofstream out(path, std::ios::binary);
    out.write("GMIP", 4);
    unsigned char version[4] = {1, 0, 0, 0};
    out.write(reinterpret_cast<char*>(version), 4);
    out.write("\x05", 1);  // header stops mid-field
  }
  try {
    read_trace(path);
    FAIL() << "expected TraceIoError";
  } catch (const TraceIoError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST(TraceIo, CsvAlternativeIsAccepted) {
  std::string path =
      (std::filesystem::temp_directory_path() / "gmip_trace_test.csv").string();
  {
    std::ofstream out(path);
    out << "step,kind,idx,value\n";
    for (int t = 0; t < 2; ++t) {
      for (int i = 0; i < 3; ++i) {
        out << t << ",mean," << i << "," << (t + 0.5 * i) << "\n";
        out << t << ",query," << i << "," << (t - 0.25 * i) << "\n";
      }
    }
  }
  GradientTrace trace = read_trace(path);
  EXPECT_EQ(trace.steps(), 2);
  EXPECT_EQ(trace.dim(), 3);
  EXPECT_DOUBLE_EQ(trace.published_means[1][2], 2.0);
  EXPECT_DOUBLE_EQ(trace.query_gradients[0][1], -0.25);
  std::filesystem::remove(path);
}

TEST(TraceIo, BackgroundRoundTripAndScoring) {
  const int d = 4, n = 30, steps = 2, b = 24;
  CounterRng rng(21, 0);
  GradientTrace trace;
  trace.batch_size = n;
  std::vector<Eigen::MatrixXd> backgrounds;
  for (int t = 0; t < steps; ++t) {
    Eigen::VectorXd mean(d), query(d);
    for (int i = 0; i < d; ++i) {
      mean[i] = rng.next_normal() / std::sqrt(static_cast<double>(n));
      query[i] = rng.next_normal();
    }
    trace.published_means.push_back(mean);
    trace.query_gradients.push_back(query);
    Eigen::MatrixXd rows(b, d);
    for (int r = 0; r < b; ++r) {
      for (int c = 0; c < d; ++c) rows(r, c) = rng.next_normal();
    }
    backgrounds.push_back(rows);
  }
  auto base = std::filesystem::temp_directory_path();
  std::string bg_path = (base / "gmip_bg_test.gmbg").string();
  write_background(bg_path, backgrounds);
  auto back = read_background(bg_path);
  ASSERT_EQ(back.size(), backgrounds.size());
  EXPECT_EQ(back[0](1, 2), backgrounds[0](1, 2));
  TraceScore score = score_trace(trace, back, 1e-6);
  ASSERT_EQ(score.step_log_pvalues.size(), 2u);
  double total = score.step_log_pvalues[0] + score.step_log_pvalues[1];
  EXPECT_NEAR(score.total_log_pvalue, total, 1e-12);
  std::filesystem::remove(bg_path);
}

}  // namespace
}  // namespace gmip
