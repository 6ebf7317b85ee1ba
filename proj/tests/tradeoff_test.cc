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

#include "gmip/tradeoff.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "gmip/specfun.h"
#include "gtest/gtest.h"
#include "testutil.h"

namespace gmip {
namespace {

void expect_tradeoff_axioms(const std::function<double(double)>& beta,
                            const std::string& label) {
  const auto& grid = evaluation_grid();
  double prev = 2.0;
  std::vector<double> values;
  values.reserve(grid.size());
  for (double a : grid) {
    double b = beta(a);
    EXPECT_LE(b, 1.0 - a + 1e-9) << label << " at alpha=" << a;
    EXPECT_LE(b, prev + 1e-9) << label << " not non-increasing at " << a;
    values.push_back(b);
    prev = b;
  }
  // Convexity via second differences on consecutive grid triples.
  for (size_t i = 1; i + 1 < grid.size(); ++i) {
    double l = (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
    double r = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
    EXPECT_GE(r, l - 1e-7) << label << " not convex near alpha=" << grid[i];
  }
}

TEST(GaussianBeta, AnchorValues) {
  EXPECT_NEAR(gaussian_beta(0.0, 0.3), 0.7, 1e-15);
  EXPECT_NEAR(gaussian_beta(1.0, 0.5), std_normal_cdf(-1.0), 1e-15);
  EXPECT_NEAR(gaussian_beta(1.0, 0.5), 0.158655, 1e-6);
  double expected = std_normal_cdf(std_normal_quantile(0.95) - 1.14);
  EXPECT_NEAR(gaussian_beta(1.14, 0.05), expected, 1e-12);
  EXPECT_DOUBLE_EQ(gaussian_beta(2.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(gaussian_beta(2.0, 1.0), 0.0);
}

TEST(GaussianBeta, SelfInverse) {
  for (double mu : {0.0, 0.3, 1.0, 2.5, 10.0}) {
    for (double a = 0.02; a < 1.0; a += 0.07) {
      EXPECT_NEAR(gaussian_beta(mu, gaussian_beta(mu, a)), a, 1e-8)
          << "mu=" << mu << " alpha=" << a;
    }
  }
}

TEST(OneStepBeta, Endpoints) {
  OneStepParams params(50, 20, 0.0, std::numeric_limits<double>::infinity(),
                       20.0);
  EXPECT_DOUBLE_EQ(onestep_beta(params, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(onestep_beta(params, 0.0), 1.0);
}

TEST(OneStepBeta, ConvergesToGaussianLimit) {
  // d=650, n=500 sits within 0.02 of g_1.1396 everywhere.
  OneStepParams params(500, 650, 0.0, std::numeric_limits<double>::infinity(),
                       650.0);
  double sup = 0.0;
  for (double a : evaluation_grid()) {
    sup = std::max(sup,
                   std::fabs(onestep_beta(params, a) - gaussian_beta(1.1396, a)));
  }
  EXPECT_LT(sup, 0.02);
}

TEST(OneStepBeta, MonteCarloLikelihoodRatioOracle) {
  // Exact member/nonmember statistic laws sampled directly: member
  // S ~ chi'2_d((n-1)K)/n, nonmember S ~ chi'2_d(nK)/(n-1); FNR of the
  // threshold test at alpha = 0.1 must match the closed form.
  const int n = 10, d = 4;
  const double k = 4.0;
  const int kTrials = 1000000;
  CounterRng member_rng(31, 0), nonmember_rng(31, 1);
  std::vector<double> member(kTrials), nonmember(kTrials);
  for (int i = 0; i < kTrials; ++i) {
    member[i] = testutil::sample_noncentral_chi2(d, (n - 1) * k, member_rng) / n;
    nonmember[i] =
        testutil::sample_noncentral_chi2(d, n * k, nonmember_rng) / (n - 1);
  }
  OneStepParams params(n, d, 0.0, std::numeric_limits<double>::infinity(), k);
  auto check = testutil::fnr_ci_check(
      member, nonmember, 0.1,
      [&](double a) { return onestep_beta(params, a); });
  EXPECT_NEAR(check.empirical_fnr, onestep_beta(params, 0.1), check.tolerance);
}

TEST(OneStepBeta, InverseReproducesAppendixForm) {
  OneStepParams params(50, 20, 0.5, 5.0, 20.0);
  for (double a : {1e-4, 0.01, 0.1, 0.3, 0.5, 0.8, 0.99}) {
    double b = onestep_beta(params, a);
    // Closed-form inverse (the derivation's own trade-off equation).
    EXPECT_NEAR(onestep_alpha(params, b), a, 1e-9) << a;
    // Numerical inversion of the curve lands on the same map.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 50; ++it) {
      double mid = 0.5 * (lo + hi);
      if (onestep_beta(params, mid) > b) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    EXPECT_NEAR(0.5 * (lo + hi), onestep_alpha(params, b), 1e-6) << a;
  }
}

TEST(OneStepBeta, MonotoneInNoiseAndSusceptibility) {
  const double kInf = std::numeric_limits<double>::infinity();
  for (double a : {0.05, 0.3, 0.7}) {
    double prev = -1.0;
    for (double tau2 : {0.0, 0.25, 1.0, 4.0}) {
      OneStepParams p(40, 8, tau2, 5.0, 8.0);
      double b = onestep_beta(p, a);
      EXPECT_GE(b, prev - 1e-10) << "tau2=" << tau2 << " alpha=" << a;
      prev = b;
    }
    // Larger susceptibility helps the attacker: beta decreases.
    prev = 2.0;
    for (double k : {1.0, 4.0, 8.0, 20.0}) {
      OneStepParams p(40, 8, 0.0, kInf, k);
      double b = onestep_beta(p, a);
      EXPECT_LE(b, prev + 1e-10) << "k=" << k;
      prev = b;
    }
  }
}

TEST(OneStepParams, Validation) {
  const double kInf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(OneStepParams(1, 5, 0.0, kInf, 5.0), std::invalid_argument);
  EXPECT_THROW(OneStepParams(10, 0, 0.0, kInf, 5.0), std::invalid_argument);
  EXPECT_THROW(OneStepParams(10, 5, 1.0, kInf, 5.0), std::invalid_argument);
  EXPECT_THROW(OneStepParams(10, 5, -1.0, 2.0, 5.0), std::invalid_argument);
  OneStepParams ok(10, 5, 1.0, 2.0, 5.0);
  EXPECT_NEAR(ok.n_effective(), 10.0 + 1.0 * 100.0 / 4.0, 1e-12);
}

TEST(Compare, GaussianFamilyOrdering) {
  auto g1 = TradeoffCurve::gaussian(1.0);
  auto g2 = TradeoffCurve::gaussian(2.0);
  EXPECT_EQ(compare(g1, g2), CurveOrder::kFirstDominates);
  EXPECT_EQ(compare(g2, g1), CurveOrder::kSecondDominates);
  EXPECT_EQ(compare(g1, TradeoffCurve::gaussian(1.0)), CurveOrder::kEqual);
}

TEST(Compare, NoiseMakesOneStepHarder) {
  const double kInf = std::numeric_limits<double>::infinity();
  auto quiet = TradeoffCurve::one_step(OneStepParams(60, 12, 0.0, kInf, 12.0));
  auto noisy = TradeoffCurve::one_step(OneStepParams(60, 12, 1.0, 10.0, 12.0));
  EXPECT_EQ(compare(quiet, noisy), CurveOrder::kSecondDominates);
}

TEST(Compare, CrossingCurvesAreIncomparable) {
  // A tabulated curve that crosses g_1: above it at tiny alpha, far below by
  // alpha = 0.02.
  std::vector<CurvePoint> pts = {{0.0, 1.0}, {0.02, 0.2}, {1.0, 0.0}};
  auto crossing = TradeoffCurve::tabulated(pts);
  EXPECT_EQ(compare(crossing, TradeoffCurve::gaussian(1.0)),
            CurveOrder::kIncomparable);
}

TEST(TensorComposeGaussian, AnchorValues) {
  EXPECT_DOUBLE_EQ(tensor_compose_gaussian({0.7}), 0.7);
  EXPECT_DOUBLE_EQ(tensor_compose_gaussian({3.0, 4.0}), 5.0);
  std::vector<double> five(5, 1.1396);
  EXPECT_NEAR(tensor_compose_gaussian(five), 2.548, 5e-4);
  EXPECT_NEAR(tensor_compose_gaussian(five), 2.54, 0.01);
  EXPECT_THROW(tensor_compose_gaussian({}), std::invalid_argument);
}

TEST(StochasticCompose, SingleCurveIsIdentity) {
  WeightedTestFamily family({{1.0, TradeoffCurve::gaussian(1.3)}});
  for (double a : {0.01, 0.2, 0.5, 0.9}) {
    EXPECT_NEAR(stochastic_compose(family, a), gaussian_beta(1.3, a), 1e-9);
  }
}

TEST(StochasticCompose, MatchesBruteForceGrid) {
  WeightedTestFamily family({{0.5, TradeoffCurve::gaussian(0.5)},
                             {0.5, TradeoffCurve::gaussian(2.0)}});
  double alpha = 0.1;
  // 1e4-point sweep of the first allocation, the second pinned by the budget.
  double best = 2.0;
  for (int i = 0; i <= 10000; ++i) {
    double a1 = static_cast<double>(i) / 10000.0;
    double a2 = (alpha - 0.5 * a1) / 0.5;
    if (a2 < 0.0 || a2 > 1.0) continue;
    best = std::min(best, 0.5 * gaussian_beta(0.5, a1) +
                              0.5 * gaussian_beta(2.0, a2));
  }
  EXPECT_NEAR(stochastic_compose(family, alpha), best, 1e-3);
}

TEST(StochasticCompose, RespectsWorstCaseLowerBound) {
  // Every member is at least as hard as f* = g_2.5, so the composition is too.
  WeightedTestFamily family({{0.3, TradeoffCurve::gaussian(2.5)},
                             {0.3, TradeoffCurve::gaussian(1.7)},
                             {0.4, TradeoffCurve::gaussian(0.6)}});
  for (double a : {0.02, 0.1, 0.4, 0.8}) {
    EXPECT_GE(stochastic_compose(family, a), gaussian_beta(2.5, a) - 1e-9);
  }
}

TEST(StochasticCompose, DiagonalFamilyStaysDiagonal) {
  WeightedTestFamily family({{0.5, TradeoffCurve::gaussian(0.0)},
                             {0.5, TradeoffCurve::gaussian(0.0)}});
  for (double a : {0.0, 0.25, 0.5, 1.0}) {
    EXPECT_NEAR(stochastic_compose(family, a), 1.0 - a, 1e-6);
  }
}

TEST(StochasticCompose, OutputSatisfiesAxioms) {
  WeightedTestFamily family({{0.6, TradeoffCurve::gaussian(0.8)},
                             {0.4, TradeoffCurve::gaussian(2.2)}});
  expect_tradeoff_axioms(
      [&](double a) { return stochastic_compose(family, a); },
      "stochastic composition");
}

TEST(SusceptibilityFamily, DiscretizesAChiSquaredQueryDistribution) {
  // K ~ chi-squared(d) discretized at quantile midpoints; the composition
  // lies between the hardest (smallest K) and easiest member curves and
  // remains a valid trade-off.
  const int d = 6, n = 40;
  OneStepParams base(n, d, 0.0, std::numeric_limits<double>::infinity(), d);
  auto chi2_q = [&](double p) {
    return noncentral_chi2_quantile(NoncentralChiSq(d, 0.0), p);
  };
  WeightedTestFamily family = susceptibility_family(base, chi2_q, 8);
  ASSERT_EQ(family.entries.size(), 8u);
  double k_lo = chi2_q(0.5 / 8.0), k_hi = chi2_q(7.5 / 8.0);
  for (double alpha : {0.05, 0.5}) {
    double composed = stochastic_compose(family, alpha);
    OneStepParams hardest(n, d, 0.0, base.clip, k_lo);
    OneStepParams easiest(n, d, 0.0, base.clip, k_hi);
    EXPECT_LE(composed, onestep_beta(hardest, alpha) + 1e-9);
    EXPECT_GE(composed, onestep_beta(easiest, alpha) - 1e-9);
  }
  // Default atom count documented as 64.
  WeightedTestFamily dflt = susceptibility_family(base, chi2_q);
  EXPECT_EQ(dflt.entries.size(), 64u);
}

TEST(Tabulate, CoarseGridIsLinear) {
  auto tab = tabulate(TradeoffCurve::gaussian(0.0), 11);
  ASSERT_EQ(tab.points().size(), 11u);
  for (int k = 0; k <= 10; ++k) {
    EXPECT_NEAR(tab.points()[k].fpr, k / 10.0, 1e-15);
    EXPECT_NEAR(tab.points()[k].fnr, 1.0 - k / 10.0, 1e-12);
  }
}

TEST(Tabulate, FineGridTracksTheCurve) {
  auto g1 = TradeoffCurve::gaussian(1.0);
  auto tab = tabulate(g1, 1001);
  EXPECT_EQ(tab.points().size(), 1001u);
  double sup = 0.0;
  for (double a : evaluation_grid()) {
    sup = std::max(sup, std::fabs(tab.beta(a) - g1.beta(a)));
  }
  EXPECT_LT(sup, 2e-3);
}

TEST(Tabulate, OneStepCurvePassesAxioms) {
  OneStepParams params(50, 20, 0.0, std::numeric_limits<double>::infinity(),
                       20.0);
  auto tab = tabulate(TradeoffCurve::one_step(params), 1001);
  expect_tradeoff_axioms([&](double a) { return tab.beta(a); },
                         "tabulated one-step");
}

TEST(CurveCsv, HeaderAndRowCount) {
  std::string csv = curve_to_csv(TradeoffCurve::gaussian(1.14));
  std::istringstream lines(csv);
  std::string line;
  ASSERT_TRUE(std::getline(lines, line));
  EXPECT_EQ(line, "alpha,beta");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 1001);
}

TEST(EvaluationGrid, MatchesDesignedLayout) {
  const auto& g = evaluation_grid();
  ASSERT_EQ(g.size(), 1001u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-6);
  EXPECT_DOUBLE_EQ(g[500], 0.1);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}

}  // namespace
}  // namespace gmip
