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

#include "gmip/specfun.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"
#include "testutil.h"

namespace gmip {
namespace {

TEST(StdNormalCdf, AnchorValues) {
  EXPECT_DOUBLE_EQ(std_normal_cdf(0.0), 0.5);
  // High-precision series oracle at the classic 97.5% point.
  EXPECT_NEAR(std_normal_cdf(1.96), testutil::normal_cdf_series(1.96), 1e-14);
  EXPECT_NEAR(std_normal_cdf(1.96), 0.975002, 5e-7);
  EXPECT_NEAR(std_normal_cdf(-3.0), 1.0 - std_normal_cdf(3.0), 1e-15);
}

TEST(StdNormalCdf, SymmetryIdentity) {
  for (double x = -8.0; x <= 8.0; x += 0.173) {
    EXPECT_NEAR(std_normal_cdf(x) + std_normal_cdf(-x), 1.0, 1e-12) << x;
  }
}

TEST(StdNormalCdf, SurvivalMatchesComplementInBulk) {
  for (double x : {-2.0, -0.5, 0.0, 0.7, 2.5}) {
    EXPECT_NEAR(std_normal_sf(x), 1.0 - std_normal_cdf(x), 1e-15);
  }
  // Deep tail keeps relative accuracy where 1 - cdf would be pure noise.
  EXPECT_GT(std_normal_sf(10.0), 0.0);
  EXPECT_LT(std_normal_sf(10.0), 1e-22);
}

TEST(StdNormalQuantile, AnchorValues) {
  EXPECT_DOUBLE_EQ(std_normal_quantile(0.5), 0.0);
  EXPECT_NEAR(std_normal_quantile(0.975002), 1.96, 1e-5);
  EXPECT_NEAR(std_normal_quantile(0.1), -std_normal_quantile(0.9), 1e-12);
}

TEST(StdNormalQuantile, RoundTrip) {
  for (double p : {1e-12, 1e-8, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.999, 1 - 1e-9}) {
    EXPECT_NEAR(std_normal_cdf(std_normal_quantile(p)), p, 1e-12) << p;
  }
}

TEST(StdNormalQuantile, UnboundedEndpoints) {
  EXPECT_THROW(std_normal_quantile(0.0), std::domain_error);
  EXPECT_THROW(std_normal_quantile(1.0), std::domain_error);
}

TEST(RegLowerGamma, AnchorValues) {
  EXPECT_DOUBLE_EQ(reg_lower_gamma(0.5, 0.0), 0.0);
  EXPECT_NEAR(reg_lower_gamma(1.0, 1.0), 1.0 - std::exp(-1.0), 1e-15);
}

TEST(RegLowerGamma, MonteCarloOracle) {
  // P(2.5, 3.7) against 1e6 draws from Gamma(2.5, 1).
  CounterRng rng(20260810, 1);
  const int kDraws = 1000000;
  long below = 0;
  for (int i = 0; i < kDraws; ++i) {
    if (testutil::sample_gamma(2.5, rng) <= 3.7) ++below;
  }
  double estimate = static_cast<double>(below) / kDraws;
  double p = reg_lower_gamma(2.5, 3.7);
  EXPECT_NEAR(p, estimate, 3.0 * testutil::binomial_se(p, kDraws));
}

TEST(RegLowerGamma, MonotoneWithComplement) {
  double prev = -1.0;
  for (double x = 0.0; x < 40.0; x += 0.5) {
    double p = reg_lower_gamma(3.25, x);
    EXPECT_GE(p, prev);
    EXPECT_NEAR(p + reg_upper_gamma(3.25, x), 1.0, 1e-12);
    prev = p;
  }
  EXPECT_NEAR(reg_lower_gamma(3.25, 1e4), 1.0, 1e-15);
}

TEST(NoncentralChi2, CentralReduction) {
  NoncentralChiSq law(3, 0.0);
  for (double x : {0.1, 1.0, 2.5, 7.0, 20.0}) {
    EXPECT_NEAR(noncentral_chi2_cdf(law, x), chi2_cdf(3, x), 1e-14) << x;
  }
}

// Appendix-style closed form for one degree of freedom:
// F(s) = Phi(sqrt(s) - sqrt(g)) - Phi(-sqrt(s) - sqrt(g)).
TEST(NoncentralChi2, OneDofClosedForm) {
  for (double gamma : {0.0, 0.5, 1.0, 4.0, 25.0, 400.0}) {
    NoncentralChiSq law(1, gamma);
    for (double s = 0.05; s < 40.0 + gamma; s *= 1.7) {
      double closed = std_normal_cdf(std::sqrt(s) - std::sqrt(gamma)) -
                      std_normal_cdf(-std::sqrt(s) - std::sqrt(gamma));
      EXPECT_NEAR(noncentral_chi2_cdf(law, s), closed, 1e-9)
          << "gamma=" << gamma << " s=" << s;
    }
  }
}

TEST(NoncentralChi2, LargeDofMonteCarloOracle) {
  // d = 650, gamma = 650, x = 1300 against 1e6 simulated quadratic forms.
  const int kDraws = 1000000;
  CounterRng rng(99, 7);
  long below = 0;
  for (int i = 0; i < kDraws; ++i) {
    if (testutil::sample_noncentral_chi2(650, 650.0, rng) <= 1300.0) ++below;
  }
  double estimate = static_cast<double>(below) / kDraws;
  double p = noncentral_chi2_cdf(NoncentralChiSq(650, 650.0), 1300.0);
  EXPECT_NEAR(p, estimate, 3.0 * testutil::binomial_se(p, kDraws));
}

TEST(NoncentralChi2, MonotoneInArgumentAndNoncentrality) {
  NoncentralChiSq law(5, 12.0);
  double prev = -1.0;
  for (double x = 0.0; x < 80.0; x += 1.0) {
    double p = noncentral_chi2_cdf(law, x);
    EXPECT_GE(p, prev - 1e-15);
    prev = p;
  }
  // Non-increasing in gamma at fixed x, swept over [0, 10 d].
  for (int d : {1, 4, 16}) {
    double x = 2.0 * d;
    double last = 2.0;
    for (double g = 0.0; g <= 10.0 * d; g += 0.5 * d) {
      double p = noncentral_chi2_cdf(NoncentralChiSq(d, g), x);
      EXPECT_LE(p, last + 1e-12) << "d=" << d << " g=" << g;
      last = p;
    }
  }
}

TEST(NoncentralChi2, SurvivalComplement) {
  NoncentralChiSq law(10, 30.0);
  for (double x = 0.5; x < 150.0; x *= 1.6) {
    EXPECT_NEAR(noncentral_chi2_cdf(law, x) + noncentral_chi2_sf(law, x), 1.0,
                1e-12);
  }
}

TEST(NoncentralChi2Quantile, AnchorValues) {
  EXPECT_DOUBLE_EQ(noncentral_chi2_quantile(NoncentralChiSq(7, 3.0), 0.0), 0.0);
  // Square of the two-sided normal point.
  EXPECT_NEAR(noncentral_chi2_quantile(NoncentralChiSq(1, 0.0), 0.95), 3.841459,
              1e-4);
  EXPECT_THROW(noncentral_chi2_quantile(NoncentralChiSq(3, 1.0), 1.0),
               std::domain_error);
}

TEST(NoncentralChi2Quantile, RoundTrip) {
  NoncentralChiSq law(10, 5.0);
  for (double p : {0.01, 0.5, 0.99}) {
    double q = noncentral_chi2_quantile(law, p);
    EXPECT_NEAR(noncentral_chi2_cdf(law, q), p, 1e-8) << p;
  }
}

TEST(NoncentralChi2Quantile, RoundTripAcrossParameterGrid) {
  for (int d : {1, 10, 650}) {
    for (double g : {0.0, 1.0 * d, 10.0 * d}) {
      NoncentralChiSq law(d, g);
      for (double p : {1e-6, 0.01, 0.3, 0.9, 0.999}) {
        double q = noncentral_chi2_quantile(law, p);
        EXPECT_NEAR(noncentral_chi2_cdf(law, q), p, 1e-8)
            << "d=" << d << " g=" << g << " p=" << p;
      }
    }
  }
}

TEST(NoncentralChi2, RejectsBadParameters) {
  EXPECT_THROW(NoncentralChiSq(0, 1.0), std::invalid_argument);
  EXPECT_THROW(NoncentralChiSq(2, -0.5), std::invalid_argument);
  EXPECT_THROW(reg_lower_gamma(-1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(reg_lower_gamma(1.0, -2.0), std::invalid_argument);
}

}  // namespace
}  // namespace gmip
