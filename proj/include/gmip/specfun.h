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

// Scalar special functions backing every trade-off and p-value computation:
// standard normal CDF/quantile, regularized incomplete gamma, central and
// non-central chi-squared CDF/survival/quantile. All double precision; tail
// probabilities are exposed as survival values so the low-FPR regime does not
// lose accuracy to cancellation.

namespace gmip {

// Law of sum_{i=1}^{dof} (Z_i + b_i)^2 with Z_i iid standard normal and
// sum b_i^2 = noncentrality. noncentrality == 0 is the central chi-squared.
struct NoncentralChiSq {
  int dof;                // >= 1
  double noncentrality;   // >= 0

  NoncentralChiSq(int dof, double noncentrality);
};

// Phi(x). Exact at 0 by construction; Phi(x) + Phi(-x) = 1 to ~1e-16.
double std_normal_cdf(double x);
// 1 - Phi(x), accurate in the right tail.
double std_normal_sf(double x);
// Standard normal density.
double std_normal_pdf(double x);

// Inverse of Phi on (0,1). Throws std::domain_error at p in {0,1}
// (unbounded quantile). |Phi(quantile(p)) - p| <= 1e-12.
double std_normal_quantile(double p);

// Regularized lower incomplete gamma P(s,x), s > 0, x >= 0.
double reg_lower_gamma(double s, double x);
// Regularized upper incomplete gamma Q(s,x) = 1 - P(s,x).
double reg_upper_gamma(double s, double x);

// Central chi-squared CDF with `dof` degrees of freedom.
double chi2_cdf(int dof, double x);
double chi2_sf(int dof, double x);
double chi2_quantile(int dof, double p);

double noncentral_chi2_cdf(const NoncentralChiSq& law, double x);
double noncentral_chi2_sf(const NoncentralChiSq& law, double x);
double noncentral_chi2_pdf(const NoncentralChiSq& law, double x);
// Inverse CDF on [0,1). quantile(0) = 0; p == 1 throws std::domain_error.
// Round-trips with the CDF to 1e-8.
double noncentral_chi2_quantile(const NoncentralChiSq& law, double p);

}  // namespace gmip
