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
#include <limits>
#include <stdexcept>
#include <string>

namespace gmip {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Neglected Poisson-mixture mass below this threshold terminates the
// non-central series.
constexpr double kMixtureTail = 1e-14;

}  // namespace

NoncentralChiSq::NoncentralChiSq(int dof_in, double noncentrality_in)
    : dof(dof_in), noncentrality(noncentrality_in) {
  if (dof < 1) {
    throw std::invalid_argument("NoncentralChiSq: dof must be >= 1, got " +
                                std::to_string(dof));
  }
  if (!(noncentrality >= 0.0) || !std::isfinite(noncentrality)) {
    throw std::invalid_argument(
        "NoncentralChiSq: noncentrality must be finite and >= 0, got " +
        std::to_string(noncentrality));
  }
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double std_normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double std_normal_pdf(double x) {
  static const double kInvSqrt2Pi = 0.3989422804014327;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// Rational minimax approximation (Acklam), refined by one Halley step on the
// erfc-based CDF. Absolute CDF error after refinement is near machine epsilon.
double std_normal_quantile(double p) {
  if (std::isnan(p)) return p;
  if (p <= 0.0 || p >= 1.0) {
    throw std::domain_error("std_normal_quantile: p must lie in (0,1), got " +
                            std::to_string(p));
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley step: e = Phi(x) - p, x <- x - e/phi(x) damped by the curvature.
  double e = std_normal_cdf(x) - p;
  double u = e / std_normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {

// Series expansion of P(a,x), valid (and fast) for x < a + 1.
double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int k = 1; k < 10000000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  double lg = a * std::log(x) - x - std::lgamma(a);
  return std::exp(lg) * sum;
}

// Modified Lentz continued fraction for Q(a,x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000000; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  double lg = a * std::log(x) - x - std::lgamma(a);
  return std::exp(lg) * h;
}

}  // namespace

double reg_lower_gamma(double s, double x) {
  if (!(s > 0.0)) {
    throw std::invalid_argument("reg_lower_gamma: s must be > 0, got " +
                                std::to_string(s));
  }
  if (!(x >= 0.0)) {
    throw std::invalid_argument("reg_lower_gamma: x must be >= 0, got " +
                                std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < s + 1.0) return gamma_p_series(s, x);
  return 1.0 - gamma_q_cf(s, x);
}

double reg_upper_gamma(double s, double x) {
  if (!(s > 0.0)) {
    throw std::invalid_argument("reg_upper_gamma: s must be > 0, got " +
                                std::to_string(s));
  }
  if (!(x >= 0.0)) {
    throw std::invalid_argument("reg_upper_gamma: x must be >= 0, got " +
                                std::to_string(x));
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x >= s + 1.0) return gamma_q_cf(s, x);
  return 1.0 - gamma_p_series(s, x);
}

double chi2_cdf(int dof, double x) {
  if (x <= 0.0) return 0.0;
  return reg_lower_gamma(0.5 * dof, 0.5 * x);
}

double chi2_sf(int dof, double x) {
  if (x <= 0.0) return 1.0;
  return reg_upper_gamma(0.5 * dof, 0.5 * x);
}

double chi2_quantile(int dof, double p) {
  return noncentral_chi2_quantile(NoncentralChiSq(dof, 0.0), p);
}

namespace {

struct CdfSfPair {
  double cdf;
  double sf;
};

// Poisson mixture of regularized incomplete gamma terms,
//   F(x) = sum_j Pois(j; g/2) * P(d/2 + j, x/2),
// summed outward from the modal Poisson index so the large noncentralities
// the attack produces (g ~ n*K) stay well conditioned. Both tails are
// accumulated in one pass; truncated when the neglected Poisson mass drops
// below kMixtureTail.
CdfSfPair noncentral_mixture(const NoncentralChiSq& law, double x) {
  const double x2 = 0.5 * x;
  const double half_d = 0.5 * law.dof;
  const double lambda = 0.5 * law.noncentrality;

  if (lambda == 0.0) {
    double p = reg_lower_gamma(half_d, x2);
    double q = reg_upper_gamma(half_d, x2);
    return {p, q};
  }

  const long j0 = static_cast<long>(lambda);  // modal Poisson index
  // log Pois(j0; lambda)
  const double log_w0 =
      -lambda + j0 * std::log(lambda) - std::lgamma(static_cast<double>(j0) + 1.0);
  const double w0 = std::exp(log_w0);
  const double a0 = half_d + static_cast<double>(j0);
  const double p0 = reg_lower_gamma(a0, x2);
  const double q0 = reg_upper_gamma(a0, x2);
  // t(a) = x2^a e^{-x2} / Gamma(a+1); the increment P(a,x2) - P(a+1,x2).
  double log_t0 = a0 * std::log(x2) - x2 - std::lgamma(a0 + 1.0);
  const double t0 = std::exp(log_t0);

  double cdf = w0 * p0;
  double sf = w0 * q0;
  double used_mass = w0;

  // Upward sweep j0+1, j0+2, ...
  {
    double w = w0, p = p0, q = q0, t = t0;
    for (long j = j0 + 1; ; ++j) {
      w *= lambda / static_cast<double>(j);
      p -= t;
      if (p < 0.0) p = 0.0;
      q += t;
      if (q > 1.0) q = 1.0;
      t *= x2 / (half_d + static_cast<double>(j));
      cdf += w * p;
      sf += w * q;
      used_mass += w;
      // Past the mode the weights decay at least geometrically; bound the
      // remaining tail by the next term of the dominating geometric series.
      if (static_cast<double>(j) > lambda) {
        double ratio = lambda / (static_cast<double>(j) + 1.0);
        double tail_bound = w * ratio / (1.0 - ratio);
        if (tail_bound < kMixtureTail) break;
      }
      if (j > j0 + 100000000L) {
        throw std::runtime_error("noncentral_chi2: mixture did not converge");
      }
    }
  }

  // Downward sweep j0-1, ..., 0.
  if (j0 > 0) {
    double w = w0, p = p0, q = q0, t = t0;
    for (long j = j0 - 1; j >= 0; --j) {
      w *= static_cast<double>(j + 1) / lambda;
      t *= (half_d + static_cast<double>(j + 1)) / x2;
      p += t;
      if (p > 1.0) p = 1.0;
      q -= t;
      if (q < 0.0) q = 0.0;
      cdf += w * p;
      sf += w * q;
      used_mass += w;
      if (w < kMixtureTail && used_mass > 0.5) break;
    }
  }

  if (cdf > 1.0) cdf = 1.0;
  if (sf > 1.0) sf = 1.0;
  return {cdf, sf};
}

}  // namespace

double noncentral_chi2_cdf(const NoncentralChiSq& law, double x) {
  if (!(x >= 0.0)) {
    throw std::invalid_argument("noncentral_chi2_cdf: x must be >= 0, got " +
                                std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return noncentral_mixture(law, x).cdf;
}

double noncentral_chi2_sf(const NoncentralChiSq& law, double x) {
  if (!(x >= 0.0)) {
    throw std::invalid_argument("noncentral_chi2_sf: x must be >= 0, got " +
                                std::to_string(x));
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return noncentral_mixture(law, x).sf;
}

double noncentral_chi2_pdf(const NoncentralChiSq& law, double x) {
  if (!(x > 0.0)) return 0.0;
  const double x2 = 0.5 * x;
  const double half_d = 0.5 * law.dof;
  const double lambda = 0.5 * law.noncentrality;
  // Mixture of gamma densities, same outward layout as the CDF.
  auto log_gamma_pdf = [&](double a) {
    return (a - 1.0) * std::log(x2) - x2 - std::lgamma(a);
  };
  if (lambda == 0.0) return 0.5 * std::exp(log_gamma_pdf(half_d));
  const long j0 = static_cast<long>(lambda);
  const double log_w0 =
      -lambda + j0 * std::log(lambda) - std::lgamma(static_cast<double>(j0) + 1.0);
  double w = std::exp(log_w0);
  double g = std::exp(log_gamma_pdf(half_d + static_cast<double>(j0)));
  double acc = w * g;
  {
    double wu = w, gu = g;
    for (long j = j0 + 1;; ++j) {
      wu *= lambda / static_cast<double>(j);
      gu *= x2 / (half_d + static_cast<double>(j) - 1.0);
      acc += wu * gu;
      if (static_cast<double>(j) > lambda && wu * (gu + 1.0) < kMixtureTail) break;
      if (j > j0 + 100000000L) break;
    }
  }
  if (j0 > 0) {
    double wd = w, gd = g;
    for (long j = j0 - 1; j >= 0; --j) {
      wd *= static_cast<double>(j + 1) / lambda;
      gd *= (half_d + static_cast<double>(j)) / x2;
      acc += wd * gd;
      if (wd < kMixtureTail) break;
    }
  }
  return 0.5 * acc;
}

double noncentral_chi2_quantile(const NoncentralChiSq& law, double p) {
  if (!(p >= 0.0) || p >= 1.0) {
    if (p == 1.0) {
      throw std::domain_error("noncentral_chi2_quantile: unbounded at p = 1");
    }
    throw std::invalid_argument(
        "noncentral_chi2_quantile: p must lie in [0,1), got " +
        std::to_string(p));
  }
  if (p == 0.0) return 0.0;

  const double d = static_cast<double>(law.dof);
  const double g = law.noncentrality;
  const double mean = d + g;
  const double sd = std::sqrt(2.0 * d + 4.0 * g);

  // Bracket [0, mean + 20 sd] expanded geometrically if the mass is further
  // out than the normal-scale guess.
  double lo = 0.0;
  double hi = mean + 20.0 * sd;
  while (noncentral_chi2_cdf(law, hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) {
      throw std::runtime_error("noncentral_chi2_quantile: bracket overflow");
    }
  }

  // Normal-approximation starting point, then safeguarded Newton: steps that
  // leave the bracket fall back to bisection.
  double x;
  {
    double z = std_normal_quantile(p);
    x = mean + z * sd;
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  }
  double fx = noncentral_chi2_cdf(law, x) - p;
  for (int it = 0; it < 200; ++it) {
    if (std::fabs(fx) <= 1e-12 || (hi - lo) <= 1e-14 * (1.0 + hi)) break;
    if (fx > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    double deriv = noncentral_chi2_pdf(law, x);
    double next = (deriv > 0.0) ? x - fx / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
    fx = noncentral_chi2_cdf(law, x) - p;
  }
  return x;
}

}  // namespace gmip
