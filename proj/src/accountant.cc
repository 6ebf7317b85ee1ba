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

#include "gmip/accountant.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gmip/specfun.h"

namespace gmip {

SubsamplingPlan::SubsamplingPlan(int dataset_size_in, int batch_size_in,
                                 double epochs_in)
    : dataset_size(dataset_size_in),
      batch_size(batch_size_in),
      epochs(epochs_in) {
  if (dataset_size < 1) {
    throw std::invalid_argument("SubsamplingPlan: dataset size must be >= 1");
  }
  if (batch_size < 1 || batch_size > dataset_size) {
    throw std::invalid_argument(
        "SubsamplingPlan: batch size must lie in [1, dataset size], got " +
        std::to_string(batch_size));
  }
  if (!(epochs > 0.0) || !std::isfinite(epochs)) {
    throw std::invalid_argument("SubsamplingPlan: epochs must be positive");
  }
}

double SubsamplingPlan::iterations(bool strict) const {
  double t = epochs * dataset_size / batch_size;
  return strict ? std::floor(t) : t;
}

double n_effective(int batch_size, double tau2, double clip) {
  if (batch_size < 2) {
    throw std::invalid_argument("n_effective: batch size must be >= 2, got " +
                                std::to_string(batch_size));
  }
  if (!(tau2 >= 0.0)) {
    throw std::invalid_argument("n_effective: tau2 must be >= 0");
  }
  if (!(clip > 0.0)) {
    throw std::invalid_argument("n_effective: clip must be > 0");
  }
  double n = static_cast<double>(batch_size);
  if (tau2 == 0.0) return n;
  if (std::isinf(clip)) {
    throw std::invalid_argument(
        "n_effective: undefined for tau2 > 0 with infinite clip");
  }
  return n + tau2 * n * n / (clip * clip);
}

double mu_step(const OneStepParams& params) {
  double neff = params.n_effective();
  double d = static_cast<double>(params.dim);
  double k = params.susceptibility;
  return (d + (2.0 * neff - 1.0) * k) / (neff * std::sqrt(2.0 * d + 4.0 * neff * k));
}

double compose_subsampled(double mu_step, double ratio) {
  if (!(mu_step >= 0.0)) {
    throw std::invalid_argument("compose_subsampled: mu_step must be >= 0");
  }
  if (!(ratio > 0.0)) {
    throw std::invalid_argument("compose_subsampled: ratio must be > 0");
  }
  if (mu_step > 40.0) {
    throw std::domain_error(
        "compose_subsampled: mu_step > 40 overflows exp(mu_step^2); outside "
        "the meaningful regime");
  }
  double bracket = std::exp(mu_step * mu_step) * std_normal_cdf(1.5 * mu_step) +
                   3.0 * std_normal_cdf(-0.5 * mu_step) - 2.0;
  if (bracket < 0.0) bracket = 0.0;
  return std::sqrt(2.0) * ratio * std::sqrt(bracket);
}

double compose_k_steps(double mu_step, int k) {
  if (!(mu_step >= 0.0)) {
    throw std::invalid_argument("compose_k_steps: mu_step must be >= 0");
  }
  if (k < 1) {
    throw std::invalid_argument("compose_k_steps: k must be >= 1, got " +
                                std::to_string(k));
  }
  return std::sqrt(static_cast<double>(k)) * mu_step;
}

double subsampling_ratio(const SubsamplingPlan& plan, bool strict) {
  double t = plan.iterations(strict);
  return plan.batch_size * std::sqrt(t) / plan.dataset_size;
}

double dp_to_mip(double mu_dp, int batch_size, int dim, double clip) {
  if (!(mu_dp > 0.0)) {
    throw std::invalid_argument("dp_to_mip: mu_dp must be > 0");
  }
  if (!(clip > 0.0) || std::isinf(clip)) {
    throw std::invalid_argument("dp_to_mip: clip must be finite and > 0");
  }
  double n = static_cast<double>(batch_size);
  double d = static_cast<double>(dim);
  double term = std::sqrt(d / (n + 4.0 * clip * clip / (mu_dp * mu_dp) + 0.5));
  return std::min(term, mu_dp);
}

double mip_to_dp(double mu_mip, int batch_size, int dim, double /*clip*/) {
  if (!(mu_mip > 0.0)) {
    throw std::invalid_argument("mip_to_dp: mu_mip must be > 0");
  }
  double n = static_cast<double>(batch_size);
  double d = static_cast<double>(dim);
  double threshold = std::sqrt(2.0 * d / (2.0 * n + 1.0));
  if (mu_mip >= threshold) return std::numeric_limits<double>::infinity();
  return 2.0 / std::sqrt(d / (mu_mip * mu_mip) - n - 0.5);
}

PrivacyLevel convert_level(const PrivacyLevel& level, int batch_size, int dim,
                           double clip) {
  if (level.notion == PrivacyNotion::kGdp) {
    return {PrivacyNotion::kGmip, dp_to_mip(level.mu, batch_size, dim, clip)};
  }
  return {PrivacyNotion::kGdp, mip_to_dp(level.mu, batch_size, dim, clip)};
}

}  // namespace gmip
