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

#include "gmip/tradeoff.h"

// Closed-form accounting: per-step privacy level, effective batch size,
// multi-step and subsampled composition, and conversion between the Gaussian
// DP and Gaussian membership-inference privacy parameters.

namespace gmip {

enum class PrivacyNotion { kGmip, kGdp };

struct PrivacyLevel {
  PrivacyNotion notion;
  double mu;  // >= 0, may be +infinity
};

// Dataset-level sampling plan for a training run.
struct SubsamplingPlan {
  int dataset_size;  // N >= 1
  int batch_size;    // 1 <= n <= N
  double epochs;     // E > 0

  SubsamplingPlan(int dataset_size, int batch_size, double epochs);

  // T = E N / n, kept as a real. strict floors it to whole iterations.
  double iterations(bool strict = false) const;
};

// n + tau^2 n^2 / C^2. Throws when tau2 > 0 with an infinite clip.
double n_effective(int batch_size, double tau2, double clip);

// Per-step Gaussian privacy level of one noisy SGD step:
//   mu_step = (d + (2 n_eff - 1) K) / (n_eff sqrt(2d + 4 n_eff K)).
double mu_step(const OneStepParams& params);

// Subsampled composition at ratio c = n sqrt(T) / N:
//   mu = sqrt(2) c sqrt(exp(mu_step^2) Phi(1.5 mu_step)
//                       + 3 Phi(-0.5 mu_step) - 2).
// Strictly increasing in both arguments; mu -> c mu_step as mu_step -> 0.
// mu_step > 40 throws (exp overflow, far outside the meaningful regime).
double compose_subsampled(double mu_step, double ratio);

// k-fold composition of equal Gaussian steps: sqrt(k) mu_step.
double compose_k_steps(double mu_step, int k);

// c = n sqrt(T) / N = sqrt(E n / N).
double subsampling_ratio(const SubsamplingPlan& plan, bool strict = false);

// mu-GDP -> mu-GMIP for one step with the K = d convention:
//   mu_mip = min( sqrt(d / (n + 4 C^2 / mu_dp^2 + 1/2)), mu_dp ).
double dp_to_mip(double mu_dp, int batch_size, int dim, double clip);

// mu-GMIP -> mu-GDP, the printed clip-free finite branch:
//   mu_dp = 2 / sqrt(d / mu_mip^2 - n - 1/2)  if mu_mip < sqrt(2d/(2n+1)),
//   +infinity otherwise.
// The clip argument does not enter the printed conversion; it is kept for
// signature symmetry with dp_to_mip.
double mip_to_dp(double mu_mip, int batch_size, int dim, double clip);

// Converts a level to the other notion via dp_to_mip / mip_to_dp.
PrivacyLevel convert_level(const PrivacyLevel& level, int batch_size, int dim,
                           double clip);

}  // namespace gmip
