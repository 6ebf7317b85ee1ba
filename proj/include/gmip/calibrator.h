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

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmip/accountant.h"

// Solves for the SGD noise level tau reaching a target privacy level under
// GMIP or GDP, including the min-rule (GMIP never needs more noise than GDP
// at the same mu), and reproduces the published calibration table.

namespace gmip {

// Target unreachable within the search bracket. Carries the achievable
// infimum so callers can report it.
class InfeasibleTargetError : public std::runtime_error {
 public:
  InfeasibleTargetError(const std::string& what, double achievable_infimum)
      : std::runtime_error(what), achievable_infimum_(achievable_infimum) {}
  double achievable_infimum() const { return achievable_infimum_; }

 private:
  double achievable_infimum_;
};

struct CalibrationTarget {
  PrivacyNotion notion;
  double target_mu;  // > 0
  SubsamplingPlan plan;
  int dim;                // d >= 1
  double clip;            // C > 0, finite
  double susceptibility;  // K, defaults to d

  CalibrationTarget(PrivacyNotion notion, double target_mu,
                    const SubsamplingPlan& plan, int dim, double clip);
  CalibrationTarget(PrivacyNotion notion, double target_mu,
                    const SubsamplingPlan& plan, int dim, double clip,
                    double susceptibility);
};

// Noise for target_mu-GDP: per-step level 2C/(n tau) pushed through the
// subsampled composition. Always > 0.
double tau_for_gdp(const CalibrationTarget& target);

// Noise for target_mu-GMIP: 0 when the no-noise level already meets the
// target, else the solution of compose(mu_step(tau), c) = target_mu; the
// final answer is min with tau_for_gdp.
double tau_for_gmip(const CalibrationTarget& target);

struct DatasetPreset {
  std::string name;
  int dataset_size;
  int dim;
  int batch_size;
  double epochs;
  double clip;
};

// Hyperparameters of the published utility experiment: cifar10, purchase,
// adult. Accepts an optional "-preset" suffix. Throws on unknown names.
const DatasetPreset& dataset_preset(const std::string& name);
const std::vector<DatasetPreset>& dataset_presets();

// The 20 target levels: log-spaced from 0.4 to 50.
std::vector<double> tau_table_mu_grid();

struct TauTableRow {
  std::string dataset;
  std::string notion;  // "MIP" or "DP"
  std::vector<double> taus;  // one per mu grid value
};

// Recomputes the full 6 x 20 table (three datasets x {MIP, DP}).
std::vector<TauTableRow> reproduce_tau_table();

// The reference values the recomputed table is diffed against.
const std::vector<TauTableRow>& published_tau_table();

// CSV rows `dataset,notion,mu,tau`.
void write_tau_table_csv(std::ostream& out, const std::vector<TauTableRow>& table);
// Aligned text matching the published row layout (taus to 2 decimals,
// half away from zero).
void write_tau_table_text(std::ostream& out, const std::vector<TauTableRow>& table);

}  // namespace gmip
