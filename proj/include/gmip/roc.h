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
#include <vector>

// Empirical trade-off estimates from attack scores. Positives are members:
// FPR is the fraction of nonmembers classified as members, FNR the fraction
// of members missed.

namespace gmip {

struct RocPoint {
  double fpr;
  double fnr;
};

struct RocEstimate {
  std::vector<RocPoint> points;  // fpr strictly increasing, fnr non-increasing
  int trials_per_class = 0;
};

// Step ROC from per-trial scores; a trial is classified member when its score
// falls below the threshold. Equal scores collapse into one threshold.
RocEstimate roc_from_scores(const std::vector<double>& member_scores,
                            const std::vector<double>& nonmember_scores);

// Empirical FNR at FPR ~ alpha: thresholds at the alpha-quantile of the
// nonmember scores, then counts missed members.
double fnr_at_fpr(std::vector<double> member_scores,
                  std::vector<double> nonmember_scores, double alpha);

// CSV rows `fpr,fnr,tpr`.
void write_roc_csv(std::ostream& out, const RocEstimate& roc);

}  // namespace gmip
