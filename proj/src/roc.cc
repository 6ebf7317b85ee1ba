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

#include "gmip/roc.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace gmip {

RocEstimate roc_from_scores(const std::vector<double>& member_scores,
                            const std::vector<double>& nonmember_scores) {
  if (member_scores.empty() || nonmember_scores.empty()) {
    throw std::invalid_argument("roc_from_scores: need scores for both classes");
  }
  std::vector<double> ms = member_scores;
  std::vector<double> ns = nonmember_scores;
  std::sort(ms.begin(), ms.end());
  std::sort(ns.begin(), ns.end());

  std::vector<double> thresholds;
  thresholds.reserve(ms.size() + ns.size() + 1);
  thresholds.insert(thresholds.end(), ms.begin(), ms.end());
  thresholds.insert(thresholds.end(), ns.begin(), ns.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  const double n0 = static_cast<double>(ns.size());
  const double n1 = static_cast<double>(ms.size());
  RocEstimate roc;
  roc.trials_per_class = static_cast<int>(std::min(ms.size(), ns.size()));
  roc.points.push_back({0.0, 1.0});
  for (double t : thresholds) {
    // Classify member when score < t is impossible for t = min; use <= so the
    // sweep reaches (1,0) at the maximal threshold.
    double fpr =
        static_cast<double>(std::upper_bound(ns.begin(), ns.end(), t) - ns.begin()) /
        n0;
    double fnr =
        1.0 -
        static_cast<double>(std::upper_bound(ms.begin(), ms.end(), t) - ms.begin()) /
            n1;
    if (fpr == roc.points.back().fpr) {
      roc.points.back().fnr = std::min(roc.points.back().fnr, fnr);
    } else {
      roc.points.push_back({fpr, fnr});
    }
  }
  if (roc.points.back().fpr < 1.0) roc.points.push_back({1.0, 0.0});
  return roc;
}

double fnr_at_fpr(std::vector<double> member_scores,
                  std::vector<double> nonmember_scores, double alpha) {
  if (member_scores.empty() || nonmember_scores.empty()) {
    throw std::invalid_argument("fnr_at_fpr: need scores for both classes");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("fnr_at_fpr: alpha must lie in (0,1)");
  }
  std::sort(nonmember_scores.begin(), nonmember_scores.end());
  long k = std::lround(alpha * static_cast<double>(nonmember_scores.size()));
  if (k < 1) k = 1;
  if (k > static_cast<long>(nonmember_scores.size())) {
    k = static_cast<long>(nonmember_scores.size());
  }
  double threshold = nonmember_scores[static_cast<size_t>(k - 1)];
  long missed = 0;
  for (double s : member_scores) {
    if (s > threshold) ++missed;
  }
  return static_cast<double>(missed) / static_cast<double>(member_scores.size());
}

void write_roc_csv(std::ostream& out, const RocEstimate& roc) {
  out << "fpr,fnr,tpr\n";
  char buf[96];
  for (const RocPoint& p : roc.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.fpr, p.fnr,
                  1.0 - p.fnr);
    out << buf;
  }
}

}  // namespace gmip
