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

#include "gmip/calibrator.h"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace gmip {
namespace {

// Inverse of compose_subsampled in its first argument at fixed ratio.
// The map is continuous and strictly increasing with value 0 at 0.
double solve_step_level(double target_mu, double ratio) {
  double lo = 0.0;
  double hi = 1.0;
  while (compose_subsampled(hi, ratio) < target_mu) {
    lo = hi;
    hi *= 2.0;
    if (hi > 39.0) {
      hi = 39.0;
      if (compose_subsampled(hi, ratio) < target_mu) {
        throw InfeasibleTargetError(
            "calibrator: target mu " + std::to_string(target_mu) +
                " exceeds the composable range",
            compose_subsampled(hi, ratio));
      }
      break;
    }
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (compose_subsampled(mid, ratio) < target_mu) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-12 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

double gmip_level_at_tau(const CalibrationTarget& t, double tau, double ratio) {
  OneStepParams params(t.plan.batch_size, t.dim, tau * tau, t.clip,
                       t.susceptibility);
  return compose_subsampled(mu_step(params), ratio);
}

}  // namespace

CalibrationTarget::CalibrationTarget(PrivacyNotion notion_in, double target_mu_in,
                                     const SubsamplingPlan& plan_in, int dim_in,
                                     double clip_in)
    : CalibrationTarget(notion_in, target_mu_in, plan_in, dim_in, clip_in,
                        static_cast<double>(dim_in)) {}

CalibrationTarget::CalibrationTarget(PrivacyNotion notion_in, double target_mu_in,
                                     const SubsamplingPlan& plan_in, int dim_in,
                                     double clip_in, double susceptibility_in)
    : notion(notion_in),
      target_mu(target_mu_in),
      plan(plan_in),
      dim(dim_in),
      clip(clip_in),
      susceptibility(susceptibility_in) {
  if (!(target_mu > 0.0)) {
    throw std::invalid_argument("CalibrationTarget: target mu must be > 0");
  }
  if (dim < 1) {
    throw std::invalid_argument("CalibrationTarget: dim must be >= 1");
  }
  if (!(clip > 0.0) || std::isinf(clip)) {
    throw std::invalid_argument("CalibrationTarget: clip must be finite and > 0");
  }
  if (!(susceptibility >= 0.0)) {
    throw std::invalid_argument("CalibrationTarget: susceptibility must be >= 0");
  }
}

double tau_for_gdp(const CalibrationTarget& target) {
  double c = subsampling_ratio(target.plan);
  double step_level = solve_step_level(target.target_mu, c);
  // Dong's noise parameter: per-step mu_DP = 1/sigma = 2C/(n tau).
  return 2.0 * target.clip / (target.plan.batch_size * step_level);
}

double tau_for_gmip(const CalibrationTarget& target) {
  double c = subsampling_ratio(target.plan);
  double no_noise = gmip_level_at_tau(target, 0.0, c);
  double tau_mip;
  if (no_noise <= target.target_mu) {
    tau_mip = 0.0;
  } else {
    // mu is continuous and strictly decreasing in tau; bisect on log tau.
    double lo = std::log(1e-8);
    double hi = std::log(1e6);
    double floor_mu = gmip_level_at_tau(target, 1e6, c);
    if (floor_mu > target.target_mu) {
      throw InfeasibleTargetError(
          "calibrator: target mu " + std::to_string(target.target_mu) +
              " lies below the achievable infimum " + std::to_string(floor_mu),
          floor_mu);
    }
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (gmip_level_at_tau(target, std::exp(mid), c) > target.target_mu) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= 1e-12) break;
    }
    tau_mip = std::exp(0.5 * (lo + hi));
  }
  // min-rule: a GDP-calibrated run is never worse for GMIP.
  return std::min(tau_mip, tau_for_gdp(target));
}

const std::vector<DatasetPreset>& dataset_presets() {
  static const std::vector<DatasetPreset> presets = {
      {"cifar10", 48000, 650, 400, 10.0, 500.0},
      {"purchase", 54855, 2580, 795, 3.0, 2000.0},
      {"adult", 43000, 1026, 1000, 20.0, 800.0},
  };
  return presets;
}

const DatasetPreset& dataset_preset(const std::string& name) {
  std::string key = name;
  const std::string suffix = "-preset";
  if (key.size() > suffix.size() &&
      key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0) {
    key.resize(key.size() - suffix.size());
  }
  for (char& ch : key) ch = static_cast<char>(std::tolower(ch));
  for (const DatasetPreset& p : dataset_presets()) {
    if (p.name == key) return p;
  }
  throw std::invalid_argument("unknown dataset preset: " + name);
}

std::vector<double> tau_table_mu_grid() {
  std::vector<double> mus;
  mus.reserve(20);
  for (int k = 0; k < 20; ++k) {
    mus.push_back(0.4 * std::pow(50.0 / 0.4, k / 19.0));
  }
  return mus;
}

std::vector<TauTableRow> reproduce_tau_table() {
  static const char* kDisplay[] = {"CIFAR-10", "Purchase", "Adult"};
  std::vector<double> mus = tau_table_mu_grid();
  std::vector<TauTableRow> table;
  int idx = 0;
  for (const DatasetPreset& p : dataset_presets()) {
    SubsamplingPlan plan(p.dataset_size, p.batch_size, p.epochs);
    TauTableRow mip{kDisplay[idx], "MIP", {}};
    TauTableRow dp{kDisplay[idx], "DP", {}};
    for (double mu : mus) {
      CalibrationTarget target(PrivacyNotion::kGmip, mu, plan, p.dim, p.clip);
      mip.taus.push_back(tau_for_gmip(target));
      dp.taus.push_back(tau_for_gdp(target));
    }
    table.push_back(std::move(mip));
    table.push_back(std::move(dp));
    ++idx;
  }
  return table;
}

const std::vector<TauTableRow>& published_tau_table() {
  static const std::vector<TauTableRow> table = {
      {"CIFAR-10", "MIP", {2.84, 2.44, 2.13, 0, 0, 0, 0, 0, 0, 0,
                           0, 0, 0, 0, 0, 0, 0, 0, 0, 0}},
      {"CIFAR-10", "DP",  {2.84, 2.44, 2.13, 1.89, 1.70, 1.55, 1.42, 1.32,
                           1.24, 1.17, 1.11, 1.06, 1.02, 0.98, 0.94, 0.91,
                           0.88, 0.85, 0.83, 0.81}},
      {"Purchase", "MIP", {4.72, 4.14, 3.68, 3.32, 3.04, 2.81, 0, 0, 0, 0,
                           0, 0, 0, 0, 0, 0, 0, 0, 0, 0}},
      {"Purchase", "DP",  {4.72, 4.14, 3.68, 3.32, 3.04, 2.81, 2.62, 2.46,
                           2.32, 2.21, 2.11, 2.02, 1.94, 1.87, 1.81, 1.75,
                           1.70, 1.65, 1.61, 1.57}},
      {"Adult", "MIP",    {3.38, 2.77, 2.30, 1.93, 1.65, 0, 0, 0, 0, 0,
                           0, 0, 0, 0, 0, 0, 0, 0, 0, 0}},
      {"Adult", "DP",     {3.38, 2.77, 2.30, 1.93, 1.65, 1.43, 1.26, 1.13,
                           1.02, 0.94, 0.87, 0.81, 0.77, 0.73, 0.69, 0.66,
                           0.63, 0.61, 0.59, 0.57}},
  };
  return table;
}

void write_tau_table_csv(std::ostream& out,
                         const std::vector<TauTableRow>& table) {
  std::vector<double> mus = tau_table_mu_grid();
  out << "dataset,notion,mu,tau\n";
  char buf[128];
  for (const TauTableRow& row : table) {
    for (size_t i = 0; i < row.taus.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g\n",
                    row.dataset.c_str(), row.notion.c_str(), mus[i],
                    row.taus[i]);
      out << buf;
    }
  }
}

void write_tau_table_text(std::ostream& out,
                          const std::vector<TauTableRow>& table) {
  std::vector<double> mus = tau_table_mu_grid();
  char buf[64];
  out << "mu =            ";
  for (double mu : mus) {
    std::snprintf(buf, sizeof(buf), " %6.2f", mu);
    out << buf;
  }
  out << "\n";
  for (const TauTableRow& row : table) {
    std::string label = row.dataset + " (" + row.notion + ")";
    std::snprintf(buf, sizeof(buf), "%-16s", label.c_str());
    out << buf;
    for (double tau : row.taus) {
      std::snprintf(buf, sizeof(buf), " %6.2f", tau);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace gmip
