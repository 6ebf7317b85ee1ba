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
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gmip/specfun.h"

namespace gmip {
namespace {

constexpr double kCompareTol = 1e-9;

}  // namespace

OneStepParams::OneStepParams(int batch_size_in, int dim_in, double tau2_in,
                             double clip_in, double susceptibility_in)
    : batch_size(batch_size_in),
      dim(dim_in),
      tau2(tau2_in),
      clip(clip_in),
      susceptibility(susceptibility_in) {
  if (batch_size < 2) {
    throw std::invalid_argument("OneStepParams: batch size must be >= 2, got " +
                                std::to_string(batch_size));
  }
  if (dim < 1) {
    throw std::invalid_argument("OneStepParams: dim must be >= 1, got " +
                                std::to_string(dim));
  }
  if (!(tau2 >= 0.0)) {
    throw std::invalid_argument("OneStepParams: tau2 must be >= 0, got " +
                                std::to_string(tau2));
  }
  if (!(clip > 0.0)) {
    throw std::invalid_argument("OneStepParams: clip must be > 0, got " +
                                std::to_string(clip));
  }
  if (tau2 > 0.0 && std::isinf(clip)) {
    throw std::invalid_argument(
        "OneStepParams: tau2 > 0 with infinite clip leaves n_effective "
        "undefined");
  }
  if (!(susceptibility >= 0.0) || std::isinf(susceptibility)) {
    throw std::invalid_argument(
        "OneStepParams: susceptibility must be finite and >= 0, got " +
        std::to_string(susceptibility));
  }
}

double OneStepParams::n_effective() const {
  double n = static_cast<double>(batch_size);
  if (tau2 == 0.0) return n;
  return n + tau2 * n * n / (clip * clip);
}

double gaussian_beta(double mu, double alpha) {
  if (!(mu >= 0.0)) {
    throw std::invalid_argument("gaussian_beta: mu must be >= 0, got " +
                                std::to_string(mu));
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("gaussian_beta: alpha must lie in [0,1], got " +
                                std::to_string(alpha));
  }
  if (alpha <= 0.0) return 1.0;
  if (alpha >= 1.0) return 0.0;
  // Phi^{-1}(1 - alpha) computed as -Phi^{-1}(alpha) to keep the small-alpha
  // tail exact.
  double z = -std_normal_quantile(alpha);
  return std_normal_cdf(z - mu);
}

double onestep_beta(const OneStepParams& params, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("onestep_beta: alpha must lie in [0,1], got " +
                                std::to_string(alpha));
  }
  if (alpha <= 0.0) return 1.0;
  if (alpha >= 1.0) return 0.0;
  double neff = params.n_effective();
  NoncentralChiSq member_law(params.dim, (neff - 1.0) * params.susceptibility);
  NoncentralChiSq nonmember_law(params.dim, neff * params.susceptibility);
  double q = noncentral_chi2_quantile(nonmember_law, alpha);
  return noncentral_chi2_sf(member_law, neff / (neff - 1.0) * q);
}

double onestep_alpha(const OneStepParams& params, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("onestep_alpha: beta must lie in [0,1], got " +
                                std::to_string(beta));
  }
  if (beta <= 0.0) return 1.0;
  if (beta >= 1.0) return 0.0;
  double neff = params.n_effective();
  NoncentralChiSq member_law(params.dim, (neff - 1.0) * params.susceptibility);
  NoncentralChiSq nonmember_law(params.dim, neff * params.susceptibility);
  double q = noncentral_chi2_quantile(member_law, 1.0 - beta);
  return noncentral_chi2_cdf(nonmember_law, (neff - 1.0) / neff * q);
}

TradeoffCurve::TradeoffCurve(Repr repr) : repr_(std::move(repr)) {}

TradeoffCurve TradeoffCurve::gaussian(double mu) {
  if (!(mu >= 0.0)) {
    throw std::invalid_argument("TradeoffCurve: mu must be >= 0, got " +
                                std::to_string(mu));
  }
  return TradeoffCurve(Gaussian{mu});
}

TradeoffCurve TradeoffCurve::one_step(const OneStepParams& params) {
  return TradeoffCurve(OneStep{params});
}

namespace {

// Lower convex hull in (fpr, fnr), Andrew's monotone chain. Guards compare()
// against floating-point non-convexity in sampled curves.
std::vector<CurvePoint> lower_hull(std::vector<CurvePoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.fpr < b.fpr || (a.fpr == b.fpr && a.fnr < b.fnr);
  });
  std::vector<CurvePoint> hull;
  for (const CurvePoint& p : pts) {
    if (!hull.empty() && hull.back().fpr == p.fpr) continue;  // keep lowest
    while (hull.size() >= 2) {
      const CurvePoint& a = hull[hull.size() - 2];
      const CurvePoint& b = hull[hull.size() - 1];
      double cross = (b.fpr - a.fpr) * (p.fnr - a.fnr) -
                     (b.fnr - a.fnr) * (p.fpr - a.fpr);
      if (cross <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  return hull;
}

}  // namespace

TradeoffCurve TradeoffCurve::tabulated(std::vector<CurvePoint> points) {
  if (points.size() < 2) {
    throw std::invalid_argument("TradeoffCurve: need at least 2 points");
  }
  for (const CurvePoint& p : points) {
    if (!(p.fpr >= 0.0 && p.fpr <= 1.0) || !(p.fnr >= 0.0 && p.fnr <= 1.0)) {
      throw std::invalid_argument("TradeoffCurve: points must lie in [0,1]^2");
    }
  }
  std::vector<CurvePoint> hull = lower_hull(points);
  if (hull.size() < 2) {
    throw std::invalid_argument("TradeoffCurve: degenerate tabulation");
  }
  // Project every input abscissa back onto the hull so the stored grid is
  // preserved while the evaluated map is exactly convex.
  std::sort(points.begin(), points.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.fpr < b.fpr; });
  std::vector<CurvePoint> projected;
  projected.reserve(points.size());
  size_t seg = 0;
  for (const CurvePoint& p : points) {
    if (!projected.empty() && projected.back().fpr == p.fpr) continue;
    while (seg + 2 < hull.size() && hull[seg + 1].fpr <= p.fpr) ++seg;
    const CurvePoint& a = hull[seg];
    const CurvePoint& b = hull[seg + 1];
    double fnr;
    if (p.fpr <= a.fpr) {
      fnr = a.fnr;
    } else if (p.fpr >= b.fpr) {
      fnr = b.fnr;
    } else {
      double t = (p.fpr - a.fpr) / (b.fpr - a.fpr);
      fnr = a.fnr + t * (b.fnr - a.fnr);
    }
    projected.push_back({p.fpr, fnr});
  }
  for (size_t i = 0; i + 1 < projected.size(); ++i) {
    if (projected[i + 1].fnr > projected[i].fnr + 1e-12) {
      throw std::invalid_argument(
          "TradeoffCurve: tabulated curve is not non-increasing");
    }
  }
  for (const CurvePoint& p : projected) {
    if (p.fnr > 1.0 - p.fpr + 1e-9) {
      throw std::invalid_argument(
          "TradeoffCurve: tabulated curve violates beta <= 1 - alpha");
    }
  }
  return TradeoffCurve(Tabulated{std::move(projected)});
}

double TradeoffCurve::beta(double alpha) const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("TradeoffCurve: alpha must lie in [0,1], got " +
                                std::to_string(alpha));
  }
  if (const auto* g = std::get_if<Gaussian>(&repr_)) {
    return gaussian_beta(g->mu, alpha);
  }
  if (const auto* s = std::get_if<OneStep>(&repr_)) {
    return onestep_beta(s->params, alpha);
  }
  const auto& pts = std::get<Tabulated>(repr_).points;
  if (alpha <= pts.front().fpr) return pts.front().fnr;
  if (alpha >= pts.back().fpr) return pts.back().fnr;
  auto it = std::lower_bound(
      pts.begin(), pts.end(), alpha,
      [](const CurvePoint& p, double a) { return p.fpr < a; });
  const CurvePoint& hi = *it;
  const CurvePoint& lo = *(it - 1);
  double t = (alpha - lo.fpr) / (hi.fpr - lo.fpr);
  return lo.fnr + t * (hi.fnr - lo.fnr);
}

bool TradeoffCurve::is_gaussian() const {
  return std::holds_alternative<Gaussian>(repr_);
}
bool TradeoffCurve::is_one_step() const {
  return std::holds_alternative<OneStep>(repr_);
}
bool TradeoffCurve::is_tabulated() const {
  return std::holds_alternative<Tabulated>(repr_);
}

const std::vector<CurvePoint>& TradeoffCurve::points() const {
  return std::get<Tabulated>(repr_).points;
}

double TradeoffCurve::mu() const { return std::get<Gaussian>(repr_).mu; }

const OneStepParams& TradeoffCurve::one_step_params() const {
  return std::get<OneStep>(repr_).params;
}

const std::vector<double>& evaluation_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    g.reserve(1001);
    const double lo = std::log(1e-6);
    const double hi = std::log(0.1);
    for (int k = 0; k < 500; ++k) {
      g.push_back(std::exp(lo + (hi - lo) * k / 500.0));
    }
    for (int k = 0; k <= 500; ++k) {
      g.push_back(0.1 + 0.9 * k / 500.0);
    }
    return g;
  }();
  return grid;
}

CurveOrder compare(const TradeoffCurve& f, const TradeoffCurve& g) {
  bool f_ge = true, g_ge = true, equal = true;
  for (double a : evaluation_grid()) {
    double bf = f.beta(a);
    double bg = g.beta(a);
    if (std::fabs(bf - bg) > kCompareTol) equal = false;
    if (bf < bg - kCompareTol) f_ge = false;
    if (bg < bf - kCompareTol) g_ge = false;
    if (!f_ge && !g_ge) return CurveOrder::kIncomparable;
  }
  if (equal) return CurveOrder::kEqual;
  if (f_ge) return CurveOrder::kFirstDominates;
  if (g_ge) return CurveOrder::kSecondDominates;
  return CurveOrder::kIncomparable;
}

double tensor_compose_gaussian(const std::vector<double>& mus) {
  if (mus.empty()) {
    throw std::invalid_argument("tensor_compose_gaussian: empty list");
  }
  double ss = 0.0;
  for (double m : mus) {
    if (!(m >= 0.0)) {
      throw std::invalid_argument(
          "tensor_compose_gaussian: mu must be >= 0, got " + std::to_string(m));
    }
    ss += m * m;
  }
  return std::sqrt(ss);
}

WeightedTestFamily::WeightedTestFamily(std::vector<Entry> entries_in)
    : entries(std::move(entries_in)) {
  if (entries.empty()) {
    throw std::invalid_argument("WeightedTestFamily: need at least one entry");
  }
  double total = 0.0;
  for (const Entry& e : entries) {
    if (!(e.weight > 0.0)) {
      throw std::invalid_argument("WeightedTestFamily: weights must be > 0");
    }
    total += e.weight;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("WeightedTestFamily: weights sum to " +
                                std::to_string(total) + ", expected 1");
  }
}

namespace {

// Central-difference slope, one-sided at the ends of [0,1].
double curve_slope(const TradeoffCurve& c, double a) {
  const double h = 1e-5;
  double lo = std::max(0.0, a - h);
  double hi = std::min(1.0, a + h);
  return (c.beta(hi) - c.beta(lo)) / (hi - lo);
}

// Smallest allocation a with slope(a) >= lambda; slopes of a convex curve are
// non-decreasing, so this is a bisection.
double allocation_for_multiplier(const TradeoffCurve& c, double lambda) {
  if (curve_slope(c, 0.0) >= lambda) return 0.0;
  if (curve_slope(c, 1.0) < lambda) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (curve_slope(c, mid) >= lambda) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double stochastic_compose(const WeightedTestFamily& family, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument(
        "stochastic_compose: alpha must lie in [0,1], got " +
        std::to_string(alpha));
  }
  const auto& entries = family.entries;
  if (entries.size() == 1) return entries[0].curve.beta(alpha);
  if (alpha == 0.0 || alpha == 1.0) {
    double b = 0.0;
    for (const auto& e : entries) b += e.weight * e.curve.beta(alpha);
    return b;
  }

  auto budget = [&](double lambda, std::vector<double>* alloc) {
    double used = 0.0;
    for (size_t i = 0; i < entries.size(); ++i) {
      double a = allocation_for_multiplier(entries[i].curve, lambda);
      if (alloc) (*alloc)[i] = a;
      used += entries[i].weight * a;
    }
    return used;
  };

  // Bracket the multiplier: at lambda = 0 every allocation saturates at 1;
  // expand downward until the budget falls below alpha.
  double lam_hi = 0.0;
  double lam_lo = -1.0;
  while (budget(lam_lo, nullptr) > alpha) {
    lam_hi = lam_lo;
    lam_lo *= 16.0;
    if (lam_lo < -1e300) break;
  }
  std::vector<double> alloc_lo(entries.size()), alloc_hi(entries.size());
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lam_lo + lam_hi);
    if (budget(mid, nullptr) > alpha) {
      lam_hi = mid;
    } else {
      lam_lo = mid;
    }
  }
  double used_lo = budget(lam_lo, &alloc_lo);
  double used_hi = budget(lam_hi, &alloc_hi);
  // At a flat segment the budget jumps across the multiplier; the objective
  // is affine there, so the convex mix meeting the budget exactly is optimal.
  double theta = 0.0;
  if (used_hi > used_lo) {
    theta = std::clamp((alpha - used_lo) / (used_hi - used_lo), 0.0, 1.0);
  }
  double beta = 0.0;
  for (size_t i = 0; i < entries.size(); ++i) {
    double a = (1.0 - theta) * alloc_lo[i] + theta * alloc_hi[i];
    beta += entries[i].weight * entries[i].curve.beta(a);
  }
  return beta;
}

WeightedTestFamily susceptibility_family(
    const OneStepParams& base,
    const std::function<double(double)>& susceptibility_quantile, int atoms) {
  if (atoms < 1) {
    throw std::invalid_argument("susceptibility_family: atoms must be >= 1");
  }
  std::vector<WeightedTestFamily::Entry> entries;
  entries.reserve(atoms);
  for (int i = 0; i < atoms; ++i) {
    double p = (i + 0.5) / atoms;
    double k = susceptibility_quantile(p);
    if (!(k >= 0.0)) {
      throw std::invalid_argument(
          "susceptibility_family: quantile function returned a negative "
          "susceptibility");
    }
    OneStepParams params(base.batch_size, base.dim, base.tau2, base.clip, k);
    entries.push_back({1.0 / atoms, TradeoffCurve::one_step(params)});
  }
  return WeightedTestFamily(std::move(entries));
}

TradeoffCurve tabulate(const TradeoffCurve& curve, int grid_size) {
  if (grid_size < 3) {
    throw std::invalid_argument("tabulate: grid size must be >= 3, got " +
                                std::to_string(grid_size));
  }
  std::vector<double> grid;
  grid.reserve(grid_size);
  if (grid_size <= 32) {
    for (int k = 0; k < grid_size; ++k) {
      grid.push_back(static_cast<double>(k) / (grid_size - 1));
    }
  } else {
    grid.push_back(0.0);
    int n_log = (grid_size - 1) / 2;
    int n_lin = grid_size - 1 - n_log;
    const double lo = std::log(1e-6);
    const double hi = std::log(0.05);
    for (int k = 0; k < n_log; ++k) {
      grid.push_back(std::exp(lo + (hi - lo) * k / n_log));
    }
    for (int k = 0; k < n_lin; ++k) {
      grid.push_back(0.05 + 0.95 * k / (n_lin - 1));
    }
  }
  std::vector<CurvePoint> pts;
  pts.reserve(grid.size());
  for (double a : grid) pts.push_back({a, curve.beta(a)});
  return TradeoffCurve::tabulated(std::move(pts));
}

void write_curve_csv(std::ostream& out, const TradeoffCurve& curve) {
  const TradeoffCurve tab = curve.is_tabulated() ? curve : tabulate(curve, 1001);
  out << "alpha,beta\n";
  char buf[64];
  for (const CurvePoint& p : tab.points()) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.fpr, p.fnr);
    out << buf;
  }
}

std::string curve_to_csv(const TradeoffCurve& curve) {
  std::ostringstream oss;
  write_curve_csv(oss, curve);
  return oss.str();
}

}  // namespace gmip
