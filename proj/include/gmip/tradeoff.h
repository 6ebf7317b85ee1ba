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

#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

// Trade-off functions alpha -> beta: the minimal false negative rate an
// attacker can reach at false positive rate alpha. Three representations:
// the Gaussian family g_mu, the exact one-step noisy-SGD curve (a pair of
// non-central chi-squared laws), and tabulated piecewise-linear curves.

namespace gmip {

// Parameters of one step of noisy SGD driving the exact trade-off curve.
struct OneStepParams {
  int batch_size;         // n >= 2
  int dim;                // d >= 1
  double tau2;            // noise variance >= 0
  double clip;            // clipping norm C > 0, may be +infinity
  double susceptibility;  // K >= 0, worst-case whitened query distance

  OneStepParams(int batch_size, int dim, double tau2, double clip,
                double susceptibility);

  // n + tau^2 n^2 / C^2. tau2 > 0 requires a finite clip (checked on
  // construction).
  double n_effective() const;
};

// g_mu(alpha) = Phi(Phi^{-1}(1-alpha) - mu). The mu = 0 curve is the
// diagonal 1 - alpha; endpoints are taken as limits.
double gaussian_beta(double mu, double alpha);

// Exact one-step curve:
//   beta(alpha) = 1 - F_{chi'2_d((neff-1)K)}( neff/(neff-1) *
//                     F^{-1}_{chi'2_d(neff K)}(alpha) ).
// alpha = 0 and alpha = 1 are the limits 1 and 0 (no quantile evaluation).
double onestep_beta(const OneStepParams& params, double alpha);

// Exact inverse of onestep_beta:
//   alpha(beta) = F_{chi'2_d(neff K)}( (neff-1)/neff *
//                     F^{-1}_{chi'2_d((neff-1)K)}(1 - beta) ),
// i.e. the same likelihood-ratio test read with the hypotheses swapped.
// onestep_alpha(params, onestep_beta(params, a)) == a to ~1e-9.
double onestep_alpha(const OneStepParams& params, double beta);

struct CurvePoint {
  double fpr;
  double fnr;
};

class TradeoffCurve {
 public:
  struct Gaussian {
    double mu;
  };
  struct OneStep {
    OneStepParams params;
  };
  struct Tabulated {
    std::vector<CurvePoint> points;  // strictly increasing fpr, convex
  };

  static TradeoffCurve gaussian(double mu);
  static TradeoffCurve one_step(const OneStepParams& params);
  // Projects the points onto their lower convex hull, then validates the
  // trade-off axioms on the hull.
  static TradeoffCurve tabulated(std::vector<CurvePoint> points);

  double beta(double alpha) const;

  bool is_gaussian() const;
  bool is_one_step() const;
  bool is_tabulated() const;
  const std::vector<CurvePoint>& points() const;  // Tabulated only
  double mu() const;                              // Gaussian only
  const OneStepParams& one_step_params() const;   // OneStep only

 private:
  using Repr = std::variant<Gaussian, OneStep, Tabulated>;
  explicit TradeoffCurve(Repr repr);
  Repr repr_;
};

enum class CurveOrder {
  kFirstDominates,   // f uniformly at least as hard as g
  kSecondDominates,  // g uniformly at least as hard as f
  kEqual,
  kIncomparable,
};

// The 1001-point evaluation grid: 500 log-spaced points in [1e-6, 0.1) plus
// 501 linear points in [0.1, 1].
const std::vector<double>& evaluation_grid();

// Pointwise comparison on the evaluation grid with tolerance 1e-9.
CurveOrder compare(const TradeoffCurve& f, const TradeoffCurve& g);

// Privacy level of the composition of independent Gaussian steps:
// sqrt(sum mu_i^2).
double tensor_compose_gaussian(const std::vector<double>& mus);

// Finite weighted family standing in for the distribution over queries in a
// stochastic composition. Weights are positive and sum to 1 within 1e-9.
struct WeightedTestFamily {
  struct Entry {
    double weight;
    TradeoffCurve curve;
  };
  std::vector<Entry> entries;

  explicit WeightedTestFamily(std::vector<Entry> entries);
};

// Smallest global FNR at global FPR alpha over all per-test FPR allocations:
//   min { sum w_i f_i(a_i) : sum w_i a_i = alpha, a_i in [0,1] }.
// Solved by water-filling on the Lagrange multiplier; each f_i is convex so
// the optimum equalizes subgradients.
double stochastic_compose(const WeightedTestFamily& family, double alpha);

// Discretizes a continuous susceptibility distribution into an equal-weight
// family of one-step curves, one atom per quantile midpoint. The default
// resolution is 64 atoms.
WeightedTestFamily susceptibility_family(
    const OneStepParams& base,
    const std::function<double(double)>& susceptibility_quantile,
    int atoms = 64);

// Samples any curve onto a Tabulated one. Grids of at most 32 points are
// linear on [0,1]; larger grids put half the points log-spaced in
// [1e-6, 0.05) and the rest linear on [0.05, 1], plus the exact endpoint 0.
TradeoffCurve tabulate(const TradeoffCurve& curve, int grid_size);

// CSV rows `alpha,beta` with 17 significant digits, one per grid point.
void write_curve_csv(std::ostream& out, const TradeoffCurve& curve);
std::string curve_to_csv(const TradeoffCurve& curve);

}  // namespace gmip
