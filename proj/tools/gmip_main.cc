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

// Command-line front end: trade-off curves, closed-form accounting, noise
// calibration, published-table reproduction, and empirical audits.
//
// Exit codes: 0 success, 2 usage error, 3 infeasible calibration target,
// 4 I/O or parse error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gmip/accountant.h"
#include "gmip/calibrator.h"
#include "gmip/glir.h"
#include "gmip/linreg_lrt.h"
#include "gmip/roc.h"
#include "gmip/sgd.h"
#include "gmip/tradeoff.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

std::string fmt6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Bare file names land in GMIP_OUT_DIR when it is set; explicit paths are
// used as given.
std::string resolve_output(const std::string& path) {
  const char* dir = std::getenv("GMIP_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return path;
  std::filesystem::path p(path);
  if (p.is_absolute() || p.has_parent_path()) return path;
  return (std::filesystem::path(dir) / p).string();
}

std::ofstream open_output(const std::string& path) {
  std::string resolved = resolve_output(path);
  std::ofstream out(resolved);
  if (!out) {
    throw gmip::TraceIoError("cannot open output file " + resolved);
  }
  return out;
}

double parse_clip(const std::string& text) {
  try {
    size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse clip value '" + text + "'");
  }
}

struct AuditedFprPolicy {
  std::vector<double> fprs = {0.01, 0.05, 0.1, 0.25, 0.5};
};

// Pass/fail summary at the audited FPRs. Two-sided when `tight`, otherwise a
// one-sided check that the attack does not beat the bound. The tolerance
// combines the member-side binomial error with the nonmember threshold error
// propagated through the analytical slope.
bool print_ci_summary(const std::vector<double>& member_scores,
                      const std::vector<double>& nonmember_scores,
                      const std::vector<double>& fprs,
                      const std::function<double(double)>& analytic,
                      bool tight) {
  bool all_ok = true;
  for (double alpha : fprs) {
    double fnr = gmip::fnr_at_fpr(member_scores, nonmember_scores, alpha);
    double beta = analytic(alpha);
    double h = std::min(1e-4, 0.5 * alpha);
    double slope = std::fabs(analytic(alpha + h) - analytic(alpha - h)) / (2 * h);
    double n1 = static_cast<double>(member_scores.size());
    double n0 = static_cast<double>(nonmember_scores.size());
    double se = std::sqrt(std::max(beta * (1 - beta), 1e-12) / n1 +
                          slope * slope * alpha * (1 - alpha) / n0);
    bool ok = tight ? std::fabs(fnr - beta) <= 3.0 * se
                    : fnr >= beta - 3.0 * se;
    all_ok = all_ok && ok;
    std::cout << "fpr=" << fmt6(alpha) << " empirical_fnr=" << fmt6(fnr)
              << " analytical_fnr=" << fmt6(beta) << " tol=" << fmt6(3.0 * se)
              << (ok ? " PASS" : " FAIL") << "\n";
  }
  return all_ok;
}

// ---------------------------------------------------------------- tradeoff

struct TradeoffArgs {
  std::vector<double> gmip;
  std::vector<std::string> onestep;
  int grid = 1001;
  std::string out;
  std::string format = "csv";
};

int run_tradeoff(const TradeoffArgs& args) {
  if (args.gmip.empty() == args.onestep.empty()) {
    std::cerr << "tradeoff: exactly one of --gmip or --onestep is required\n";
    return kExitUsage;
  }
  std::optional<gmip::TradeoffCurve> curve;
  if (!args.gmip.empty()) {
    curve = gmip::TradeoffCurve::gaussian(args.gmip[0]);
  } else {
    const auto& v = args.onestep;
    gmip::OneStepParams params(std::stoi(v[0]), std::stoi(v[1]), std::stod(v[2]),
                               parse_clip(v[3]), std::stod(v[4]));
    curve = gmip::TradeoffCurve::one_step(params);
  }
  gmip::TradeoffCurve tab = gmip::tabulate(*curve, args.grid);
  if (curve->is_one_step()) {
    double mu = gmip::mu_step(curve->one_step_params());
    double sup = 0.0;
    for (const gmip::CurvePoint& p : tab.points()) {
      sup = std::max(sup, std::fabs(p.fnr - gmip::gaussian_beta(mu, p.fpr)));
    }
    std::cout << "mu_step = " << fmt6(mu)
              << "\ngaussian_approx_sup_gap = " << fmt6(sup) << "\n";
  }

  std::string path = args.out.empty() ? std::string("tradeoff_curve.csv")
                                      : args.out;
  if (args.format == "csv") {
    auto out = open_output(path);
    gmip::write_curve_csv(out, tab);
  } else if (args.format == "json") {
    nlohmann::json doc;
    doc["kind"] = !args.gmip.empty() ? "gaussian" : "onestep";
    if (!args.gmip.empty()) doc["mu"] = args.gmip[0];
    auto& pts = doc["points"] = nlohmann::json::array();
    for (const gmip::CurvePoint& p : tab.points()) {
      pts.push_back({p.fpr, p.fnr});
    }
    auto out = open_output(path);
    out << doc.dump(2) << "\n";
  } else if (args.format == "text") {
    auto out = open_output(path);
    out << "alpha  beta\n";
    for (const gmip::CurvePoint& p : tab.points()) {
      out << fmt6(p.fpr) << "  " << fmt6(p.fnr) << "\n";
    }
  } else {
    std::cerr << "tradeoff: unknown format '" << args.format << "'\n";
    return kExitUsage;
  }
  std::cout << "wrote " << resolve_output(path) << "\n";
  return 0;
}

// -------------------------------------------------------------- accountant

struct AccountantArgs {
  int n = 0;
  int d = 0;
  double tau2 = 0.0;
  std::string clip = "inf";
  double k = -1.0;  // defaults to d
  int steps = 0;
  std::vector<std::string> subsample;  // N epochs
  std::string convert;
  double mu = 0.0;
  std::string format = "text";
  std::string out;
};

int run_accountant(const AccountantArgs& args) {
  if (!args.convert.empty()) {
    double clip = parse_clip(args.clip);
    if (args.convert != "dp-to-mip" && args.convert != "mip-to-dp") {
      std::cerr << "accountant: unknown conversion '" << args.convert << "'\n";
      return kExitUsage;
    }
    gmip::PrivacyLevel level{args.convert == "dp-to-mip"
                                 ? gmip::PrivacyNotion::kGdp
                                 : gmip::PrivacyNotion::kGmip,
                             args.mu};
    gmip::PrivacyLevel out = gmip::convert_level(level, args.n, args.d, clip);
    std::cout << (std::isinf(out.mu) ? std::string("inf") : fmt6(out.mu))
              << "\n";
    return 0;
  }

  double clip = parse_clip(args.clip);
  double k = args.k < 0.0 ? static_cast<double>(args.d) : args.k;
  gmip::OneStepParams params(args.n, args.d, args.tau2, clip, k);
  double neff = params.n_effective();
  double step = gmip::mu_step(params);
  double composed = step;
  std::string mode = "single-step";
  if (args.steps > 0) {
    composed = gmip::compose_k_steps(step, args.steps);
    mode = "k-steps";
  } else if (!args.subsample.empty()) {
    gmip::SubsamplingPlan plan(std::stoi(args.subsample[0]), args.n,
                               std::stod(args.subsample[1]));
    composed = gmip::compose_subsampled(step, gmip::subsampling_ratio(plan));
    mode = "subsampled";
  }

  if (args.format == "json") {
    nlohmann::json doc;
    doc["n"] = args.n;
    doc["d"] = args.d;
    doc["tau2"] = args.tau2;
    doc["clip"] = std::isinf(clip) ? nlohmann::json("inf") : nlohmann::json(clip);
    doc["k"] = k;
    doc["n_effective"] = neff;
    doc["mu_step"] = step;
    doc["mu_composed"] = composed;
    doc["composition"] = mode;
    if (args.steps > 0) doc["steps"] = args.steps;
    if (!args.subsample.empty()) {
      doc["dataset_size"] = std::stoi(args.subsample[0]);
      doc["epochs"] = std::stod(args.subsample[1]);
    }
    std::string text = doc.dump(2);
    if (!args.out.empty()) {
      auto out = open_output(args.out);
      out << text << "\n";
    }
    std::cout << text << "\n";
  } else {
    std::cout << "n_effective = " << fmt6(neff) << "\n"
              << "mu_step = " << fmt6(step) << "\n"
              << "mu_composed (" << mode << ") = " << fmt6(composed) << "\n";
  }
  return 0;
}

// --------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string notion = "gmip";
  double mu = 0.0;
  std::string dataset;
  int big_n = 0;
  int batch = 0;
  double epochs = 0.0;
  std::string clip = "inf";
  int d = 0;
  double k = -1.0;
};

int run_calibrate(const CalibrateArgs& args) {
  int big_n = args.big_n, batch = args.batch, d = args.d;
  double epochs = args.epochs;
  double clip;
  if (!args.dataset.empty()) {
    const gmip::DatasetPreset& preset = gmip::dataset_preset(args.dataset);
    big_n = preset.dataset_size;
    batch = preset.batch_size;
    epochs = preset.epochs;
    clip = preset.clip;
    d = preset.dim;
  } else {
    if (big_n <= 0 || batch <= 0 || epochs <= 0.0 || d <= 0) {
      std::cerr << "calibrate: need --dataset or all of --N --batch --epochs "
                   "--clip --d\n";
      return kExitUsage;
    }
    clip = parse_clip(args.clip);
  }
  gmip::PrivacyNotion notion;
  if (args.notion == "gdp" || args.notion == "dp") {
    notion = gmip::PrivacyNotion::kGdp;
  } else if (args.notion == "gmip" || args.notion == "mip") {
    notion = gmip::PrivacyNotion::kGmip;
  } else {
    std::cerr << "calibrate: unknown notion '" << args.notion << "'\n";
    return kExitUsage;
  }
  gmip::SubsamplingPlan plan(big_n, batch, epochs);
  double k = args.k < 0.0 ? static_cast<double>(d) : args.k;
  gmip::CalibrationTarget target(notion, args.mu, plan, d, clip, k);
  double tau = notion == gmip::PrivacyNotion::kGdp ? gmip::tau_for_gdp(target)
                                                   : gmip::tau_for_gmip(target);
  double ratio = gmip::subsampling_ratio(plan);
  double achieved;
  if (notion == gmip::PrivacyNotion::kGdp) {
    achieved = gmip::compose_subsampled(2.0 * clip / (batch * tau), ratio);
  } else {
    // The guaranteed GMIP level is the better of the two accounting routes.
    gmip::OneStepParams p(batch, d, tau * tau, clip, k);
    achieved = gmip::compose_subsampled(gmip::mu_step(p), ratio);
    if (tau > 0.0) {
      achieved = std::min(
          achieved,
          gmip::compose_subsampled(2.0 * clip / (batch * tau), ratio));
    }
  }
  std::cout << "tau = " << fmt6(tau) << "\n"
            << "achieved_mu = " << fmt6(achieved) << "\n";
  return 0;
}

// --------------------------------------------------------------- reproduce

struct ReproduceArgs {
  std::string what;
  std::string format = "text";
  std::string out;
};

int run_reproduce(const ReproduceArgs& args) {
  if (args.what != "tau-table") {
    std::cerr << "reproduce: unknown target '" << args.what
              << "' (expected tau-table)\n";
    return kExitUsage;
  }
  auto table = gmip::reproduce_tau_table();
  const auto& published = gmip::published_tau_table();
  if (args.format == "csv") {
    if (!args.out.empty()) {
      auto out = open_output(args.out);
      gmip::write_tau_table_csv(out, table);
    } else {
      gmip::write_tau_table_csv(std::cout, table);
    }
  } else {
    if (!args.out.empty()) {
      auto out = open_output(args.out);
      gmip::write_tau_table_text(out, table);
    } else {
      gmip::write_tau_table_text(std::cout, table);
    }
  }
  // Diff against the published cells.
  double max_dev = 0.0;
  int over_threshold = 0;
  for (size_t r = 0; r < table.size(); ++r) {
    for (size_t c = 0; c < table[r].taus.size(); ++c) {
      double dev = std::fabs(table[r].taus[c] - published[r].taus[c]);
      max_dev = std::max(max_dev, dev);
      if (dev > 0.01) ++over_threshold;
    }
  }
  std::cout << "max |tau - published| = " << fmt6(max_dev) << "\n"
            << "cells differing by more than 0.01: " << over_threshold << "\n";
  return over_threshold == 0 ? 0 : 1;
}

// ------------------------------------------------------------------- audit

struct AuditGlirSimArgs {
  int n = 0;
  int d = 0;
  int trials = 0;
  int steps = 1;
  double tau2 = 0.0;
  std::string clip = "inf";
  int estimate = 0;  // background samples; 0 = exact parameters
  double ridge = 1e-6;
  std::string family = "gaussian";
  std::uint64_t seed = 0;
  std::string out_prefix = "glir_audit";
  std::vector<double> fprs;
};

int run_audit_glir_sim(const AuditGlirSimArgs& args) {
  gmip::GradientModel model(
      Eigen::VectorXd::Zero(args.d), Eigen::MatrixXd::Identity(args.d, args.d),
      args.family == "uniform" ? gmip::GradientFamily::kUniform
                               : gmip::GradientFamily::kGaussian);
  gmip::AuditConfig config;
  config.batch_size = args.n;
  config.trials = args.trials;
  config.steps = args.steps;
  config.tau2 = args.tau2;
  config.clip = parse_clip(args.clip);
  config.seed = args.seed;
  if (args.estimate > 0) {
    config.estimation.exact = false;
    config.estimation.sample_count = args.estimate;
    config.estimation.ridge = args.ridge;
  }
  gmip::AuditResult result = gmip::run_audit(model, config);

  gmip::OneStepParams params(args.n, args.d, config.tau2, config.clip, args.d);
  std::function<double(double)> analytic;
  bool tight = args.steps == 1 && args.estimate == 0;
  if (args.steps == 1) {
    analytic = [params](double a) { return gmip::onestep_beta(params, a); };
  } else {
    double mu = gmip::compose_k_steps(gmip::mu_step(params), args.steps);
    analytic = [mu](double a) { return gmip::gaussian_beta(mu, a); };
  }

  auto emp = open_output(args.out_prefix + "_empirical.csv");
  gmip::write_roc_csv(emp, result.roc);
  auto ana = open_output(args.out_prefix + "_analytical.csv");
  ana << "alpha,beta\n";
  for (double a : gmip::evaluation_grid()) {
    ana << fmt17(a) << "," << fmt17(analytic(a)) << "\n";
  }
  std::vector<double> fprs =
      args.fprs.empty() ? AuditedFprPolicy{}.fprs : args.fprs;
  bool ok = print_ci_summary(result.member_scores, result.nonmember_scores,
                             fprs, analytic, tight);
  std::cout << (ok ? "CI summary: PASS" : "CI summary: FAIL") << "\n";
  return ok ? 0 : 1;
}

struct AuditGlirTraceArgs {
  std::string trace;
  std::string background;
  int n = 0;  // overrides/supplies the batch size for CSV traces
  double ridge = 1e-6;
  std::string out;
};

int run_audit_glir_trace(const AuditGlirTraceArgs& args) {
  gmip::GradientTrace trace = gmip::read_trace(args.trace);
  if (trace.batch_size < 2) {
    if (args.n < 2) {
      std::cerr << "audit glir-trace: CSV traces carry no batch size; pass "
                   "--n\n";
      return kExitUsage;
    }
    trace.batch_size = args.n;
  }
  auto backgrounds = gmip::read_background(args.background);
  gmip::TraceScore score = gmip::score_trace(trace, backgrounds, args.ridge);
  std::cout << "step,statistic,susceptibility,log_p\n";
  for (size_t t = 0; t < score.step_log_pvalues.size(); ++t) {
    std::cout << t << "," << fmt6(score.step_statistics[t]) << ","
              << fmt6(score.step_susceptibilities[t]) << ","
              << fmt6(score.step_log_pvalues[t]) << "\n";
  }
  std::cout << "p_total_log = " << fmt6(score.total_log_pvalue) << "\n";
  if (!args.out.empty()) {
    auto out = open_output(args.out);
    out << "step,statistic,susceptibility,log_p\n";
    for (size_t t = 0; t < score.step_log_pvalues.size(); ++t) {
      out << t << "," << fmt17(score.step_statistics[t]) << ","
          << fmt17(score.step_susceptibilities[t]) << ","
          << fmt17(score.step_log_pvalues[t]) << "\n";
    }
  }
  return 0;
}

struct AuditLinregArgs {
  int n = 0;
  int p = 0;
  int trials = 0;
  double sigma2 = 1.0;
  std::uint64_t seed = 0;
  std::string out = "linreg_lrt.csv";
};

int run_audit_linreg(const AuditLinregArgs& args) {
  gmip::LinregExperimentResult result =
      gmip::run_linreg_experiment(args.n, args.p, args.sigma2, args.trials,
                                  args.seed);
  auto out = open_output(args.out);
  // Orientation note: H0 is membership; fpr is the member-side rejection
  // rate, tpr the nonmember detection rate (inverted relative to the
  // member-positive ROCs elsewhere).
  out << "# orientation: H0=member; fpr = P(declare nonmember | member)\n";
  out << "fpr,tpr_empirical,tpr_analytical\n";
  for (const gmip::LinregSummaryRow& row : result.summary) {
    out << fmt17(row.fpr) << "," << fmt17(row.tpr_empirical) << ","
        << fmt17(row.tpr_analytical) << "\n";
  }
  bool ok = true;
  for (const gmip::LinregSummaryRow& row : result.summary) {
    double se = std::sqrt(
        std::max(row.tpr_analytical * (1 - row.tpr_analytical), 1e-12) /
        args.trials);
    bool row_ok = std::fabs(row.tpr_empirical - row.tpr_analytical) <= 3 * se;
    ok = ok && row_ok;
    std::cout << "fpr=" << fmt6(row.fpr) << " tpr_empirical="
              << fmt6(row.tpr_empirical) << " tpr_analytical="
              << fmt6(row.tpr_analytical) << " tol=" << fmt6(3 * se)
              << (row_ok ? " PASS" : " FAIL") << "\n";
  }
  bool ks_ok = result.ks_statistic < result.ks_critical_1pct;
  ok = ok && ks_ok;
  std::cout << "ks_statistic=" << fmt6(result.ks_statistic)
            << " critical_1pct=" << fmt6(result.ks_critical_1pct)
            << (ks_ok ? " PASS" : " FAIL") << "\n";
  std::cout << (ok ? "CI summary: PASS" : "CI summary: FAIL") << "\n";
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string config_path;
  std::string out_trace = "trace.gmip";
  std::string out_background;
  int background_count = 0;
  int probe_index = 0;
  bool probe_nonmember = false;
};

int run_train(const TrainArgs& args) {
  std::ifstream in(args.config_path);
  if (!in) {
    throw gmip::TraceIoError("cannot open config file " + args.config_path);
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  gmip::SgdRunSpec spec = gmip::parse_sgd_run_spec(text);
  gmip::Dataset dataset =
      gmip::make_dataset(spec.task, spec.n_samples, spec.config.seed);

  std::vector<gmip::Probe> probes;
  if (args.probe_nonmember) {
    // A fresh draw from the same task, outside the training set.
    gmip::Dataset fresh =
        gmip::make_dataset(spec.task, 1, spec.config.seed + 0x9e3779b9ULL);
    probes.push_back({fresh.features.row(0), fresh.labels[0]});
  } else {
    if (args.probe_index < 0 || args.probe_index >= dataset.size()) {
      std::cerr << "train: probe index out of range\n";
      return kExitUsage;
    }
    probes.push_back({dataset.features.row(args.probe_index),
                      dataset.labels[args.probe_index]});
  }

  gmip::TrainResult result = gmip::train(spec.task, dataset, spec.config, probes);

  gmip::GradientTrace trace;
  trace.batch_size = spec.config.batch_size;
  trace.published_means = result.published_means;
  trace.query_gradients = result.probe_gradients[0];
  gmip::write_trace(resolve_output(args.out_trace), trace);
  std::cout << "wrote " << resolve_output(args.out_trace) << " ("
            << trace.steps() << " steps, d=" << trace.dim() << ")\n";

  if (!args.out_background.empty()) {
    int count = args.background_count > 0 ? args.background_count
                                          : 2 * spec.task.feature_dim + 2;
    auto blocks = gmip::make_background_gradients(
        spec.task, result.param_trajectory, count, spec.config.seed + 1);
    gmip::write_background(resolve_output(args.out_background), blocks);
    std::cout << "wrote " << resolve_output(args.out_background) << " ("
              << count << " samples per step)\n";
  }
  std::cout << "final_param_norm = " << fmt6(result.params.norm()) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"membership-inference privacy accounting and auditing toolkit"};
  app.require_subcommand(1);

  TradeoffArgs tradeoff_args;
  CLI::App* tradeoff = app.add_subcommand(
      "tradeoff", "tabulate a Gaussian or one-step trade-off curve");
  tradeoff->add_option("--gmip", tradeoff_args.gmip,
                       "Gaussian trade-off parameter mu")
      ->expected(1);
  tradeoff->add_option("--onestep", tradeoff_args.onestep,
                       "one-step parameters: n d tau2 clip k")
      ->expected(5);
  tradeoff->add_option("--grid", tradeoff_args.grid, "tabulation grid size");
  tradeoff->add_option("--out", tradeoff_args.out, "output file");
  tradeoff->add_option("--format", tradeoff_args.format, "csv|json|text");

  AccountantArgs acc_args;
  CLI::App* accountant = app.add_subcommand(
      "accountant", "closed-form privacy levels and conversions");
  accountant->add_option("--n", acc_args.n, "batch size");
  accountant->add_option("--d", acc_args.d, "parameter count");
  accountant->add_option("--tau2", acc_args.tau2, "noise variance");
  accountant->add_option("--clip", acc_args.clip, "clipping norm (inf ok)");
  accountant->add_option("--k", acc_args.k, "gradient susceptibility (default d)");
  accountant->add_option("--steps", acc_args.steps, "compose k equal steps");
  accountant
      ->add_option("--subsample", acc_args.subsample,
                   "subsampled composition: dataset-size epochs")
      ->expected(2);
  accountant->add_option("--convert", acc_args.convert,
                         "dp-to-mip or mip-to-dp");
  accountant->add_option("--mu", acc_args.mu, "level to convert");
  accountant->add_option("--format", acc_args.format, "text|json");
  accountant->add_option("--out", acc_args.out, "also write the report here");

  CalibrateArgs cal_args;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "solve for the noise level tau");
  calibrate->add_option("--notion", cal_args.notion, "gdp|gmip");
  calibrate->add_option("--mu", cal_args.mu, "target privacy level")
      ->required();
  calibrate->add_option("--dataset", cal_args.dataset,
                        "preset: cifar10|purchase|adult");
  calibrate->add_option("--N", cal_args.big_n, "dataset size");
  calibrate->add_option("--batch", cal_args.batch, "batch size");
  calibrate->add_option("--epochs", cal_args.epochs, "epochs");
  calibrate->add_option("--clip", cal_args.clip, "clipping norm");
  calibrate->add_option("--d", cal_args.d, "parameter count");
  calibrate->add_option("--k", cal_args.k, "susceptibility (default d)");

  ReproduceArgs rep_args;
  CLI::App* reproduce =
      app.add_subcommand("reproduce", "recompute published tables");
  reproduce->add_option("target", rep_args.what, "tau-table")->required();
  reproduce->add_option("--format", rep_args.format, "text|csv");
  reproduce->add_option("--out", rep_args.out, "output file");

  CLI::App* audit = app.add_subcommand("audit", "empirical attack audits");
  audit->require_subcommand(1);

  AuditGlirSimArgs sim_args;
  CLI::App* glir_sim = audit->add_subcommand(
      "glir-sim", "gradient LRT attack on a simulated gradient distribution");
  glir_sim->add_option("--n", sim_args.n, "batch size")->required();
  glir_sim->add_option("--d", sim_args.d, "gradient dimension")->required();
  glir_sim->add_option("--trials", sim_args.trials, "trials per class")
      ->required();
  glir_sim->add_option("--steps", sim_args.steps, "SGD steps per trial");
  glir_sim->add_option("--tau2", sim_args.tau2, "noise variance");
  glir_sim->add_option("--clip", sim_args.clip, "clipping norm");
  glir_sim->add_option("--estimate", sim_args.estimate,
                       "background samples per step (0 = exact parameters)");
  glir_sim->add_option("--ridge", sim_args.ridge, "covariance ridge");
  glir_sim->add_option("--family", sim_args.family, "gaussian|uniform");
  glir_sim->add_option("--seed", sim_args.seed, "random seed");
  glir_sim->add_option("--out-prefix", sim_args.out_prefix,
                       "prefix for the ROC files");
  glir_sim->add_option("--fprs", sim_args.fprs, "audited FPR grid");

  AuditGlirTraceArgs trace_args;
  CLI::App* glir_trace =
      audit->add_subcommand("glir-trace", "score an externally produced trace");
  glir_trace->add_option("trace", trace_args.trace, "trace file")->required();
  glir_trace
      ->add_option("--background", trace_args.background,
                   "per-step background gradients (GMBG file)")
      ->required();
  glir_trace->add_option("--n", trace_args.n, "batch size for CSV traces");
  glir_trace->add_option("--ridge", trace_args.ridge, "covariance ridge");
  glir_trace->add_option("--out", trace_args.out, "score CSV");

  AuditLinregArgs lin_args;
  CLI::App* linreg =
      audit->add_subcommand("linreg", "closed-form loss LRT experiment");
  linreg->add_option("--n", lin_args.n, "training rows")->required();
  linreg->add_option("--p", lin_args.p, "features")->required();
  linreg->add_option("--trials", lin_args.trials, "trials")->required();
  linreg->add_option("--sigma2", lin_args.sigma2, "label noise variance");
  linreg->add_option("--seed", lin_args.seed, "random seed");
  linreg->add_option("--out", lin_args.out, "summary CSV");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "run noisy SGD on a synthetic task and emit a gradient trace");
  train_cmd->add_option("--config", train_args.config_path, "JSON run spec")
      ->required();
  train_cmd->add_option("--out-trace", train_args.out_trace, "trace file");
  train_cmd->add_option("--out-background", train_args.out_background,
                        "background gradients file");
  train_cmd->add_option("--background-count", train_args.background_count,
                        "background samples per step");
  train_cmd->add_option("--probe-index", train_args.probe_index,
                        "dataset row used as the (member) probe");
  train_cmd->add_flag("--probe-nonmember", train_args.probe_nonmember,
                      "probe a fresh draw instead of a training row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (tradeoff->parsed()) return run_tradeoff(tradeoff_args);
    if (accountant->parsed()) return run_accountant(acc_args);
    if (calibrate->parsed()) return run_calibrate(cal_args);
    if (reproduce->parsed()) return run_reproduce(rep_args);
    if (audit->parsed()) {
      if (glir_sim->parsed()) return run_audit_glir_sim(sim_args);
      if (glir_trace->parsed()) return run_audit_glir_trace(trace_args);
      if (linreg->parsed()) return run_audit_linreg(lin_args);
    }
    if (train_cmd->parsed()) return run_train(train_args);
  } catch (const gmip::InfeasibleTargetError& e) {
    std::cerr << "infeasible target: " << e.what()
              << " (achievable infimum " << fmt6(e.achievable_infimum())
              << ")\n";
    return kExitInfeasible;
  } catch (const gmip::TraceIoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
