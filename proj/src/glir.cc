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

#include "gmip/glir.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gmip/rng.h"
#include "gmip/specfun.h"

namespace gmip {
namespace {

constexpr double kLogPvalueFloor = -745.0;
constexpr std::uint32_t kTraceVersion = 1;

// Per-trial stream channels; stream id = global trial index * 4 + channel.
enum Channel : std::uint64_t {
  kQueryChannel = 0,
  kBatchChannel = 1,
  kNoiseChannel = 2,
  kBackgroundChannel = 3,
};

Eigen::MatrixXd symmetric_inv_sqrt(const Eigen::MatrixXd& m,
                                   const char* context) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error(std::string(context) +
                             ": eigendecomposition failed");
  }
  const Eigen::VectorXd& ev = es.eigenvalues();
  double max_ev = ev.maxCoeff();
  if (!(ev.minCoeff() > 0.0) || !(ev.minCoeff() > 1e-14 * max_ev)) {
    throw std::runtime_error(
        std::string(context) +
        ": covariance is numerically singular; increase the ridge or use "
        "more background samples");
  }
  return es.eigenvectors() *
         ev.array().rsqrt().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m, const char* context) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < 0.0) {
    throw std::runtime_error(std::string(context) +
                             ": covariance is not positive semidefinite");
  }
  return es.eigenvectors() * es.eigenvalues().array().sqrt().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

// Draws one gradient from the model. The uniform family matches the model's
// mean and covariance: mean + sqrt(3) * sqrt(cov) * u with u ~ U(-1,1)^d.
Eigen::VectorXd draw_gradient(const GradientModel& model,
                              const Eigen::MatrixXd& cov_sqrt, CounterRng& rng) {
  const int d = model.dim();
  Eigen::VectorXd z(d);
  if (model.family == GradientFamily::kGaussian) {
    for (int i = 0; i < d; ++i) z[i] = rng.next_normal();
  } else {
    const double s = std::sqrt(3.0);
    for (int i = 0; i < d; ++i) z[i] = s * (2.0 * rng.next_uniform() - 1.0);
  }
  return model.mean + cov_sqrt * z;
}

Eigen::VectorXd clip_to_ball(Eigen::VectorXd v, double clip) {
  if (std::isinf(clip)) return v;
  double norm = v.norm();
  if (norm > clip) v *= clip / norm;
  return v;
}

}  // namespace

GradientModel::GradientModel(Eigen::VectorXd mean_in, Eigen::MatrixXd cov_in,
                             GradientFamily family_in)
    : mean(std::move(mean_in)), covariance(std::move(cov_in)), family(family_in) {
  if (mean.size() < 1) {
    throw std::invalid_argument("GradientModel: dimension must be >= 1");
  }
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw std::invalid_argument("GradientModel: covariance shape mismatch");
  }
  double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * scale) {
    throw std::invalid_argument("GradientModel: covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument(
        "GradientModel: covariance must be positive definite");
  }
}

GradientEstimate estimate_distribution(const Eigen::MatrixXd& background_rows,
                                       double ridge) {
  const int m = static_cast<int>(background_rows.rows());
  const int d = static_cast<int>(background_rows.cols());
  if (m < 2) {
    throw std::invalid_argument(
        "estimate_distribution: need at least 2 background samples, got " +
        std::to_string(m));
  }
  if (!(ridge >= 0.0)) {
    throw std::invalid_argument("estimate_distribution: ridge must be >= 0");
  }
  GradientEstimate est;
  est.sample_count = m;
  est.mean_hat = background_rows.colwise().mean();
  Eigen::MatrixXd centered = background_rows.rowwise() - est.mean_hat.transpose();
  est.cov_hat = centered.transpose() * centered / static_cast<double>(m - 1);
  double scaled_ridge = ridge * est.cov_hat.trace() / static_cast<double>(d);
  est.cov_hat += scaled_ridge * Eigen::MatrixXd::Identity(d, d);
  est.whitener = symmetric_inv_sqrt(est.cov_hat, "estimate_distribution");
  return est;
}

GradientEstimate exact_estimate(const GradientModel& model) {
  GradientEstimate est;
  est.mean_hat = model.mean;
  est.cov_hat = model.covariance;
  est.whitener = symmetric_inv_sqrt(model.covariance, "exact_estimate");
  est.sample_count = 0;
  return est;
}

double glir_statistic(const Eigen::VectorXd& published_mean,
                      const Eigen::VectorXd& query_gradient,
                      const GradientEstimate& estimate, int batch_size) {
  if (published_mean.size() != query_gradient.size() ||
      published_mean.size() != estimate.mean_hat.size()) {
    throw std::invalid_argument("glir_statistic: dimension mismatch");
  }
  if (batch_size < 2) {
    throw std::invalid_argument("glir_statistic: batch size must be >= 2");
  }
  Eigen::VectorXd w = estimate.whitener * (published_mean - query_gradient);
  return (batch_size - 1.0) * w.squaredNorm();
}

double susceptibility(const Eigen::VectorXd& query_gradient,
                      const GradientEstimate& estimate) {
  if (query_gradient.size() != estimate.mean_hat.size()) {
    throw std::invalid_argument("susceptibility: dimension mismatch");
  }
  return (estimate.whitener * (query_gradient - estimate.mean_hat)).squaredNorm();
}

double glir_log_pvalue(double statistic, int dim, int batch_size, double k_hat) {
  if (!(statistic >= 0.0)) {
    throw std::invalid_argument("glir_log_pvalue: statistic must be >= 0");
  }
  if (!(k_hat >= 0.0)) {
    throw std::invalid_argument("glir_log_pvalue: susceptibility must be >= 0");
  }
  double p = noncentral_chi2_cdf(NoncentralChiSq(dim, batch_size * k_hat),
                                 statistic);
  if (p <= 0.0) return kLogPvalueFloor;
  return std::max(std::log(p), kLogPvalueFloor);
}

namespace {

struct TrialSimulator {
  const GradientModel& model;
  const AuditConfig& config;
  Eigen::MatrixXd cov_sqrt;
  bool fast_mean_path;  // Gaussian family, no clipping: draw the batch mean law

  TrialSimulator(const GradientModel& m, const AuditConfig& c)
      : model(m),
        config(c),
        cov_sqrt(symmetric_sqrt(m.covariance, "run_audit")),
        fast_mean_path(m.family == GradientFamily::kGaussian &&
                       std::isinf(c.clip)) {}

  // Published mean for one step, conditional on the query gradient when the
  // trial is a member trial.
  Eigen::VectorXd publish(bool member, const Eigen::VectorXd& query,
                          CounterRng& batch_rng, CounterRng& noise_rng) const {
    const int n = config.batch_size;
    const int d = model.dim();
    Eigen::VectorXd m(d);
    if (fast_mean_path) {
      Eigen::VectorXd z(d);
      for (int i = 0; i < d; ++i) z[i] = batch_rng.next_normal();
      if (member) {
        m = model.mean + (query - model.mean) / n +
            (std::sqrt(n - 1.0) / n) * (cov_sqrt * z);
      } else {
        m = model.mean + (cov_sqrt * z) / std::sqrt(static_cast<double>(n));
      }
    } else {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
      int fresh = member ? n - 1 : n;
      if (member) {
        // Uniformly random position in the batch (order does not change the
        // mean; drawn to follow the stated protocol).
        (void)batch_rng.next_below(static_cast<std::uint64_t>(n));
        sum += clip_to_ball(query, config.clip);
      }
      for (int i = 0; i < fresh; ++i) {
        sum += clip_to_ball(draw_gradient(model, cov_sqrt, batch_rng),
                            config.clip);
      }
      m = sum / static_cast<double>(n);
    }
    if (config.tau2 > 0.0) {
      double tau = std::sqrt(config.tau2);
      for (int i = 0; i < d; ++i) m[i] += tau * noise_rng.next_normal();
    }
    return m;
  }
};

}  // namespace

AuditResult run_audit(const GradientModel& model, const AuditConfig& config) {
  if (config.batch_size < 2) {
    throw std::invalid_argument("run_audit: batch size must be >= 2");
  }
  if (config.trials < 100) {
    throw std::invalid_argument("run_audit: need at least 100 trials, got " +
                                std::to_string(config.trials));
  }
  if (config.steps < 1) {
    throw std::invalid_argument("run_audit: steps must be >= 1");
  }
  if (!(config.tau2 >= 0.0) || !(config.clip > 0.0)) {
    throw std::invalid_argument("run_audit: invalid noise parameters");
  }
  if (config.tau2 > 0.0 && std::isinf(config.clip)) {
    throw std::invalid_argument(
        "run_audit: tau2 > 0 requires a finite clipping norm");
  }
  if (!config.estimation.exact && config.estimation.sample_count < 2) {
    throw std::invalid_argument(
        "run_audit: estimated mode needs at least 2 background samples");
  }

  TrialSimulator sim(model, config);
  GradientEstimate shared_estimate;
  if (config.estimation.exact) shared_estimate = exact_estimate(model);

  const int d = model.dim();
  AuditResult result;
  result.member_scores.resize(config.trials);
  result.nonmember_scores.resize(config.trials);

  const std::uint64_t total = 2ULL * config.trials;
  for (std::uint64_t g = 0; g < total; ++g) {
    const bool member = g < static_cast<std::uint64_t>(config.trials);
    CounterRng query_rng(config.seed, g * 4 + kQueryChannel);
    CounterRng batch_rng(config.seed, g * 4 + kBatchChannel);
    CounterRng noise_rng(config.seed, g * 4 + kNoiseChannel);
    CounterRng background_rng(config.seed, g * 4 + kBackgroundChannel);

    Eigen::VectorXd query = draw_gradient(model, sim.cov_sqrt, query_rng);
    double p_total = 0.0;
    for (int t = 0; t < config.steps; ++t) {
      Eigen::VectorXd published = sim.publish(member, query, batch_rng, noise_rng);
      const GradientEstimate* est = &shared_estimate;
      GradientEstimate local;
      if (!config.estimation.exact) {
        Eigen::MatrixXd rows(config.estimation.sample_count, d);
        for (int r = 0; r < config.estimation.sample_count; ++r) {
          rows.row(r) = draw_gradient(model, sim.cov_sqrt, background_rng);
        }
        local = estimate_distribution(rows, config.estimation.ridge);
        est = &local;
      }
      double stat = glir_statistic(published, query, *est, config.batch_size);
      double k_hat = susceptibility(query, *est);
      // The chi'2_d(n K) law holds for the statistic at its null scaling,
      // n/(n-1) times the published form; evaluating there keeps nonmember
      // p-values exactly uniform for every susceptibility.
      double n = static_cast<double>(config.batch_size);
      p_total +=
          glir_log_pvalue(stat * n / (n - 1.0), d, config.batch_size, k_hat);
    }
    if (!std::isfinite(p_total)) {
      throw std::runtime_error("run_audit: non-finite attack score in trial " +
                               std::to_string(g));
    }
    if (member) {
      result.member_scores[g] = p_total;
    } else {
      result.nonmember_scores[g - config.trials] = p_total;
    }
  }
  result.roc = roc_from_scores(result.member_scores, result.nonmember_scores);
  return result;
}

// --------------------------- trace file I/O ---------------------------

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, std::uint64_t* offset,
                       const char* field) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) {
    throw TraceIoError("trace parse error at byte offset " +
                       std::to_string(*offset) + ": truncated " + field);
  }
  *offset += 4;
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64_block(std::ostream& out, const Eigen::VectorXd& v) {
  static_assert(sizeof(double) == 8);
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * 8));
}

void read_f64_block(std::istream& in, Eigen::VectorXd* v, std::uint64_t* offset,
                    const char* field) {
  std::streamsize bytes = static_cast<std::streamsize>(v->size() * 8);
  in.read(reinterpret_cast<char*>(v->data()), bytes);
  if (in.gcount() != bytes) {
    throw TraceIoError("trace parse error at byte offset " +
                       std::to_string(*offset + in.gcount()) + ": truncated " +
                       field);
  }
  *offset += static_cast<std::uint64_t>(bytes);
}

GradientTrace read_trace_csv(std::istream& in, const std::string& path);

}  // namespace

void write_trace(const std::string& path, const GradientTrace& trace) {
  if (trace.published_means.size() != trace.query_gradients.size()) {
    throw std::invalid_argument("write_trace: mean/query step count mismatch");
  }
  if (trace.batch_size < 2 || trace.steps() < 1 || trace.dim() < 1) {
    throw std::invalid_argument(
        "write_trace: need batch size >= 2 and at least one step");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceIoError("write_trace: cannot open " + path);
  out.write("GMIP", 4);
  write_u32(out, kTraceVersion);
  write_u32(out, static_cast<std::uint32_t>(trace.batch_size));
  write_u32(out, static_cast<std::uint32_t>(trace.dim()));
  write_u32(out, static_cast<std::uint32_t>(trace.steps()));
  for (int t = 0; t < trace.steps(); ++t) {
    write_f64_block(out, trace.published_means[t]);
    write_f64_block(out, trace.query_gradients[t]);
  }
  if (!out) throw TraceIoError("write_trace: write failed for " + path);
}

GradientTrace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceIoError("read_trace: cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, "GMIP", 4) == 0) {
    std::uint64_t offset = 4;
    std::uint32_t version = read_u32(in, &offset, "version");
    if (version != kTraceVersion) {
      throw TraceIoError("trace parse error at byte offset 4: unsupported "
                         "version " +
                         std::to_string(version));
    }
    std::uint32_t n = read_u32(in, &offset, "batch size");
    std::uint32_t d = read_u32(in, &offset, "dimension");
    std::uint32_t steps = read_u32(in, &offset, "step count");
    if (n < 2 || d < 1 || steps < 1 || d > 10000000 || steps > 10000000) {
      throw TraceIoError("trace parse error at byte offset 8: implausible "
                         "header fields");
    }
    GradientTrace trace;
    trace.batch_size = static_cast<int>(n);
    for (std::uint32_t t = 0; t < steps; ++t) {
      Eigen::VectorXd mean(d), query(d);
      read_f64_block(in, &mean, &offset, "published mean");
      read_f64_block(in, &query, &offset, "query gradient");
      trace.published_means.push_back(std::move(mean));
      trace.query_gradients.push_back(std::move(query));
    }
    return trace;
  }
  // Not the binary layout: accept the CSV alternative.
  in.clear();
  in.seekg(0);
  return read_trace_csv(in, path);
}

namespace {

GradientTrace read_trace_csv(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,kind,idx,value", 0) != 0) {
    throw TraceIoError("read_trace: " + path +
                       " is neither a GMIP binary trace nor step,kind,idx,value "
                       "CSV");
  }
  struct Cell {
    long step;
    bool is_mean;
    long idx;
    double value;
  };
  std::vector<Cell> cells;
  long max_step = -1, max_idx = -1;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string step_s, kind_s, idx_s, value_s;
    if (!std::getline(ls, step_s, ',') || !std::getline(ls, kind_s, ',') ||
        !std::getline(ls, idx_s, ',') || !std::getline(ls, value_s)) {
      throw TraceIoError("read_trace: malformed CSV row at line " +
                         std::to_string(line_no) + " of " + path);
    }
    Cell c;
    try {
      c.step = std::stol(step_s);
      c.idx = std::stol(idx_s);
      c.value = std::stod(value_s);
    } catch (const std::exception&) {
      throw TraceIoError("read_trace: unparsable number at line " +
                         std::to_string(line_no) + " of " + path);
    }
    if (kind_s == "mean") {
      c.is_mean = true;
    } else if (kind_s == "query") {
      c.is_mean = false;
    } else {
      throw TraceIoError("read_trace: unknown kind '" + kind_s + "' at line " +
                         std::to_string(line_no) + " of " + path);
    }
    max_step = std::max(max_step, c.step);
    max_idx = std::max(max_idx, c.idx);
    cells.push_back(c);
  }
  if (cells.empty()) {
    throw TraceIoError("read_trace: CSV trace has no data rows: " + path);
  }
  long steps = max_step + 1;
  long d = max_idx + 1;
  if (cells.size() != static_cast<size_t>(2 * steps * d)) {
    throw TraceIoError("read_trace: CSV trace is missing cells (expected " +
                       std::to_string(2 * steps * d) + ", got " +
                       std::to_string(cells.size()) + "): " + path);
  }
  GradientTrace trace;
  trace.batch_size = 0;  // unknown in the CSV form; caller supplies n
  trace.published_means.assign(steps, Eigen::VectorXd::Zero(d));
  trace.query_gradients.assign(steps, Eigen::VectorXd::Zero(d));
  for (const Cell& c : cells) {
    if (c.step < 0 || c.idx < 0) {
      throw TraceIoError("read_trace: negative index in CSV trace: " + path);
    }
    (c.is_mean ? trace.published_means : trace.query_gradients)[c.step][c.idx] =
        c.value;
  }
  return trace;
}

}  // namespace

void write_background(const std::string& path,
                      const std::vector<Eigen::MatrixXd>& per_step_rows) {
  if (per_step_rows.empty()) {
    throw std::invalid_argument("write_background: no steps");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceIoError("write_background: cannot open " + path);
  const auto rows = per_step_rows[0].rows();
  const auto cols = per_step_rows[0].cols();
  out.write("GMBG", 4);
  write_u32(out, kTraceVersion);
  write_u32(out, static_cast<std::uint32_t>(rows));
  write_u32(out, static_cast<std::uint32_t>(cols));
  write_u32(out, static_cast<std::uint32_t>(per_step_rows.size()));
  for (const Eigen::MatrixXd& block : per_step_rows) {
    if (block.rows() != rows || block.cols() != cols) {
      throw std::invalid_argument("write_background: ragged step blocks");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      Eigen::VectorXd row = block.row(r);
      write_f64_block(out, row);
    }
  }
  if (!out) throw TraceIoError("write_background: write failed for " + path);
}

std::vector<Eigen::MatrixXd> read_background(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceIoError("read_background: cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  std::uint64_t offset = 4;
  if (in.gcount() != 4 || std::memcmp(magic, "GMBG", 4) != 0) {
    throw TraceIoError("background parse error at byte offset 0: bad magic");
  }
  std::uint32_t version = read_u32(in, &offset, "version");
  if (version != kTraceVersion) {
    throw TraceIoError("background parse error at byte offset 4: unsupported "
                       "version " +
                       std::to_string(version));
  }
  std::uint32_t rows = read_u32(in, &offset, "row count");
  std::uint32_t cols = read_u32(in, &offset, "dimension");
  std::uint32_t steps = read_u32(in, &offset, "step count");
  if (rows < 2 || cols < 1 || steps < 1) {
    throw TraceIoError("background parse error at byte offset 8: implausible "
                       "header fields");
  }
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(steps);
  for (std::uint32_t t = 0; t < steps; ++t) {
    Eigen::MatrixXd block(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      Eigen::VectorXd row(cols);
      read_f64_block(in, &row, &offset, "background row");
      block.row(r) = row;
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

TraceScore score_trace(const GradientTrace& trace,
                       const std::vector<Eigen::MatrixXd>& background_per_step,
                       double ridge) {
  if (trace.batch_size < 2) {
    throw std::invalid_argument("score_trace: trace batch size must be >= 2");
  }
  if (background_per_step.size() != static_cast<size_t>(trace.steps())) {
    throw std::invalid_argument(
        "score_trace: background step count does not match the trace");
  }
  TraceScore score;
  const int d = trace.dim();
  for (int t = 0; t < trace.steps(); ++t) {
    GradientEstimate est = estimate_distribution(background_per_step[t], ridge);
    if (est.dim() != d) {
      throw std::invalid_argument("score_trace: background dimension mismatch");
    }
    double stat = glir_statistic(trace.published_means[t],
                                 trace.query_gradients[t], est,
                                 trace.batch_size);
    double k_hat = susceptibility(trace.query_gradients[t], est);
    // Null-scaling correction as in run_audit.
    double n = static_cast<double>(trace.batch_size);
    double logp = glir_log_pvalue(stat * n / (n - 1.0), d, trace.batch_size,
                                  k_hat);
    score.step_statistics.push_back(stat);
    score.step_susceptibilities.push_back(k_hat);
    score.step_log_pvalues.push_back(logp);
    score.total_log_pvalue += logp;
  }
  return score;
}

}  // namespace gmip
