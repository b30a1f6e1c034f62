// crowd/gem.cc

// Copyright 2026  crowd-attn authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "crowd/gem.h"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>

#include "crowd/baselines.h"

namespace crowd {

namespace {

constexpr double kAmpLo = 0.02, kAmpHi = 0.98;
constexpr double kShapeLo = 1.0;

double ShapeHi(int num_tasks) { return std::max(2.0, double(num_tasks)); }

double Logit(double p) {
  p = std::clamp(p, 1e-9, 1.0 - 1e-9);
  return std::log(p / (1.0 - p));
}
double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double ToBox(double x, double lo, double hi) {
  return Logit((x - lo) / (hi - lo));
}
double FromBox(double z, double lo, double hi) {
  return lo + (hi - lo) * Sigmoid(z);
}
double ToLogBox(double x, double lo, double hi) {
  return ToBox(std::log(x), std::log(lo), std::log(hi));
}
double FromLogBox(double z, double lo, double hi) {
  return std::exp(FromBox(z, std::log(lo), std::log(hi)));
}

double LogSumExp(const Eigen::Ref<const Eigen::RowVectorXd> &v) {
  double top = v.maxCoeff();
  return top + std::log((v.array() - top).exp().sum());
}

double BetaPriorTerm(double alpha, double beta, double a_post, double b_post) {
  using boost::math::digamma;
  double dsum = digamma(a_post + b_post);
  return (alpha - 1.0) * (digamma(a_post) - dsum) +
         (beta - 1.0) * (digamma(b_post) - dsum) -
         (std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta));
}

bool HasCurve(AttentionKind kind) {
  return kind == AttentionKind::kPoisson || kind == AttentionKind::kGaussian;
}

// Sum over ranks of log(t_r / mean t) for attention-sensitive workers.
double AttentionLogOffset(const ModelParams &params) {
  if (!HasCurve(params.kind)) return 0.0;
  double total = 0.0;
  for (size_t w = 0; w < params.workers.size(); ++w) {
    int n = params.tasks_per_worker[w];
    if (n < 2 || !AttentionSensitive(params.workers[w].amplitude)) continue;
    AttentionModel model = params.ModelFor(static_cast<int>(w));
    Eigen::RowVectorXd logt(n);
    for (int r = 1; r <= n; ++r) logt(r - 1) = LogAttentionAt(model, r);
    double log_mean = LogSumExp(logt) - std::log(double(n));
    total += logt.sum() - n * log_mean;
  }
  return total;
}

}  // namespace

AttentionModel ModelParams::ModelFor(int w) const {
  AttentionModel m;
  m.kind = kind;
  m.lambda = workers[w].lambda;
  m.mu = workers[w].mu;
  m.sigma = workers[w].sigma;
  m.num_tasks = tasks_per_worker[w];
  return m;
}

std::vector<double> ModelParams::CurveFor(int w) const {
  return QualityCurve(ModelFor(w), workers[w].amplitude);
}

Eigen::MatrixXd QualityMatrix(const ModelParams &params,
                              const Eigen::MatrixXi &ranks) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Constant(ranks.rows(), ranks.cols(), 0.5);
  for (int w = 0; w < ranks.cols(); ++w) {
    if (params.tasks_per_worker[w] == 0) continue;
    std::vector<double> curve = params.CurveFor(w);
    for (int i = 0; i < ranks.rows(); ++i)
      if (ranks(i, w) > 0) q(i, w) = curve[ranks(i, w) - 1];
  }
  return q;
}

BoundContext MakeBoundContext(const Posterior &post, int quad_points) {
  const int n = post.num_tasks(), nc = post.num_classes();
  const GaussHermite &rule = GaussHermiteRule(quad_points);
  BoundContext ctx;
  ctx.log_prior.resize(n, nc);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd win = WinProbabilities(post.cavity_mean.row(i).transpose(),
                                           post.cavity_var.row(i).transpose(),
                                           rule);
    double theta = post.cavity_theta(i);
    for (int c = 0; c < nc; ++c)
      ctx.log_prior(i, c) = std::log(theta / nc + (1.0 - theta) * win(c));
  }
  ctx.alpha_post = post.alpha;
  ctx.beta_post = post.beta;
  return ctx;
}

double LowerBound(const ModelParams &params, const BoundContext &ctx,
                  const Dataset &data, const Eigen::MatrixXi &ranks,
                  WrongLabelRule rule) {
  Eigen::MatrixXd lw = LogWeights(data, QualityMatrix(params, ranks), rule);
  lw += ctx.log_prior;
  double total = 0.0;
  for (int i = 0; i < lw.rows(); ++i) total += LogSumExp(lw.row(i));
  return total +
         BetaPriorTerm(params.alpha, params.beta, ctx.alpha_post, ctx.beta_post);
}

double LowerBound(const ModelParams &params, const Posterior &post,
                  const Dataset &data, const Eigen::MatrixXi &ranks,
                  WrongLabelRule rule) {
  return LowerBound(params, MakeBoundContext(post), data, ranks, rule);
}

Eigen::MatrixXd Responsibilities(const ModelParams &params,
                                 const BoundContext &ctx, const Dataset &data,
                                 const Eigen::MatrixXi &ranks,
                                 WrongLabelRule rule) {
  Eigen::MatrixXd lw = LogWeights(data, QualityMatrix(params, ranks), rule);
  lw += ctx.log_prior;
  for (int i = 0; i < lw.rows(); ++i) {
    double top = lw.row(i).maxCoeff();
    lw.row(i) = (lw.row(i).array() - top).exp().matrix();
    lw.row(i) /= lw.row(i).sum();
  }
  return lw;
}

double WorkerObjective(const AttentionModel &model, double amplitude,
                       const std::vector<double> &credit) {
  std::vector<double> q = QualityCurve(model, amplitude);
  double j = 0.0;
  for (size_t r = 0; r < credit.size(); ++r)
    j += credit[r] * std::log(q[r]) + (1.0 - credit[r]) * std::log1p(-q[r]);
  return j;
}

Eigen::VectorXd PackWorker(const WorkerParams &p, AttentionKind kind,
                           int num_tasks) {
  const double hi = ShapeHi(num_tasks);
  if (kind == AttentionKind::kPoisson)
    return Eigen::Vector2d(ToBox(p.amplitude, kAmpLo, kAmpHi),
                           ToLogBox(p.lambda, kShapeLo, hi));
  if (kind == AttentionKind::kGaussian)
    return Eigen::Vector3d(ToBox(p.amplitude, kAmpLo, kAmpHi),
                           ToLogBox(p.mu, kShapeLo, hi),
                           ToLogBox(p.sigma, kShapeLo, hi));
  return Eigen::VectorXd::Constant(1, ToBox(p.amplitude, kAmpLo, kAmpHi));
}

WorkerParams UnpackWorker(const Eigen::VectorXd &z, AttentionKind kind,
                          int num_tasks, const WorkerParams &base) {
  const double hi = ShapeHi(num_tasks);
  WorkerParams p = base;
  p.amplitude = FromBox(z(0), kAmpLo, kAmpHi);
  if (kind == AttentionKind::kPoisson) {
    p.lambda = FromLogBox(z(1), kShapeLo, hi);
  } else if (kind == AttentionKind::kGaussian) {
    p.mu = FromLogBox(z(1), kShapeLo, hi);
    p.sigma = FromLogBox(z(2), kShapeLo, hi);
  }
  return p;
}

namespace {

std::vector<double> LogGrid(double lo, double hi, int points) {
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k)
    g[k] = points == 1 ? lo
                       : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) *
                                                     k / (points - 1.0));
  return g;
}

// Best worker params for the given answer credits, starting from `start`.
// Returns start unless something strictly better is found.
WorkerParams ImproveWorker(const WorkerParams &start, AttentionKind kind,
                           int num_tasks, const std::vector<double> &credit,
                           const GemConfig &config, bool *stalled) {
  AttentionModel base;
  base.kind = kind;
  base.num_tasks = num_tasks;
  auto value = [&](const WorkerParams &p) {
    AttentionModel m = base;
    m.lambda = p.lambda;
    m.mu = p.mu;
    m.sigma = p.sigma;
    return WorkerObjective(m, p.amplitude, credit);
  };
  WorkerParams best = start;
  double best_value = value(start);

  if (!HasCurve(kind) || num_tasks < 2) {
    double mean = 0.0;
    for (double c : credit) mean += c;
    WorkerParams cand = start;
    cand.amplitude = std::clamp(mean / credit.size(), kAmpLo, kAmpHi);
    double v = value(cand);
    if (v > best_value) {
      best = cand;
      best_value = v;
    }
    return best;
  }

  const double hi = ShapeHi(num_tasks);
  std::vector<double> amps;
  for (int k = 1; k <= 19; ++k) amps.push_back(0.05 * k);
  amps.push_back(start.amplitude);
  std::vector<double> shapes = LogGrid(kShapeLo, hi, config.grid_points);
  std::vector<double> sigmas = {start.sigma};
  if (kind == AttentionKind::kGaussian)
    for (double f : {1.0 / 12.0, 1.0 / 6.0, 1.0 / 3.0})
      sigmas.push_back(std::clamp(num_tasks * f, kShapeLo, hi));
  for (double amp : amps) {
    for (double shape : shapes) {
      for (double sigma : sigmas) {
        WorkerParams cand = start;
        cand.amplitude = amp;
        if (kind == AttentionKind::kPoisson) cand.lambda = shape;
        else cand.mu = shape, cand.sigma = sigma;
        double v = value(cand);
        if (v > best_value) {
          best = cand;
          best_value = v;
        }
      }
    }
  }

  auto objective = [&](const Eigen::VectorXd &z) {
    return value(UnpackWorker(z, kind, num_tasks, best));
  };
  LbfgsResult res =
      MaximizeLbfgs(objective, PackWorker(best, kind, num_tasks), config.lbfgs);
  if (res.stalled) *stalled = true;
  if (res.value > best_value) best = UnpackWorker(res.x, kind, num_tasks, best);
  return best;
}

}  // namespace

MStepResult MStep(const ModelParams &params, const BoundContext &ctx,
                  const Dataset &data, const Eigen::MatrixXi &ranks,
                  const GemConfig &config) {
  MStepResult out;
  out.params = params;
  Eigen::MatrixXd gamma = Responsibilities(params, ctx, data, ranks, config.rule);
  for (int w = 0; w < data.num_workers(); ++w) {
    const int n = params.tasks_per_worker[w];
    if (n == 0) continue;
    std::vector<double> credit(n, 0.0);
    for (int i = 0; i < data.num_tasks(); ++i)
      if (ranks(i, w) > 0)
        credit[ranks(i, w) - 1] = gamma(i, data.answers(i, w) - 1);
    out.params.workers[w] = ImproveWorker(params.workers[w], params.kind, n,
                                          credit, config, &out.stalled);
  }
  if (config.optimize_alpha_beta) {
    auto objective = [&](const Eigen::VectorXd &z) {
      return BetaPriorTerm(std::exp(z(0)), std::exp(z(1)), ctx.alpha_post,
                           ctx.beta_post);
    };
    Eigen::Vector2d z0(std::log(params.alpha), std::log(params.beta));
    LbfgsOptions opt = config.lbfgs;
    LbfgsResult res = MaximizeLbfgs(objective, z0, opt);
    if (res.stalled) out.stalled = true;
    // Keep alpha, beta in a range where the Beta prior stays proper and mild.
    double a = std::clamp(std::exp(res.x(0)), 1e-2, 1e3);
    double b = std::clamp(std::exp(res.x(1)), 1e-2, 1e3);
    if (objective(Eigen::Vector2d(std::log(a), std::log(b))) > objective(z0)) {
      out.params.alpha = a;
      out.params.beta = b;
    }
  }
  return out;
}

ModelParams InitialParams(const Dataset &data, const GemConfig &config) {
  ModelParams p;
  p.kind = config.attention;
  p.alpha = config.alpha;
  p.beta = config.beta;
  AggregationResult mv = MajorityVote(data);
  const int nw = data.num_workers();
  p.workers.resize(nw);
  p.tasks_per_worker.resize(nw);
  for (int w = 0; w < nw; ++w) {
    int n = 0, agree = 0;
    for (int i = 0; i < data.num_tasks(); ++i) {
      int a = data.answers(i, w);
      if (a == kNoAnswer) continue;
      ++n;
      agree += a == mv.labels[i];
    }
    p.tasks_per_worker[w] = n;
    WorkerParams &wp = p.workers[w];
    wp.amplitude = n ? std::clamp(double(agree) / n, kAmpLo, kAmpHi) : 0.5;
    wp.lambda = std::min(2.0, ShapeHi(n));
    wp.mu = std::min(2.0, ShapeHi(n));
    wp.sigma = std::clamp(n / 6.0, kShapeLo, ShapeHi(n));
  }
  return p;
}

FitResult Fit(const Dataset &data, const KernelMatrix &gram,
              const GemConfig &config) {
  if (gram.size() != data.num_tasks())
    throw DimensionMismatch("gram size does not match the number of tasks");
  FitResult fit;
  fit.orders = InferOrder(data);
  Eigen::MatrixXi ranks = CompletionRanks(fit.orders, data.num_tasks());
  ModelParams params = InitialParams(data, config);

  auto run_ep = [&](const ModelParams &p, const SiteFactors *warm) {
    Eigen::MatrixXd lw = LogWeights(data, QualityMatrix(p, ranks), config.rule);
    return RunEp(gram, lw, p.alpha, p.beta, config.ep, warm,
                 AttentionLogOffset(p));
  };
  Posterior post = run_ep(params, nullptr);
  BoundContext ctx = MakeBoundContext(post, config.ep.quad_points);

  bool converged = false;
  int iters = 0;
  for (int it = 1; it <= config.max_iters; ++it) {
    iters = it;
    params = MStep(params, ctx, data, ranks, config).params;
    double bound = LowerBound(params, ctx, data, ranks, config.rule);
    fit.bound_trace.push_back(bound);
    if (fit.bound_trace.size() >= 2 &&
        std::abs(bound - fit.bound_trace[fit.bound_trace.size() - 2]) <
            config.tol) {
      converged = true;
      break;
    }
    Posterior next = run_ep(params, &post.sites);
    BoundContext next_ctx = MakeBoundContext(next, config.ep.quad_points);
    double after = LowerBound(params, next_ctx, data, ranks, config.rule);
    if (after < bound - config.safeguard_slack) {
      fit.stopped_by_safeguard = true;
      converged = true;
      break;
    }
    post = std::move(next);
    ctx = std::move(next_ctx);
  }
  if (config.max_iters < 1) converged = true;

  Diagnostics diag;
  diag.iterations = iters;
  diag.objective = fit.bound_trace.empty()
                       ? LowerBound(params, ctx, data, ranks, config.rule)
                       : fit.bound_trace.back();
  diag.converged = converged && post.converged;
  fit.result = MakeResult(PredictiveAll(post, config.ep.quad_points), diag);
  fit.params = params;
  fit.posterior = std::move(post);
  for (int w = 0; w < data.num_workers(); ++w) {
    fit.quality_curves.push_back(params.CurveFor(w));
    fit.global_quality.push_back(params.workers[w].amplitude);
  }
  return fit;
}

QualityHistogram WorkerQualityHistogram(const std::vector<double> &quality,
                                        int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  QualityHistogram h;
  h.counts.assign(bins, 0);
  for (int k = 0; k <= bins; ++k) h.edges.push_back(double(k) / bins);
  int hi = 0, lo = 0;
  for (double q : quality) {
    int b = std::clamp(static_cast<int>(q * bins), 0, bins - 1);
    ++h.counts[b];
    hi += q >= 0.6;
    lo += q < 0.4;
  }
  if (!quality.empty()) {
    h.frac_at_least_06 = double(hi) / quality.size();
    h.frac_below_04 = double(lo) / quality.size();
  }
  return h;
}

QualityHistogram WorkerQualityHistogram(const FitResult &fit, int bins) {
  return WorkerQualityHistogram(fit.global_quality, bins);
}

double SuitableTaskCount(AttentionKind kind, const WorkerParams &worker,
                         int num_tasks) {
  if (!HasCurve(kind))
    throw NotApplicable("suitable task count needs Poisson or Gaussian "
                        "attention");
  if (num_tasks < 2 || !AttentionSensitive(worker.amplitude))
    throw NotApplicable("worker has an attention-insensitive quality");
  if (kind == AttentionKind::kPoisson) return worker.lambda;
  return num_tasks / worker.mu;
}

double SuitableTaskCount(const FitResult &fit, int worker) {
  const ModelParams &p = fit.params;
  if (worker < 0 || worker >= static_cast<int>(p.workers.size()))
    throw ValidationError("worker index out of range");
  return SuitableTaskCount(p.kind, p.workers[worker],
                           p.tasks_per_worker[worker]);
}

}  // namespace crowd
