// crowd/gem.h

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

#ifndef CROWD_GEM_H_
#define CROWD_GEM_H_

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "crowd/attention.h"
#include "crowd/dataset.h"
#include "crowd/ep.h"
#include "crowd/kernels.h"
#include "crowd/lbfgs.h"

namespace crowd {

struct WorkerParams {
  double amplitude = 0.7;  // global quality, the mean of the quality curve
  double lambda = 2.0;
  double mu = 2.0;
  double sigma = 1.0;
};

struct ModelParams {
  AttentionKind kind = AttentionKind::kPoisson;
  double alpha = 2.0, beta = 9.0;
  std::vector<WorkerParams> workers;
  std::vector<int> tasks_per_worker;  // N_w

  AttentionModel ModelFor(int w) const;
  std::vector<double> CurveFor(int w) const;
};

struct GemConfig {
  AttentionKind attention = AttentionKind::kPoisson;
  int max_iters = 50;
  double tol = 1e-4;
  double alpha = 2.0, beta = 9.0;
  bool optimize_alpha_beta = false;
  WrongLabelRule rule = WrongLabelRule::kSymmetric;
  EpConfig ep;
  LbfgsOptions lbfgs;
  int grid_points = 30;
  // Allowed E-step decrease of the bound before the fit stops.
  double safeguard_slack = 1e-6;
};

/// N x W per-answer qualities implied by params; unanswered cells hold 0.5.
Eigen::MatrixXd QualityMatrix(const ModelParams &params,
                              const Eigen::MatrixXi &ranks);

/// Quantities of the bound that depend only on the posterior.
struct BoundContext {
  Eigen::MatrixXd log_prior;  // N x C, log of the cavity label probabilities
  double alpha_post = 1.0, beta_post = 1.0;
};
BoundContext MakeBoundContext(const Posterior &post, int quad_points = 32);

/// Evidence lower bound used by the outer loop:
///   sum_i log sum_y w_i(y) pi_i(y) + E_q[log Beta(theta | alpha, beta)]
/// where pi_i is the label distribution implied by task i's cavity and the
/// outlier branch, and q is the Beta posterior over theta.
double LowerBound(const ModelParams &params, const BoundContext &ctx,
                  const Dataset &data, const Eigen::MatrixXi &ranks,
                  WrongLabelRule rule);
double LowerBound(const ModelParams &params, const Posterior &post,
                  const Dataset &data, const Eigen::MatrixXi &ranks,
                  WrongLabelRule rule);

/// Label responsibilities gamma_i(y) proportional to w_i(y) pi_i(y).
Eigen::MatrixXd Responsibilities(const ModelParams &params,
                                 const BoundContext &ctx, const Dataset &data,
                                 const Eigen::MatrixXi &ranks,
                                 WrongLabelRule rule);

/// Per-worker objective maximized in the M-step: with c the responsibility
/// of the given answer, sum over answers of c log q + (1 - c) log(1 - q).
/// credit is indexed by rank - 1.
double WorkerObjective(const AttentionModel &model, double amplitude,
                       const std::vector<double> &credit);

/// Unconstrained coordinates of one worker's parameters and back.
Eigen::VectorXd PackWorker(const WorkerParams &p, AttentionKind kind,
                           int num_tasks);
WorkerParams UnpackWorker(const Eigen::VectorXd &z, AttentionKind kind,
                          int num_tasks, const WorkerParams &base);

struct MStepResult {
  ModelParams params;
  bool stalled = false;
};

/// Generalized M-step: never returns params with a lower bound than the
/// input.
MStepResult MStep(const ModelParams &params, const BoundContext &ctx,
                  const Dataset &data, const Eigen::MatrixXi &ranks,
                  const GemConfig &config);

struct FitResult {
  AggregationResult result;
  ModelParams params;
  Posterior posterior;
  std::vector<std::vector<double>> quality_curves;  // per worker, by rank
  std::vector<double> global_quality;               // per worker
  std::vector<double> bound_trace;                   // after each M-step
  CompletionOrders orders;
  bool stopped_by_safeguard = false;
};

/// Initial params: amplitude from agreement with majority vote, lambda = 2,
/// mu = 2, sigma = N_w / 6.
ModelParams InitialParams(const Dataset &data, const GemConfig &config);

FitResult Fit(const Dataset &data, const KernelMatrix &gram,
              const GemConfig &config);

struct QualityHistogram {
  std::vector<double> edges;  // bins + 1 edges over [0, 1]
  std::vector<int> counts;
  double frac_at_least_06 = 0.0;
  double frac_below_04 = 0.0;
};
QualityHistogram WorkerQualityHistogram(const std::vector<double> &quality,
                                        int bins);
QualityHistogram WorkerQualityHistogram(const FitResult &fit, int bins);

/// Poisson: lambda_w.  Gaussian: N_w / mu_w, the rank of the attention
/// peak.  Throws NotApplicable for uniform or no attention, and for workers
/// whose quality is attention-insensitive.
double SuitableTaskCount(const FitResult &fit, int worker);
double SuitableTaskCount(AttentionKind kind, const WorkerParams &worker,
                         int num_tasks);

}  // namespace crowd

#endif  // CROWD_GEM_H_
