// crowd/ep.h

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

#ifndef CROWD_EP_H_
#define CROWD_EP_H_

#include <Eigen/Dense>

#include <cstdint>

#include "crowd/dataset.h"
#include "crowd/kernels.h"
#include "crowd/quadrature.h"

namespace crowd {

/// How a wrong answer is scored in the per-task label weights.  kLiteral
/// uses 1 - q for every label the worker did not give.  kSymmetric spreads
/// it as (1 - q) / (C - 1).
enum class WrongLabelRule { kLiteral, kSymmetric };

/// log w(y) = sum over answering workers of log q if a = y, else the
/// wrong-label term.  Abstentions contribute nothing.
Eigen::RowVectorXd TaskLogWeights(
    const Eigen::Ref<const Eigen::RowVectorXi> &answers,
    const Eigen::Ref<const Eigen::RowVectorXd> &qualities, int num_classes,
    WrongLabelRule rule = WrongLabelRule::kLiteral);

/// N x C matrix of TaskLogWeights rows.
Eigen::MatrixXd LogWeights(const Dataset &data,
                           const Eigen::MatrixXd &qualities,
                           WrongLabelRule rule = WrongLabelRule::kLiteral);

struct EpConfig {
  double tol = 1e-5;
  int max_sweeps = 200;
  double damping = 0.5;
  double min_damping = 0.05;
  int quad_points = 32;
  bool random_order = false;
  std::uint64_t seed = 0;
};

/// Site parameters for every task: Gaussian natural parameters per class and
/// the Beta pseudo-count increments for the outlier rate.
struct SiteFactors {
  Eigen::MatrixXd tau;  // N x C, precision >= 0
  Eigen::MatrixXd nu;   // N x C, precision * mean
  Eigen::VectorXd a;    // N, outlier pseudo-counts
  Eigen::VectorXd b;    // N, inlier pseudo-counts

  static SiteFactors Zero(int num_tasks, int num_classes);
};

/// One task's site, used by the single-site helpers below.
struct TaskSite {
  Eigen::VectorXd tau, nu;
  double a = 0.0, b = 0.0;
};

struct Cavity {
  Eigen::VectorXd mean, var;  // per class
  double alpha = 1.0, beta = 1.0;
  double ThetaBar() const { return alpha / (alpha + beta); }
};

/// Divides the site out of the marginal.  Throws NegativeCavityVariance if a
/// cavity precision or pseudo-count is not positive.
Cavity ComputeCavity(const Eigen::Ref<const Eigen::VectorXd> &mean,
                     const Eigen::Ref<const Eigen::VectorXd> &var,
                     double alpha, double beta, const TaskSite &site);

/// Probability that class y has the largest latent value when the latents
/// are independent N(mean_c, var_c), for every y.
Eigen::VectorXd WinProbabilities(const Eigen::Ref<const Eigen::VectorXd> &mean,
                                 const Eigen::Ref<const Eigen::VectorXd> &var,
                                 const GaussHermite &rule);

struct MomentMatch {
  double log_z = 0.0;        // log normalizer with unnormalized weights
  Eigen::VectorXd mean, var; // matched marginal per class
  double outlier_resp = 0.0; // posterior probability of the outlier branch
};

/// Matches the moments of cavity x exact factor, where the exact factor is
///   sum_y w(y) [(1 - theta) 1{y wins} + theta / C]
/// with theta fixed at the cavity mean.  log_w holds log w(y).
MomentMatch MomentMatchTask(const Eigen::Ref<const Eigen::VectorXd> &log_w,
                            const Cavity &cavity, const GaussHermite &rule);

/// Site implied by a matched marginal and its cavity.
TaskSite SiteFromMoments(const MomentMatch &mm, const Cavity &cavity);

/// Natural-parameter interpolation new^eps old^(1 - eps).
TaskSite DampedUpdate(const TaskSite &old_site, const TaskSite &new_site,
                      double eps);

struct Posterior {
  Eigen::MatrixXd mean;  // N x C marginal means
  Eigen::MatrixXd var;   // N x C marginal variances
  double alpha = 2.0, beta = 9.0;  // Beta posterior over the outlier rate
  double log_evidence = 0.0;
  SiteFactors sites;
  Eigen::MatrixXd cavity_mean, cavity_var;  // at the returned marginals
  Eigen::VectorXd cavity_theta;             // cavity outlier rate per task
  int sweeps = 0;
  bool converged = true;

  double ThetaBar() const { return alpha / (alpha + beta); }
  int num_tasks() const { return static_cast<int>(mean.rows()); }
  int num_classes() const { return static_cast<int>(mean.cols()); }
};

/// Runs EP to convergence.  log_weights is N x C; rows that are constant
/// carry no information and keep a zero site.  warm, when given, seeds the
/// sites.  evidence_offset is added to the returned log evidence.
Posterior RunEp(const KernelMatrix &gram, const Eigen::MatrixXd &log_weights,
                double alpha, double beta, const EpConfig &config,
                const SiteFactors *warm = nullptr,
                double evidence_offset = 0.0);

Posterior RunEp(const Dataset &data, const KernelMatrix &gram,
                const Eigen::MatrixXd &qualities, double alpha, double beta,
                const EpConfig &config);

/// Label distribution for one task: theta/C + (1 - theta) P(y wins),
/// renormalized.
Eigen::RowVectorXd Predictive(const Posterior &post, int task,
                              int quad_points = 32);
Eigen::MatrixXd PredictiveAll(const Posterior &post, int quad_points = 32);

inline double Evidence(const Posterior &post) { return post.log_evidence; }

}  // namespace crowd

#endif  // CROWD_EP_H_
