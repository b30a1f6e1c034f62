// crowd/baselines.h

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

#ifndef CROWD_BASELINES_H_
#define CROWD_BASELINES_H_

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "crowd/dataset.h"

namespace crowd {

/// Normalized vote counts; tasks without answers get a uniform row.
AggregationResult MajorityVote(const Dataset &data);

/// Per-worker C x C matrices, row = true class, column = given label.
using ConfusionMatrix = Eigen::MatrixXd;

struct DawidSkeneResult {
  AggregationResult result;
  std::vector<ConfusionMatrix> confusion;
  Eigen::VectorXd class_prior;
};

DawidSkeneResult DawidSkene(const Dataset &data, int max_iters = 50,
                            double tol = 1e-6, double smoothing = 0.01);

struct GladParams {
  Eigen::VectorXd ability;     // per worker, averaged over the C binary fits
  Eigen::VectorXd difficulty;  // per task, averaged, > 0
};

struct GladResult {
  AggregationResult result;
  GladParams params;
};

/// Binary GLAD fitted once per class (class c vs the rest); the C posteriors
/// are renormalized per task.
GladResult Glad(const Dataset &data, int max_iters = 50, double tol = 1e-5);

/// Binary weighted majority vote.  Class 2 is the positive class.  Throws
/// NotApplicable when C > 2.
AggregationResult Awmv(const Dataset &data);

struct GticOptions {
  int iterations = 100;
  int restarts = 10;
  std::uint64_t seed = 0;
};

/// k-means (K = C) over per-task vote-fraction vectors; each cluster takes
/// the plurality majority-vote label of its members.
AggregationResult Gtic(const Dataset &data, const GticOptions &options = {});

}  // namespace crowd

#endif  // CROWD_BASELINES_H_
