// crowd/lbfgs.h

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

#ifndef CROWD_LBFGS_H_
#define CROWD_LBFGS_H_

#include <Eigen/Dense>

#include <functional>

namespace crowd {

using Objective = std::function<double(const Eigen::VectorXd &)>;

struct LbfgsOptions {
  int history = 10;
  int max_iters = 100;
  double grad_tol = 1e-6;
  double value_tol = 1e-10;
  double fd_step = 1e-5;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool stalled = false;  // line search could not make progress
};

/// Central-difference gradient with step h in every coordinate.
Eigen::VectorXd CentralDifferenceGradient(const Objective &f,
                                          const Eigen::VectorXd &x, double h);

/// Maximizes f from x0 with limited-memory BFGS, finite-difference
/// gradients and Armijo backtracking.  The returned value is never below
/// f(x0).
LbfgsResult MaximizeLbfgs(const Objective &f, const Eigen::VectorXd &x0,
                          const LbfgsOptions &options = {});

}  // namespace crowd

#endif  // CROWD_LBFGS_H_
