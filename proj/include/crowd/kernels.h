// crowd/kernels.h

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

#ifndef CROWD_KERNELS_H_
#define CROWD_KERNELS_H_

#include <Eigen/Dense>

#include "crowd/errors.h"

namespace crowd {

enum class KernelKind { kDot, kRbf };

struct KernelChoice {
  KernelKind kind = KernelKind::kDot;
  double lengthscale = 1.0;  // rbf only
};

double DotProductKernel(const Eigen::Ref<const Eigen::VectorXd> &a,
                        const Eigen::Ref<const Eigen::VectorXd> &b);

double RbfKernel(const Eigen::Ref<const Eigen::VectorXd> &a,
                 const Eigen::Ref<const Eigen::VectorXd> &b,
                 double lengthscale);

/// Gram matrix with jitter on the diagonal and its Cholesky factor.
struct KernelMatrix {
  Eigen::MatrixXd values;
  double jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt;

  int size() const { return static_cast<int>(values.rows()); }
};

/// Builds K + jitter*I.  Throws CholeskyFailure if the result is not
/// positive definite.  Rbf features are z-scored per column first.
KernelMatrix BuildGram(const Eigen::MatrixXd &features,
                       const KernelChoice &kernel, double jitter);

/// BuildGram starting at `jitter` and doubling until the factorization
/// succeeds or max_jitter is exceeded.
KernelMatrix BuildGramEscalating(const Eigen::MatrixXd &features,
                                 const KernelChoice &kernel,
                                 double jitter = 1e-6,
                                 double max_jitter = 1e-2);

/// Column-wise z-score; constant columns are only centered.
Eigen::MatrixXd Standardize(const Eigen::MatrixXd &features);

}  // namespace crowd

#endif  // CROWD_KERNELS_H_
