// crowd/kernels.cc

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

#include "crowd/kernels.h"

#include <cmath>
#include <string>

namespace crowd {

double DotProductKernel(const Eigen::Ref<const Eigen::VectorXd> &a,
                        const Eigen::Ref<const Eigen::VectorXd> &b) {
  if (a.size() != b.size())
    throw DimensionMismatch("kernel arguments have dimensions " +
                            std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  return a.dot(b);
}

double RbfKernel(const Eigen::Ref<const Eigen::VectorXd> &a,
                 const Eigen::Ref<const Eigen::VectorXd> &b,
                 double lengthscale) {
  if (!(lengthscale > 0.0))
    throw NonPositiveLengthscale("rbf lengthscale must be positive");
  if (a.size() != b.size())
    throw DimensionMismatch("kernel arguments have dimensions " +
                            std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  return std::exp(-(a - b).squaredNorm() / (2.0 * lengthscale * lengthscale));
}

Eigen::MatrixXd Standardize(const Eigen::MatrixXd &features) {
  Eigen::MatrixXd z = features;
  const double n = static_cast<double>(features.rows());
  for (int j = 0; j < z.cols(); ++j) {
    double mean = z.col(j).mean();
    z.col(j).array() -= mean;
    double sd = std::sqrt(z.col(j).squaredNorm() / n);
    if (sd > 0.0) z.col(j) /= sd;
  }
  return z;
}

KernelMatrix BuildGram(const Eigen::MatrixXd &features,
                       const KernelChoice &kernel, double jitter) {
  const int n = static_cast<int>(features.rows());
  if (n < 1) throw DimensionMismatch("gram needs at least one task");
  KernelMatrix gram;
  gram.jitter = jitter;
  if (kernel.kind == KernelKind::kDot) {
    gram.values = features * features.transpose();
  } else {
    if (!(kernel.lengthscale > 0.0))
      throw NonPositiveLengthscale("rbf lengthscale must be positive");
    Eigen::MatrixXd z = Standardize(features);
    gram.values.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j)
        gram.values(i, j) = gram.values(j, i) =
            RbfKernel(z.row(i).transpose(), z.row(j).transpose(),
                      kernel.lengthscale);
  }
  // Force exact symmetry; the product above can differ in the last bit.
  gram.values = 0.5 * (gram.values + gram.values.transpose()).eval();
  gram.values.diagonal().array() += jitter;
  gram.llt.compute(gram.values);
  if (gram.llt.info() != Eigen::Success)
    throw CholeskyFailure("gram is not positive definite with jitter " +
                          std::to_string(jitter));
  return gram;
}

KernelMatrix BuildGramEscalating(const Eigen::MatrixXd &features,
                                 const KernelChoice &kernel, double jitter,
                                 double max_jitter) {
  for (double j = jitter;; j *= 2.0) {
    try {
      return BuildGram(features, kernel, j);
    } catch (const CholeskyFailure &) {
      if (j * 2.0 > max_jitter) throw;
    }
  }
}

}  // namespace crowd
