// crowd/quadrature.cc

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

#include "crowd/quadrature.h"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "crowd/errors.h"

namespace crowd {

namespace {

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
// polynomials: zero diagonal, off-diagonal sqrt(k).
GaussHermite ComputeRule(int points) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k)
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermite rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  double total = 0.0;
  for (int k = 0; k < points; ++k) {
    rule.nodes[k] = eig.eigenvalues()(k);
    double v0 = eig.eigenvectors()(0, k);
    rule.weights[k] = v0 * v0;
    total += rule.weights[k];
  }
  for (double &w : rule.weights) w /= total;
  return rule;
}

}  // namespace

const GaussHermite &GaussHermiteRule(int points) {
  if (points < 1) throw ValidationError("quadrature needs at least one point");
  static std::mutex mu;
  static std::map<int, GaussHermite> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(points);
  if (it == cache.end()) it = cache.emplace(points, ComputeRule(points)).first;
  return it->second;
}

double NormPdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double NormCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace crowd
