// tests/test_kernels.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "crowd/kernels.h"

using namespace crowd;

TEST_CASE("dot product kernel") {
  CHECK(DotProductKernel(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 0.0);
  CHECK(DotProductKernel(Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)) == 11.0);
  Eigen::Vector3d x(2, -1, 2);
  x /= 3.0;
  CHECK(DotProductKernel(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(DotProductKernel(Eigen::Vector2d(1, 2), Eigen::Vector3d(1, 2, 3)),
                  DimensionMismatch);
}

TEST_CASE("rbf kernel") {
  Eigen::Vector2d x(0.3, -2.0);
  CHECK(RbfKernel(x, x, 0.7) == 1.0);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(1), b = Eigen::VectorXd::Ones(1);
  CHECK(RbfKernel(a, b, 1.0) == doctest::Approx(0.60653066).epsilon(1e-8));
  CHECK(RbfKernel(a, 100.0 * b, 1.0) < 1e-10);
  CHECK_THROWS_AS(RbfKernel(a, b, 0.0), NonPositiveLengthscale);
  CHECK_THROWS_AS(RbfKernel(a, b, -1.0), NonPositiveLengthscale);
}

TEST_CASE("gram of orthonormal rows is the identity plus jitter") {
  Eigen::MatrixXd f = Eigen::MatrixXd::Identity(4, 4);
  KernelMatrix k = BuildGram(f, {}, 1e-6);
  Eigen::MatrixXd want = Eigen::MatrixXd::Identity(4, 4) * (1.0 + 1e-6);
  CHECK((k.values - want).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(k.llt.info() == Eigen::Success);
}

TEST_CASE("gram equals the pairwise evaluation") {
  std::mt19937 rng(5);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd f(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) f(i, j) = normal(rng);

  KernelMatrix dot = BuildGram(f, {}, 1e-6);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += f(i, c) * f(j, c);
      if (i == j) s += 1e-6;
      CHECK(std::abs(dot.values(i, j) - s) < 1e-12);
    }
  CHECK((dot.values - dot.values.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  // Rbf on z-scored columns.
  Eigen::MatrixXd z = f;
  for (int c = 0; c < 3; ++c) {
    double m = z.col(c).mean();
    double sd = std::sqrt((z.col(c).array() - m).square().sum() / 5.0);
    z.col(c) = (z.col(c).array() - m) / sd;
  }
  KernelMatrix rbf = BuildGram(f, {KernelKind::kRbf, 1.3}, 1e-6);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double want = std::exp(-(z.row(i) - z.row(j)).squaredNorm() / (2 * 1.3 * 1.3));
      if (i == j) want += 1e-6;
      CHECK(std::abs(rbf.values(i, j) - want) < 1e-12);
    }
}

TEST_CASE("duplicated rows factor once jitter is added") {
  Eigen::MatrixXd f(3, 2);
  f << 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(BuildGram(f, {}, 0.0), CholeskyFailure);
  KernelMatrix k = BuildGramEscalating(f, {});
  CHECK(k.jitter >= 1e-6);
  CHECK(k.llt.info() == Eigen::Success);
  CHECK_THROWS_AS(BuildGram(f, {KernelKind::kRbf, 0.0}, 1e-6),
                  NonPositiveLengthscale);
}
