// tests/test_attention.cc

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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crowd/attention.h"
#include "crowd/errors.h"

using namespace crowd;

namespace {

const double kPi = 3.14159265358979323846;

AttentionModel Poisson(int n, double lambda) {
  AttentionModel m;
  m.kind = AttentionKind::kPoisson;
  m.num_tasks = n;
  m.lambda = lambda;
  return m;
}

AttentionModel Gaussian(int n, double mu, double sigma) {
  AttentionModel m;
  m.kind = AttentionKind::kGaussian;
  m.num_tasks = n;
  m.mu = mu;
  m.sigma = sigma;
  return m;
}

// Direct-space Stirling Poisson, no logs.
double StirlingPoisson(double m, int r) {
  return std::pow(2 * kPi * r, -0.5) * std::exp(-m) * std::pow(m * std::exp(1.0) / r, r);
}

// Affine mean-calibrated curve built by plain enumeration of the ranks.
std::vector<double> CurveOracle(const std::vector<double> &t, double amp,
                                double eps) {
  double top = *std::max_element(t.begin(), t.end());
  std::vector<double> a(t.size());
  double abar = 0.0;
  for (size_t r = 0; r < t.size(); ++r) abar += (a[r] = t[r] / top);
  abar /= t.size();
  double s = std::min((1 - eps - amp) / (1 - abar), (amp - eps) / abar);
  std::vector<double> q(t.size());
  for (size_t r = 0; r < t.size(); ++r) q[r] = amp + s * (a[r] - abar);
  return q;
}

int Mode(const std::vector<double> &v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()) + 1;
}

bool RiseThenFall(const std::vector<double> &v) {
  size_t k = 1;
  while (k < v.size() && v[k] >= v[k - 1]) ++k;
  while (k < v.size() && v[k] <= v[k - 1]) ++k;
  return k == v.size();
}

}  // namespace

TEST_CASE("attention values") {
  double want = std::exp(-1.0) * std::exp(1.0) / std::sqrt(2 * kPi);
  CHECK(AttentionAt(Poisson(1, 1.0), 1) == doctest::Approx(want).epsilon(1e-12));
  CHECK(want == doctest::Approx(0.398942).epsilon(1e-6));

  AttentionModel u;
  u.kind = AttentionKind::kUniform;
  u.num_tasks = 30;
  for (int r : {1, 7, 30}) CHECK(AttentionAt(u, r) == 1.0);

  AttentionModel g = Gaussian(40, 4.0, 2.5);
  CHECK(AttentionAt(g, 10) ==
        doctest::Approx(1.0 / (2.5 * std::sqrt(2 * kPi))).epsilon(1e-12));

  for (const AttentionModel &m :
       {Poisson(60, 0.7), Poisson(60, 30.0), Gaussian(60, 2.0, 1.0), u})
    for (int r : {1, 2, 9, 60}) CHECK(AttentionAt(m, r) >= 0.0);
}

TEST_CASE("log-space poisson matches the direct formula") {
  for (double m : {1.0, 4.0, 12.5})
    for (int r : {1, 3, 10, 30}) {
      AttentionModel p = Poisson(100, 100.0 / m);
      CHECK(AttentionAt(p, r) ==
            doctest::Approx(StirlingPoisson(m, r)).epsilon(1e-10));
    }
  // Far tail underflows gracefully instead of producing NaN.
  AttentionModel far = Poisson(2000, 2.0);
  CHECK(std::isfinite(LogAttentionAt(far, 1)));
  CHECK(AttentionAt(far, 1) >= 0.0);
}

TEST_CASE("stirling error") {
  CHECK(StirlingError(20.0, 20) < 0.01);
  double approx = 1.0 / std::sqrt(2 * kPi), exact = std::exp(-1.0);
  CHECK(StirlingError(1.0, 1) ==
        doctest::Approx(std::abs(approx - exact) / exact).epsilon(1e-9));
  CHECK(StirlingError(1.0, 1) == doctest::Approx(0.0844).epsilon(1e-3));
  CHECK(StirlingError(5.0, 200) < StirlingError(5.0, 20));
}

TEST_CASE("modes sit at the curve centre") {
  for (int n : {50, 120, 200})
    for (double lambda : {1.5, 2.0, 3.0, 4.0}) {
      std::vector<double> t = AttentionCurve(Poisson(n, lambda));
      CHECK(RiseThenFall(t));
      CHECK(std::abs(Mode(t) - n / lambda) <= 1.0);
    }
  for (int n : {50, 200})
    for (double mu : {2.0, 3.0}) {
      std::vector<double> t = AttentionCurve(Gaussian(n, mu, n / 6.0));
      CHECK(RiseThenFall(t));
      CHECK(Mode(t) == static_cast<int>(std::lround(n / mu)));
    }
}

TEST_CASE("quality curve") {
  AttentionModel u;
  u.kind = AttentionKind::kUniform;
  u.num_tasks = 25;
  for (int r = 1; r <= 25; ++r) CHECK(QualityFromAttention(u, 0.7, r) == 0.7);

  for (double amp : {0.5, 0.6, 0.75, 0.89})
    for (double lambda : {2.0, 3.0, 4.0}) {
      AttentionModel p = Poisson(200, lambda);
      std::vector<double> q = QualityCurve(p, amp);
      std::vector<double> want = CurveOracle(AttentionCurve(p), amp, kQualityEps);
      for (size_t r = 0; r < q.size(); ++r) CHECK(std::abs(q[r] - want[r]) < 1e-12);
      double mean = std::accumulate(q.begin(), q.end(), 0.0) / q.size();
      CHECK(std::abs(mean - amp) < 1e-9);
      int mode = Mode(AttentionCurve(p));
      CHECK(q[mode - 1] > amp);
      CHECK(*std::max_element(q.begin(), q.end()) <= 1 - kQualityEps + 1e-15);
      CHECK(*std::min_element(q.begin(), q.end()) >= kQualityEps - 1e-15);
      CHECK(RiseThenFall(q));
    }
}

TEST_CASE("experts and spammers keep a flat curve") {
  for (double amp : {0.95, 0.3, 0.25}) {
    std::vector<double> q = QualityCurve(Poisson(100, 2.0), amp);
    CHECK(*std::max_element(q.begin(), q.end()) ==
          *std::min_element(q.begin(), q.end()));
    CHECK(q[0] == amp);
  }
  std::vector<double> hi = QualityCurve(Poisson(100, 2.0), 0.999);
  CHECK(hi[50] == 1 - kQualityEps);
  CHECK(AttentionSensitive(0.5));
  CHECK_FALSE(AttentionSensitive(0.9));
  CHECK_FALSE(AttentionSensitive(0.49));
}

TEST_CASE("rank outside the worker's tasks") {
  CHECK_THROWS_AS(QualityFromAttention(Poisson(10, 2.0), 0.7, 0), ValidationError);
  CHECK_THROWS_AS(QualityFromAttention(Poisson(10, 2.0), 0.7, 11), ValidationError);
  CHECK(ParseAttentionKind("gaussian") == AttentionKind::kGaussian);
  CHECK_THROWS_AS(ParseAttentionKind("beta"), ParseError);
}
