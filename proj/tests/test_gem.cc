// tests/test_gem.cc

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
#include <random>

#include "crowd/gem.h"
#include "crowd/simulator.h"
#include "test_util.h"

using namespace crowd;
using crowd_test::MakeDataset;

namespace {

// E_q[log Beta(theta | a, b)] for q = Beta(ap, bp) by Simpson on a
// substituted variable that removes the endpoint singularities.
double BetaTermOracle(double a, double b, double ap, double bp) {
  auto log_beta = [](double x, double y) {
    return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
  };
  auto f = [&](double t) {
    if (t <= 0 || t >= 1) return 0.0;
    double lq = (ap - 1) * std::log(t) + (bp - 1) * std::log1p(-t) - log_beta(ap, bp);
    double lp = (a - 1) * std::log(t) + (b - 1) * std::log1p(-t) - log_beta(a, b);
    return std::exp(lq) * lp;
  };
  const int n = 400000;
  double h = 1.0 / n, s = 0;
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

BoundContext FlatContext(int n, int c, double ap, double bp) {
  BoundContext ctx;
  ctx.log_prior = Eigen::MatrixXd::Constant(n, c, -std::log(double(c)));
  ctx.alpha_post = ap;
  ctx.beta_post = bp;
  return ctx;
}

// Random prior over labels per task, as a cavity would give.
BoundContext RandomContext(int n, int c, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  BoundContext ctx;
  ctx.log_prior.resize(n, c);
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd p(c);
    for (int k = 0; k < c; ++k) p(k) = u(rng);
    ctx.log_prior.row(i) = (p / p.sum()).array().log().matrix();
  }
  ctx.alpha_post = 3.5;
  ctx.beta_post = 60.0;
  return ctx;
}

Dataset RandomAnswers(int n, int w, int c, double rate, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u;
  std::uniform_int_distribution<int> lab(1, c);
  Dataset d = MakeDataset(1, 1, c, {0}, 3, seed);
  d.features = Eigen::MatrixXd::Random(n, 3);
  d.answers.resize(n, w);
  for (int i = 0; i < n; ++i) {
    int truth = 1 + i % c;
    for (int k = 0; k < w; ++k)
      d.answers(i, k) = u(rng) < rate ? (u(rng) < 0.7 ? truth : lab(rng)) : 0;
  }
  d.orders.assign(w, std::nullopt);
  return d;
}

}  // namespace

TEST_CASE("bound with flat priors and uniform attention") {
  Dataset d = MakeDataset(3, 2, 3, {1, 1, 2, 0, 3, 2});
  GemConfig cfg;
  cfg.attention = AttentionKind::kUniform;
  ModelParams p = InitialParams(d, cfg);
  p.workers[0].amplitude = 0.8;
  p.workers[1].amplitude = 0.6;
  Eigen::MatrixXi ranks = CompletionRanks(InferOrder(d), 3);
  BoundContext ctx = FlatContext(3, 3, 4.0, 20.0);

  // Per task: log sum_y (1/3) prod_w q or (1 - q) / 2.
  double q0 = 0.8, e0 = 0.1, q1 = 0.6, e1 = 0.2;
  double want = std::log((q0 * q1 + e0 * e1 + e0 * e1) / 3) +
                std::log((e0 + q0 + e0) / 3) +
                std::log((e0 * e1 + e0 * q1 + q0 * e1) / 3);
  want += BetaTermOracle(2.0, 9.0, 4.0, 20.0);
  double got = LowerBound(p, ctx, d, ranks, WrongLabelRule::kSymmetric);
  CHECK(std::abs(got - want) < 1e-6);
}

TEST_CASE("responsibilities") {
  Dataset d = MakeDataset(2, 2, 2, {1, 2, 2, 2});
  GemConfig cfg;
  cfg.attention = AttentionKind::kNone;
  ModelParams p = InitialParams(d, cfg);
  p.workers[0].amplitude = 0.9;
  p.workers[1].amplitude = 0.6;
  Eigen::MatrixXi ranks = CompletionRanks(InferOrder(d), 2);
  BoundContext ctx = FlatContext(2, 2, 2, 9);
  ctx.log_prior(0, 0) = std::log(0.3);
  ctx.log_prior(0, 1) = std::log(0.7);
  Eigen::MatrixXd g = Responsibilities(p, ctx, d, ranks, WrongLabelRule::kSymmetric);
  double a = 0.3 * 0.9 * 0.4, b = 0.7 * 0.1 * 0.6;
  CHECK(g(0, 0) == doctest::Approx(a / (a + b)).epsilon(1e-12));
  CHECK(g(1, 1) == doctest::Approx(0.9 * 0.6 / (0.9 * 0.6 + 0.1 * 0.4)));
  CHECK(g.rowwise().sum().isOnes(1e-12));
}

TEST_CASE("worker objective") {
  AttentionModel m;
  m.kind = AttentionKind::kPoisson;
  m.num_tasks = 4;
  m.lambda = 2.0;
  std::vector<double> credit = {1.0, 0.25, 0.0, 0.5};
  std::vector<double> q = QualityCurve(m, 0.7);
  double want = std::log(q[0]) + 0.25 * std::log(q[1]) + 0.75 * std::log(1 - q[1]) +
                std::log(1 - q[2]) + 0.5 * std::log(q[3] * (1 - q[3]));
  CHECK(WorkerObjective(m, 0.7, credit) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("packed coordinates round trip") {
  WorkerParams w{0.73, 3.4, 2.5, 7.0};
  for (AttentionKind k : {AttentionKind::kPoisson, AttentionKind::kGaussian,
                          AttentionKind::kUniform}) {
    WorkerParams back = UnpackWorker(PackWorker(w, k, 40), k, 40, w);
    CHECK(back.amplitude == doctest::Approx(0.73).epsilon(1e-12));
    CHECK(back.lambda == doctest::Approx(3.4).epsilon(1e-12));
    CHECK(back.mu == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(back.sigma == doctest::Approx(7.0).epsilon(1e-12));
  }
  // Any coordinates land inside the box.
  WorkerParams far = UnpackWorker(Eigen::Vector3d(40, -40, 40),
                                  AttentionKind::kGaussian, 40, w);
  CHECK(far.amplitude <= 0.98);
  CHECK(far.mu >= 1.0);
  CHECK(far.sigma <= 40.0);
}

TEST_CASE("m-step never lowers the bound") {
  for (AttentionKind kind : {AttentionKind::kPoisson, AttentionKind::kGaussian,
                             AttentionKind::kUniform, AttentionKind::kNone})
    for (unsigned seed : {1u, 2u, 3u}) {
      Dataset d = RandomAnswers(40, 5, 3, 0.6, seed);
      GemConfig cfg;
      cfg.attention = kind;
      cfg.optimize_alpha_beta = seed == 3;
      ModelParams p = InitialParams(d, cfg);
      Eigen::MatrixXi ranks = CompletionRanks(InferOrder(d), 40);
      BoundContext ctx = RandomContext(40, 3, seed);
      double before = LowerBound(p, ctx, d, ranks, cfg.rule);
      ModelParams next = MStep(p, ctx, d, ranks, cfg).params;
      double after = LowerBound(next, ctx, d, ranks, cfg.rule);
      CHECK(after >= before - 1e-9);
      // The fixed point: a second step from the optimum gives nothing back.
      ModelParams again = MStep(next, ctx, d, ranks, cfg).params;
      CHECK(LowerBound(again, ctx, d, ranks, cfg.rule) >= after - 1e-9);
    }
}

TEST_CASE("unanimous workers") {
  Dataset d = MakeDataset(6, 3, 3, {1, 1, 1, 2, 2, 2, 3, 3, 3,
                                    1, 1, 1, 2, 2, 2, 3, 3, 3}, 6);
  d.features = Eigen::MatrixXd::Identity(6, 6);
  GemConfig cfg;
  cfg.attention = AttentionKind::kNone;
  FitResult fit = Fit(d, BuildGramEscalating(d.features, {}), cfg);
  CHECK(fit.result.labels == Labels{1, 2, 3, 1, 2, 3});
  for (double q : fit.global_quality) CHECK(q > 0.9);
  for (size_t t = 1; t < fit.bound_trace.size(); ++t)
    CHECK(fit.bound_trace[t] >= fit.bound_trace[t - 1] - 1e-6);
}

TEST_CASE("without attention the completion order does not matter") {
  SimSpec spec;
  spec.num_tasks = 40;
  spec.num_workers = 6;
  spec.num_classes = 3;
  spec.dim = 5;
  spec.answer_rate = 0.6;
  spec.seed = 4;
  Dataset d = Simulate(spec).data;
  Dataset shuffled = d;
  std::mt19937 rng(9);
  for (auto &o : shuffled.orders)
    if (o) std::shuffle(o->begin(), o->end(), rng);
  KernelMatrix k = BuildGramEscalating(d.features, {});
  GemConfig cfg;
  cfg.attention = AttentionKind::kUniform;
  cfg.max_iters = 5;
  FitResult a = Fit(d, k, cfg), b = Fit(shuffled, k, cfg);
  CHECK((a.result.label_probs - b.result.label_probs).cwiseAbs().maxCoeff() < 1e-12);
  for (size_t w = 0; w < a.global_quality.size(); ++w)
    CHECK(std::abs(a.global_quality[w] - b.global_quality[w]) < 1e-12);
}

TEST_CASE("fits are deterministic and the trace does not fall") {
  SimSpec spec;
  spec.num_tasks = 50;
  spec.num_workers = 6;
  spec.num_classes = 3;
  spec.dim = 8;
  spec.answer_rate = 0.8;
  spec.seed = 2;
  Dataset d = Simulate(spec).data;
  KernelMatrix k = BuildGramEscalating(d.features, {});
  GemConfig cfg;
  cfg.max_iters = 6;
  FitResult a = Fit(d, k, cfg), b = Fit(d, k, cfg);
  CHECK(a.result.label_probs == b.result.label_probs);
  CHECK(a.bound_trace == b.bound_trace);
  CHECK(std::isfinite(a.posterior.log_evidence));
  for (size_t t = 1; t < a.bound_trace.size(); ++t)
    CHECK(a.bound_trace[t] >= a.bound_trace[t - 1] - 1e-6);
  for (size_t w = 0; w < a.quality_curves.size(); ++w) {
    const std::vector<double> &q = a.quality_curves[w];
    double lo = *std::min_element(q.begin(), q.end());
    double hi = *std::max_element(q.begin(), q.end());
    if (!AttentionSensitive(a.global_quality[w])) CHECK(hi - lo < 0.05);
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
  }
}

TEST_CASE("quality histogram") {
  QualityHistogram h =
      WorkerQualityHistogram({0.0, 0.05, 0.39, 0.4, 0.6, 0.95, 1.0}, 10);
  CHECK(h.edges.size() == 11);
  CHECK(h.edges[3] == doctest::Approx(0.3));
  CHECK(h.counts == std::vector<int>{2, 0, 0, 1, 1, 0, 1, 0, 0, 2});
  CHECK(h.frac_at_least_06 == doctest::Approx(3.0 / 7));
  CHECK(h.frac_below_04 == doctest::Approx(3.0 / 7));
  CHECK_THROWS_AS(WorkerQualityHistogram({0.5}, 0), ValidationError);
  CHECK(WorkerQualityHistogram(std::vector<double>{}, 4).frac_at_least_06 == 0.0);
}

TEST_CASE("suitable task count") {
  WorkerParams w{0.7, 3.0, 4.0, 10.0};
  CHECK(SuitableTaskCount(AttentionKind::kPoisson, w, 120) == 3.0);
  CHECK(SuitableTaskCount(AttentionKind::kGaussian, w, 120) == 30.0);
  CHECK_THROWS_AS(SuitableTaskCount(AttentionKind::kUniform, w, 120), NotApplicable);
  CHECK_THROWS_AS(SuitableTaskCount(AttentionKind::kNone, w, 120), NotApplicable);
  w.amplitude = 0.95;
  CHECK_THROWS_AS(SuitableTaskCount(AttentionKind::kPoisson, w, 120), NotApplicable);
  w.amplitude = 0.3;
  CHECK_THROWS_AS(SuitableTaskCount(AttentionKind::kGaussian, w, 120), NotApplicable);
}
