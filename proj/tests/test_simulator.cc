// tests/test_simulator.cc

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
#include <numeric>
#include <set>

#include "crowd/simulator.h"
#include "test_util.h"

using namespace crowd;

namespace {

int CountKind(const Simulation &s, WorkerKind k) {
  int n = 0;
  for (const WorkerProfile &p : s.profiles) n += p.kind == k;
  return n;
}

WorkerProfile Profile(double amp, AttentionKind kind, double shape) {
  WorkerProfile p;
  p.kind = KindForAmplitude(amp);
  p.amplitude = amp;
  p.attention.kind = kind;
  p.attention.lambda = p.attention.mu = shape;
  p.attention.sigma = 10.0;
  return p;
}

}  // namespace

TEST_CASE("default simulation") {
  SimSpec spec;
  spec.seed = 3;
  Simulation s = Simulate(spec);
  CHECK(s.data.num_tasks() == 200);
  CHECK(s.data.num_workers() == 20);
  CHECK(s.data.dim() == 50);
  CHECK(s.data.gold->labels == s.gold.labels);
  CHECK_NOTHROW(s.data.Validate());
  CHECK(CountKind(s, WorkerKind::kExpert) == 4);
  CHECK(CountKind(s, WorkerKind::kNormal) == 10);
  CHECK(CountKind(s, WorkerKind::kSpammer) == 2);
  CHECK(CountKind(s, WorkerKind::kRandomSpammer) == 2);
  CHECK(CountKind(s, WorkerKind::kUniformSpammer) == 2);

  // About 30% of cells answered; 4000 cells give a standard error near 0.007.
  double rate = double((s.data.answers.array() != 0).count()) / (200 * 20);
  CHECK(std::abs(rate - 0.3) < 0.035);

  for (int w = 0; w < 20; ++w) {
    const std::vector<int> &o = *s.data.orders[w];
    CHECK(static_cast<int>(o.size()) == s.data.NumAnswered(w));
    CHECK(s.profiles[w].attention.num_tasks == static_cast<int>(o.size()));
  }
}

TEST_CASE("same seed, same data") {
  SimSpec spec;
  spec.num_tasks = 60;
  spec.seed = 11;
  Simulation a = Simulate(spec), b = Simulate(spec);
  CHECK(a.data == b.data);
  spec.seed = 12;
  CHECK_FALSE(Simulate(spec).data == a.data);
}

TEST_CASE("class means sit at the requested separation") {
  SimSpec spec;
  spec.num_tasks = 4000;
  spec.num_workers = 1;
  spec.num_classes = 3;
  spec.dim = 5;
  spec.separation = 2.5;
  spec.mix = {0, 1, 0, 0, 0};
  Simulation s = Simulate(spec);
  for (int c = 1; c <= 3; ++c) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(5);
    int n = 0;
    for (int i = 0; i < 4000; ++i)
      if (s.gold.labels[i] == c) m += s.data.features.row(i).transpose(), ++n;
    m /= n;
    // Unit noise per coordinate, roughly 1300 samples per class.
    CHECK(std::abs(m.norm() - 2.5) < 0.15);
  }
}

TEST_CASE("per-rank accuracy follows the quality curve") {
  SimSpec spec;
  spec.num_tasks = 3000;
  spec.num_classes = 3;
  spec.dim = 2;
  spec.answer_rate = 1.0;
  spec.workers = {Profile(0.7, AttentionKind::kPoisson, 3.0)};
  Simulation s = Simulate(spec);
  const std::vector<int> &order = *s.data.orders[0];
  AttentionModel m = s.profiles[0].attention;
  std::vector<double> q = QualityCurve(m, 0.7);
  // Compare the expected and observed number of right answers in each
  // third of the ranks.
  for (int part = 0; part < 3; ++part) {
    double want = 0, var = 0;
    int got = 0;
    for (int r = part * 1000; r < (part + 1) * 1000; ++r) {
      want += q[r];
      var += q[r] * (1 - q[r]);
      got += s.data.answers(order[r], 0) == s.gold.labels[order[r]];
    }
    CHECK(std::abs(got - want) < 4 * std::sqrt(var));
  }
}

TEST_CASE("spammers") {
  SimSpec spec;
  spec.num_tasks = 1500;
  spec.num_workers = 2;
  spec.num_classes = 3;
  spec.dim = 2;
  spec.answer_rate = 1.0;
  spec.mix = {0, 0, 0, 0.5, 0.5};
  Simulation s = Simulate(spec);
  std::set<int> labels;
  int right = 0;
  for (int i = 0; i < 1500; ++i) {
    labels.insert(s.data.answers(i, 1));
    right += s.data.answers(i, 0) == s.gold.labels[i];
  }
  CHECK(labels.size() == 1);
  CHECK(std::abs(right / 1500.0 - 1.0 / 3) < 0.05);
}

TEST_CASE("news protocol bands") {
  SimSpec spec;
  spec.num_tasks = 20;
  spec.num_workers = 100;
  spec.news_protocol = true;
  Simulation s = Simulate(spec);
  int hi = 0, lo = 0;
  for (const WorkerProfile &p : s.profiles) {
    hi += p.amplitude >= 0.6;
    lo += p.amplitude < 0.4;
  }
  CHECK(hi == 60);
  CHECK(lo == 9);
}

TEST_CASE("tied shape") {
  CHECK(TiedShape(0.6) == 2.0);
  CHECK(TiedShape(0.75) == doctest::Approx(3.0));
  CHECK(TiedShape(0.9) == doctest::Approx(4.0));
  CHECK(TiedShape(0.3) == 2.0);
}

TEST_CASE("noise injection flips an exact count") {
  SimSpec spec;
  spec.num_tasks = 100;
  spec.num_workers = 5;
  Simulation s = Simulate(spec);
  Dataset noisy = InjectNoise(s.data, 0.2, 1);
  for (int w = 0; w < 5; ++w) {
    int flipped = 0;
    for (int i : s.data.AnsweredBy(w)) flipped += noisy.answers(i, w) != s.data.answers(i, w);
    CHECK(flipped == static_cast<int>(std::ceil(0.2 * s.data.NumAnswered(w) - 1e-9)));
  }
  CHECK(((noisy.answers.array() == 0) == (s.data.answers.array() == 0)).all());
  CHECK(InjectNoise(s.data, 0.0, 1) == s.data);
  CHECK_THROWS_AS(InjectNoise(s.data, 0.7, 1), ValidationError);
}

TEST_CASE("spammer injection") {
  SimSpec spec;
  spec.num_tasks = 100;
  spec.num_workers = 4;
  Simulation s = Simulate(spec);
  Dataset d = InjectSpammers(s.data, 2, 3, 5);
  CHECK(d.num_workers() == 9);
  CHECK_NOTHROW(d.Validate());
  long total = (s.data.answers.array() != 0).count();
  int per = static_cast<int>(std::lround(total / 4.0));
  for (int w = 4; w < 9; ++w) CHECK(d.NumAnswered(w) == per);
  for (int w = 6; w < 9; ++w) {
    std::set<int> l;
    for (int i : d.AnsweredBy(w)) l.insert(d.answers(i, w));
    CHECK(l.size() == 1);
  }
  CHECK(d.answers.leftCols(4) == s.data.answers);
}

TEST_CASE("re-annotation keeps the answered cells") {
  SimSpec spec;
  spec.num_tasks = 400;
  spec.num_workers = 3;
  spec.answer_rate = 0.5;
  Simulation s = Simulate(spec);
  FitResult fit;
  fit.params.kind = AttentionKind::kUniform;
  fit.global_quality = {0.95, 0.7, 0.4};
  fit.params.workers.resize(3);
  Dataset re = Reannotate(s.data, &fit, AttentionKind::kGaussian, 2);
  CHECK(((re.answers.array() == 0) == (s.data.answers.array() == 0)).all());
  for (int w = 0; w < 3; ++w) {
    int right = 0, n = re.NumAnswered(w);
    for (int i : re.AnsweredBy(w)) right += re.answers(i, w) == s.gold.labels[i];
    double q = fit.global_quality[w];
    CHECK(std::abs(right - q * n) < 4 * std::sqrt(n * q * (1 - q)));
  }
  CHECK_THROWS_AS(Reannotate(s.data, nullptr, AttentionKind::kPoisson, 2), MissingFit);
  Dataset nogold = s.data;
  nogold.gold.reset();
  CHECK_THROWS_AS(Reannotate(nogold, &fit, AttentionKind::kPoisson, 2), ValidationError);
}

TEST_CASE("spec json") {
  SimSpec spec;
  spec.num_tasks = 77;
  spec.separation = 1.5;
  spec.attention = AttentionKind::kGaussian;
  spec.seed = 123456789012ULL;
  spec.workers = {Profile(0.8, AttentionKind::kGaussian, 3.0)};
  SimSpec back = SimSpecFromJson(SimSpecToJson(spec));
  CHECK(back.num_tasks == 77);
  CHECK(back.separation == 1.5);
  CHECK(back.attention == AttentionKind::kGaussian);
  CHECK(back.seed == spec.seed);
  REQUIRE(back.workers.size() == 1);
  CHECK(back.workers[0].amplitude == 0.8);
  CHECK(back.workers[0].attention.mu == 3.0);
  CHECK_THROWS_AS(SimSpecFromJson("{\"num_tasks\": "), ParseError);
  CHECK_THROWS_AS(SimSpecFromJson("{\"answer_rate\": 0}"), ValidationError);
  CHECK_THROWS_AS(SimSpecFromJson("{\"mix\": {\"expert\": 0.5}}"), ValidationError);
}
