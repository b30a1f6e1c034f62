// tests/test_cli.cc

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

#include <string>
#include <vector>

#include "crowd/cli.h"
#include "crowd/report.h"
#include "json.hpp"
#include "test_util.h"

using namespace crowd;
using crowd_test::ReadFile;
using crowd_test::TempDir;
using crowd_test::WriteFile;
using nlohmann::json;

namespace {

int Run(std::vector<std::string> args) {
  args.insert(args.begin(), "crowd-attn");
  std::vector<const char *> argv;
  for (const std::string &a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

const char *kSmallSpec = R"({"num_tasks": 40, "num_workers": 6, "num_classes": 3,
  "dim": 5, "answer_rate": 0.7, "attention": "poisson"})";

// Writes a small spec and simulates it into dir/sim.
std::string SmallSim(const TempDir &dir, const std::string &format = "csv") {
  WriteFile(dir.path() / "spec.json", kSmallSpec);
  REQUIRE(Run({"--seed", "5", "--format", format, "--out-dir", dir / "sim",
               "simulate", "--spec", dir / "spec.json", "--noise", "0.1",
               "--random-spammers", "1", "--uniform-spammers", "1"}) == kExitOk);
  return format == "csv" ? dir / "sim/data" : dir / "sim/data.json";
}

json ReadJson(const std::string &path) { return json::parse(ReadFile(path)); }

}  // namespace

TEST_CASE("usage errors") {
  CHECK(Run({"--help"}) == kExitOk);
  CHECK(Run({}) == kExitUsage);
  CHECK(Run({"aggregate", "--data", "x"}) == kExitUsage);
  CHECK(Run({"aggregate", "--data", "x", "--method", "nope"}) == kExitUsage);
  CHECK(Run({"--format", "xml", "analyze", "--fit", "f"}) == kExitUsage);
  CHECK(Run({"frobnicate"}) == kExitUsage);
}

TEST_CASE("simulate writes the expected files") {
  TempDir dir("sim");
  SmallSim(dir);
  for (const char *f : {"sim/data/answers.csv", "sim/data/features.csv",
                        "sim/profiles.json", "sim/spec.json",
                        "sim/noise_0.1/answers.csv", "sim/spammers/answers.csv"})
    CHECK(std::filesystem::exists(dir.path() / f));
  json prof = ReadJson(dir / "sim/profiles.json");
  CHECK(prof.size() == 6);
  CHECK(prof[0].contains("amplitude"));
  CHECK(ReadJson(dir / "sim/spec.json")["seed"] == 5);

  Dataset d = LoadDataset(dir / "sim/data", FileFormat::kCsv);
  CHECK(d.num_tasks() == 40);
  CHECK(LoadDataset(dir / "sim/spammers", FileFormat::kCsv).num_workers() == 8);
}

TEST_CASE("json format") {
  TempDir dir("simjson");
  std::string data = SmallSim(dir, "json");
  CHECK(std::filesystem::exists(dir / "sim/noise_0.1.json"));
  CHECK(Run({"--format", "json", "--out-dir", dir / "agg", "aggregate", "--data",
             data, "--method", "ds"}) == kExitOk);
}

TEST_CASE("aggregate result schema") {
  TempDir dir("agg");
  std::string data = SmallSim(dir);
  REQUIRE(Run({"--out-dir", dir / "mv", "aggregate", "--data", data, "--method",
               "mv"}) == kExitOk);
  json r = ReadJson(dir / "mv/result.json");
  CHECK(r["method"] == "mv");
  CHECK(r["labels"].size() == 40);
  CHECK(r["label_probs"][0].size() == 3);
  CHECK(r["diagnostics"].contains("converged"));
  CHECK(r.contains("accuracy"));
  CHECK_FALSE(r.contains("fit"));

  int code = Run({"--out-dir", dir / "a3c", "aggregate", "--data", data,
                  "--method", "a3c", "--gem-max-iters", "4"});
  CHECK((code == kExitOk || code == kExitNotConverged));
  json f = ReadJson(dir / "a3c/result.json")["fit"];
  CHECK(f["attention"] == "poisson");
  REQUIRE(f["workers"].size() == 6);
  for (const char *key : {"amplitude", "lambda", "quality_curve",
                          "suitable_tasks", "synthetic_order"})
    CHECK(f["workers"][0].contains(key));
  CHECK(f["workers"][0]["quality_curve"].size() == f["workers"][0]["num_tasks"]);
  CHECK(f["bound_trace"].size() >= 1);

  // Analyze needs a fit.
  CHECK(Run({"--out-dir", dir / "an", "analyze", "--fit", dir / "mv/result.json"}) ==
        kExitValidation);
  CHECK(Run({"--out-dir", dir / "an", "analyze", "--fit", dir / "missing.json"}) ==
        kExitValidation);
  CHECK(Run({"--out-dir", dir / "an", "analyze", "--fit", dir / "a3c/result.json",
             "--bins", "5"}) == kExitOk);
  CsvTable h = ReadCsvTable(dir / "an/histogram.csv");
  CHECK(h.rows.size() == 5);
  int total = 0;
  for (const auto &row : h.rows) total += std::stoi(row[2]);
  CHECK(total == 6);
  CHECK(ReadCsvTable(dir / "an/curves.csv").header ==
        std::vector<std::string>{"worker_id", "role", "rank", "quality"});
  CHECK(std::filesystem::exists(dir.path() / "an/suitable.csv"));
}

TEST_CASE("bad input exits with a validation error") {
  TempDir dir("bad");
  WriteFile(dir.path() / "bad.json", "{\"num_tasks\": 3");
  CHECK(Run({"--format", "json", "--out-dir", dir / "o", "aggregate", "--data",
             dir / "bad.json", "--method", "mv"}) == kExitValidation);
  CHECK(Run({"--out-dir", dir / "o", "aggregate", "--data", dir / "nothing",
             "--method", "mv"}) == kExitValidation);
  WriteFile(dir.path() / "spec.json", "{\"answer_rate\": 2}");
  CHECK(Run({"--out-dir", dir / "o", "simulate", "--spec", dir / "spec.json"}) ==
        kExitValidation);
}

TEST_CASE("benchmark reruns are byte-identical") {
  TempDir dir("bench");
  std::string data = SmallSim(dir);
  std::vector<std::string> args = {"--seed", "3", "benchmark", "--data", data,
                                   "--data", dir / "sim/noise_0.1",
                                   "--methods", "mv,ds,awmv,gtic", "--no-timing"};
  auto with_out = [&](const std::string &out) {
    std::vector<std::string> a = {"--out-dir", out};
    a.insert(a.end(), args.begin(), args.end());
    return a;
  };
  REQUIRE(Run(with_out(dir / "b1")) == kExitOk);
  REQUIRE(Run(with_out(dir / "b2")) == kExitOk);
  for (const char *f : {"benchmark.csv", "benchmark.json"})
    CHECK(ReadFile(dir.path() / "b1" / f) == ReadFile(dir.path() / "b2" / f));

  CsvTable t = ReadCsvTable(dir / "b1/benchmark.csv");
  CHECK(t.rows.size() == 6);  // awmv fails on three classes
  for (const auto &row : t.rows) CHECK(row[4] == "0");
  json j = ReadJson(dir / "b1/benchmark.json");
  CHECK(j["failures"].size() == 2);
  CHECK(j["failures"][0]["method"] == "awmv");
  CHECK(j["seed"] == 3);
  CHECK(t.rows[3][0] == "noise_0.1");
}

TEST_CASE("triple and suitable series") {
  FitSummary f;
  f.kind = AttentionKind::kPoisson;
  // Worker: amplitude, N_w.
  std::vector<std::pair<double, int>> w = {{0.95, 10}, {0.92, 30}, {0.7, 20},
                                           {0.65, 25}, {0.3, 12}, {0.55, 40}};
  for (auto [amp, n] : w) {
    WorkerParams p;
    p.amplitude = amp;
    p.lambda = 2.0 + amp;
    f.workers.push_back(p);
    f.tasks_per_worker.push_back(n);
    AttentionModel m;
    m.kind = AttentionKind::kPoisson;
    m.num_tasks = n;
    m.lambda = p.lambda;
    f.curves.push_back(QualityCurve(m, amp));
  }
  Triple t = PickTriple(f);
  CHECK(t.expert == 1);
  CHECK(t.normal == 3);
  CHECK(t.spammer == 4);

  AnalysisSeries s = Analyze(f, true);
  std::set<std::string> roles;
  for (const auto &row : s.curves.rows) roles.insert(row[1]);
  CHECK(roles == std::set<std::string>{"expert", "normal", "spammer"});
  CHECK(s.curves.rows.size() == 30 + 25 + 12);

  // Sensitive workers only, ascending by peak quality.
  REQUIRE(s.suitable.rows.size() == 3);
  double last = 0;
  for (const auto &row : s.suitable.rows) {
    CHECK(std::stod(row[1]) >= last);
    last = std::stod(row[1]);
    CHECK(std::stod(row[4]) == doctest::Approx(std::stod(row[3])));
  }
  f.kind = AttentionKind::kUniform;
  CHECK(Analyze(f, false).suitable.rows.empty());
  CHECK(Analyze(f, false).curves.rows.size() == 10 + 30 + 20 + 25 + 12 + 40);
}

TEST_CASE("run method dispatch") {
  Dataset d = crowd_test::MakeDataset(4, 3, 2, {1, 1, 2, 2, 2, 2, 1, 1, 1, 2, 2, 1});
  MethodOptions m;
  for (const std::string &name : {"mv", "ds", "glad", "awmv", "gtic"})
    CHECK(RunMethod(name, d, m).labels.size() == 4);
  std::optional<FitResult> fit;
  RunMethod("a3c-na", d, m, &fit);
  REQUIRE(fit.has_value());
  CHECK(fit->params.kind == AttentionKind::kNone);
  CHECK_THROWS(RunMethod("bogus", d, m));
}
