// crowd/report.cc

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

#include "crowd/report.h"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace crowd {

using nlohmann::json;

namespace {

json WorkerJson(const ModelParams &p, int w) {
  json j{{"worker_id", w},
         {"num_tasks", p.tasks_per_worker[w]},
         {"amplitude", p.workers[w].amplitude},
         {"lambda", p.workers[w].lambda},
         {"mu", p.workers[w].mu},
         {"sigma", p.workers[w].sigma},
         {"attention_sensitive",
          p.tasks_per_worker[w] >= 2 &&
              AttentionSensitive(p.workers[w].amplitude)}};
  try {
    j["suitable_tasks"] = SuitableTaskCount(p.kind, p.workers[w],
                                            p.tasks_per_worker[w]);
  } catch (const NotApplicable &) {
    j["suitable_tasks"] = nullptr;
  }
  return j;
}

}  // namespace

std::string ResultToJson(const std::string &method, const AggregationResult &r,
                         const std::optional<GoldLabels> &gold,
                         const FitResult *fit) {
  json j;
  j["method"] = method;
  j["labels"] = r.labels;
  json probs = json::array();
  for (int i = 0; i < r.label_probs.rows(); ++i) {
    std::vector<double> row(r.label_probs.cols());
    for (int c = 0; c < r.label_probs.cols(); ++c) row[c] = r.label_probs(i, c);
    probs.push_back(row);
  }
  j["label_probs"] = probs;
  j["diagnostics"] = json{{"iterations", r.diagnostics.iterations},
                          {"objective", r.diagnostics.objective},
                          {"converged", r.diagnostics.converged}};
  if (gold) j["accuracy"] = Accuracy(r.labels, *gold);
  if (fit) {
    const ModelParams &p = fit->params;
    json f;
    f["attention"] = AttentionKindName(p.kind);
    f["alpha"] = p.alpha;
    f["beta"] = p.beta;
    f["theta_bar"] = fit->posterior.ThetaBar();
    f["log_evidence"] = fit->posterior.log_evidence;
    f["ep_sweeps"] = fit->posterior.sweeps;
    f["bound_trace"] = fit->bound_trace;
    f["stopped_by_safeguard"] = fit->stopped_by_safeguard;
    json workers = json::array();
    for (int w = 0; w < static_cast<int>(p.workers.size()); ++w) {
      json wj = WorkerJson(p, w);
      wj["synthetic_order"] = static_cast<bool>(fit->orders.synthetic[w]);
      wj["quality_curve"] = fit->quality_curves[w];
      workers.push_back(wj);
    }
    f["workers"] = workers;
    j["fit"] = f;
  }
  return j.dump(1) + "\n";
}

FitSummary SummarizeFit(const FitResult &fit) {
  FitSummary s;
  s.kind = fit.params.kind;
  s.workers = fit.params.workers;
  s.tasks_per_worker = fit.params.tasks_per_worker;
  s.curves = fit.quality_curves;
  return s;
}

FitSummary ReadFitSummary(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw MissingFit("no fit file at " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("fit"))
    throw MissingFit(path + " holds no fit; run aggregate with a3c or a3c-na");
  try {
    const json &f = j["fit"];
    FitSummary s;
    s.kind = ParseAttentionKind(f.at("attention").get<std::string>());
    for (const json &w : f.at("workers")) {
      WorkerParams p;
      p.amplitude = w.at("amplitude").get<double>();
      p.lambda = w.at("lambda").get<double>();
      p.mu = w.at("mu").get<double>();
      p.sigma = w.at("sigma").get<double>();
      s.workers.push_back(p);
      s.tasks_per_worker.push_back(w.at("num_tasks").get<int>());
      s.curves.push_back(w.at("quality_curve").get<std::vector<double>>());
    }
    return s;
  } catch (const json::exception &e) {
    throw ParseError(path + ": " + e.what());
  }
}

Triple PickTriple(const FitSummary &fit) {
  Triple t;
  auto better = [&](int cand, int cur) {
    return cur < 0 || fit.tasks_per_worker[cand] > fit.tasks_per_worker[cur];
  };
  for (int w = 0; w < static_cast<int>(fit.workers.size()); ++w) {
    double q = fit.workers[w].amplitude;
    if (fit.tasks_per_worker[w] == 0) continue;
    if (q >= 0.9) {
      if (better(w, t.expert)) t.expert = w;
    } else if (q >= 0.6) {
      if (better(w, t.normal)) t.normal = w;
    } else if (q < 0.5) {
      if (better(w, t.spammer)) t.spammer = w;
    }
  }
  return t;
}

AnalysisSeries Analyze(const FitSummary &fit, bool triple, int bins) {
  AnalysisSeries out;
  const int nw = static_cast<int>(fit.workers.size());

  std::vector<double> quality;
  for (const WorkerParams &p : fit.workers) quality.push_back(p.amplitude);
  QualityHistogram h = WorkerQualityHistogram(quality, bins);
  out.histogram.header = {"bin_lo", "bin_hi", "count"};
  for (int b = 0; b < bins; ++b)
    out.histogram.rows.push_back({FormatReal(h.edges[b]),
                                  FormatReal(h.edges[b + 1]),
                                  std::to_string(h.counts[b])});

  out.curves.header = {"worker_id", "role", "rank", "quality"};
  auto emit = [&](int w, const std::string &role) {
    for (size_t r = 0; r < fit.curves[w].size(); ++r)
      out.curves.rows.push_back({std::to_string(w), role, std::to_string(r + 1),
                                 FormatReal(fit.curves[w][r])});
  };
  if (triple) {
    Triple t = PickTriple(fit);
    if (t.expert >= 0) emit(t.expert, "expert");
    if (t.normal >= 0) emit(t.normal, "normal");
    if (t.spammer >= 0) emit(t.spammer, "spammer");
  } else {
    for (int w = 0; w < nw; ++w) emit(w, "all");
  }

  out.suitable.header = {"worker_id", "max_quality", "global_quality",
                         "parameter", "suitable_tasks"};
  struct Entry {
    int w;
    double max_q, global_q, param, suitable;
  };
  std::vector<Entry> entries;
  for (int w = 0; w < nw; ++w) {
    double s;
    try {
      s = SuitableTaskCount(fit.kind, fit.workers[w], fit.tasks_per_worker[w]);
    } catch (const NotApplicable &) {
      continue;
    }
    double max_q = *std::max_element(fit.curves[w].begin(), fit.curves[w].end());
    double param = fit.kind == AttentionKind::kPoisson ? fit.workers[w].lambda
                                                       : fit.workers[w].mu;
    entries.push_back({w, max_q, fit.workers[w].amplitude, param, s});
  }
  // Peaks often sit at the clamp, so the global quality breaks ties.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry &a, const Entry &b) {
                     if (a.max_q != b.max_q) return a.max_q < b.max_q;
                     return a.global_q < b.global_q;
                   });
  for (const Entry &e : entries)
    out.suitable.rows.push_back({std::to_string(e.w), FormatReal(e.max_q),
                                 FormatReal(e.global_q), FormatReal(e.param),
                                 FormatReal(e.suitable)});
  return out;
}

CsvTable BenchmarkTable(const std::vector<BenchmarkRow> &rows, bool timing) {
  CsvTable t;
  t.header = {"dataset", "method", "accuracy", "iters", "seconds"};
  for (const BenchmarkRow &r : rows)
    t.rows.push_back({r.dataset, r.method, FormatReal(r.accuracy),
                      std::to_string(r.iters),
                      timing ? FormatReal(r.seconds) : "0"});
  return t;
}

std::string BenchmarkToJson(const BenchmarkReport &report, bool timing) {
  auto rows = [&](const std::vector<BenchmarkRow> &v) {
    json a = json::array();
    for (const BenchmarkRow &r : v)
      a.push_back(json{{"dataset", r.dataset},
                       {"method", r.method},
                       {"accuracy", r.accuracy},
                       {"iters", r.iters},
                       {"seconds", timing ? r.seconds : 0.0}});
    return a;
  };
  json j;
  j["seed"] = report.seed;
  j["config"] = json::parse(report.config.empty() ? "{}" : report.config);
  j["rows"] = rows(report.rows);
  j["attention_rows"] = rows(report.attention_rows);
  json f = json::array();
  for (const BenchmarkFailure &e : report.failures)
    f.push_back(json{{"dataset", e.dataset}, {"method", e.method},
                     {"error", e.error}});
  j["failures"] = f;
  return j.dump(1) + "\n";
}

}  // namespace crowd
