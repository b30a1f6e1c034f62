// crowd/report.h

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

#ifndef CROWD_REPORT_H_
#define CROWD_REPORT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crowd/dataset.h"
#include "crowd/gem.h"

namespace crowd {

/// Result file written by `aggregate`.  fit is only set for the GP methods.
std::string ResultToJson(const std::string &method, const AggregationResult &r,
                         const std::optional<GoldLabels> &gold,
                         const FitResult *fit);

/// The parts of a fit that the series need, read back from a result file.
struct FitSummary {
  AttentionKind kind = AttentionKind::kNone;
  std::vector<WorkerParams> workers;
  std::vector<int> tasks_per_worker;
  std::vector<std::vector<double>> curves;  // per worker, by rank
};

/// Throws MissingFit when the file is absent or carries no fit.
FitSummary ReadFitSummary(const std::string &path);
FitSummary SummarizeFit(const FitResult &fit);

struct AnalysisSeries {
  CsvTable histogram;  // bin_lo, bin_hi, count
  CsvTable curves;     // worker_id, role, rank, quality
  CsvTable suitable;   // worker_id, max_quality, global_quality, parameter,
                       // suitable_tasks
};

/// Worker picked for each role; -1 when no worker qualifies.
struct Triple {
  int expert = -1, normal = -1, spammer = -1;
};

/// Expert: global quality >= 0.9; normal: in [0.6, 0.9); spammer: below
/// 0.5.  Within a band the worker with the most answers wins, then the
/// lowest id.
Triple PickTriple(const FitSummary &fit);

/// With triple unset every worker's curve is emitted.  The suitable series
/// holds attention-sensitive workers sorted by ascending max quality, then
/// global quality, and is empty for uniform or no attention.
AnalysisSeries Analyze(const FitSummary &fit, bool triple, int bins = 10);

struct BenchmarkRow {
  std::string dataset, method;
  double accuracy = 0.0;
  int iters = 0;
  double seconds = 0.0;
};

struct BenchmarkFailure {
  std::string dataset, method, error;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;            // one per method and dataset
  std::vector<BenchmarkRow> attention_rows;  // A3C vs A3C(nA) comparison
  std::vector<BenchmarkFailure> failures;
  std::uint64_t seed = 0;
  std::string config;  // JSON text of the run settings
};

/// Columns: dataset, method, accuracy, iters, seconds.  With timing off the
/// seconds column is written as 0 so reruns are byte-identical.
CsvTable BenchmarkTable(const std::vector<BenchmarkRow> &rows, bool timing);
std::string BenchmarkToJson(const BenchmarkReport &report, bool timing);

}  // namespace crowd

#endif  // CROWD_REPORT_H_
