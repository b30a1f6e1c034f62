// crowd/dataset.h

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

#ifndef CROWD_DATASET_H_
#define CROWD_DATASET_H_

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowd/errors.h"

namespace crowd {

/// Label value reserved for "worker did not answer this task".  Classes are
/// 1-based everywhere, so a valid answer lies in 1..num_classes.
inline constexpr int kNoAnswer = 0;

using Labels = std::vector<int>;

/// Ground-truth labels.  Only evaluation code reads these; the aggregators
/// take a Dataset and never look at its gold field.
struct GoldLabels {
  Labels labels;
};

/// Tasks, their features, and the crowd's answers.
///
/// answers(i, w) is the label worker w gave task i, or kNoAnswer.  When a
/// worker's completion order is known, orders[w] lists the task indices that
/// worker answered in the order they were answered.  An order is a
/// permutation of exactly the answered tasks.
struct Dataset {
  Eigen::MatrixXd features;  // N x d
  Eigen::MatrixXi answers;   // N x W
  int num_classes = 0;
  std::vector<std::optional<std::vector<int>>> orders;  // size W
  std::optional<GoldLabels> gold;

  int num_tasks() const { return static_cast<int>(answers.rows()); }
  int num_workers() const { return static_cast<int>(answers.cols()); }
  int dim() const { return static_cast<int>(features.cols()); }

  /// Task indices answered by worker w, ascending.
  std::vector<int> AnsweredBy(int w) const;
  int NumAnswered(int w) const;

  /// Throws ValidationError when any invariant is broken.
  void Validate() const;
};

bool operator==(const Dataset &a, const Dataset &b);

/// Return contract shared by every aggregator.
struct Diagnostics {
  int iterations = 0;
  double objective = 0.0;
  bool converged = true;
};

struct AggregationResult {
  Labels labels;                  // 1-based, size N
  Eigen::MatrixXd label_probs;    // N x C, rows sum to one
  Diagnostics diagnostics;
};

/// Index (1-based class) of the row maximum; ties go to the smallest class.
int ArgmaxLabel(const Eigen::Ref<const Eigen::RowVectorXd> &row);

/// Fills labels from label_probs using ArgmaxLabel.
AggregationResult MakeResult(Eigen::MatrixXd label_probs, Diagnostics diag);

enum class FileFormat { kCsv, kJson };

FileFormat ParseFileFormat(const std::string &name);

/// Loads a dataset.  For kJson, path names a single file.  For kCsv, path
/// names a directory holding answers.csv, features.csv and optionally
/// gold.csv.  Throws ParseError or ValidationError.
Dataset LoadDataset(const std::string &path, FileFormat format);

/// Writes a dataset in the same layout LoadDataset reads.  Real numbers are
/// printed with 17 significant digits so a load reproduces them exactly.
void SaveDataset(const Dataset &data, const std::string &path,
                 FileFormat format);

/// Fraction of positions where pred equals gold.
double Accuracy(std::span<const int> pred, std::span<const int> gold);
inline double Accuracy(const Labels &pred, const GoldLabels &gold) {
  return Accuracy(std::span<const int>(pred), std::span<const int>(gold.labels));
}

struct CompletionOrders {
  std::vector<std::vector<int>> orders;  // per worker
  std::vector<bool> synthetic;           // true where the order was inferred
};

/// Fills in missing completion orders with the ascending list of answered
/// tasks and flags them as synthetic.  Declared orders pass through.
CompletionOrders InferOrder(const Dataset &data);

/// Rank (1-based) of each answered task in each worker's order; 0 where the
/// worker did not answer.  N x W.
Eigen::MatrixXi CompletionRanks(const CompletionOrders &orders, int num_tasks);

/// Minimal CSV table used for the analysis outputs: a header row and numeric
/// or string cells.  Lines starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable ReadCsvTable(const std::string &path);
void WriteCsvTable(const CsvTable &table, const std::string &path);

/// "%.17g" formatting used for every real number written to disk.
std::string FormatReal(double x);

}  // namespace crowd

#endif  // CROWD_DATASET_H_
