// crowd/dataset.cc

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

#include "crowd/dataset.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace crowd {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<int> Dataset::AnsweredBy(int w) const {
  std::vector<int> tasks;
  for (int i = 0; i < num_tasks(); ++i)
    if (answers(i, w) != kNoAnswer) tasks.push_back(i);
  return tasks;
}

int Dataset::NumAnswered(int w) const {
  return static_cast<int>((answers.col(w).array() != kNoAnswer).count());
}

void Dataset::Validate() const {
  const int n = num_tasks(), nw = num_workers();
  if (n < 1) throw ValidationError("dataset has no tasks");
  if (nw < 1) throw ValidationError("dataset has no workers");
  if (dim() < 1) throw ValidationError("feature dimension must be >= 1");
  if (features.rows() != n)
    throw ValidationError("features have " + std::to_string(features.rows()) +
                          " rows but there are " + std::to_string(n) +
                          " tasks");
  if (num_classes < 2) throw ValidationError("num_classes must be >= 2");
  if (!features.allFinite())
    throw ValidationError("features contain non-finite values");
  for (int w = 0; w < nw; ++w) {
    for (int i = 0; i < n; ++i) {
      int a = answers(i, w);
      if (a < 0 || a > num_classes)
        throw ValidationError("answer " + std::to_string(a) + " of worker " +
                              std::to_string(w) + " on task " +
                              std::to_string(i) + " is outside 0.." +
                              std::to_string(num_classes));
    }
  }
  if (static_cast<int>(orders.size()) != nw)
    throw ValidationError("orders must have one entry per worker");
  for (int w = 0; w < nw; ++w) {
    if (!orders[w]) continue;
    std::vector<int> sorted = *orders[w];
    std::sort(sorted.begin(), sorted.end());
    if (sorted != AnsweredBy(w))
      throw ValidationError("completion order of worker " + std::to_string(w) +
                            " is not a permutation of its answered tasks");
  }
  if (gold) {
    if (static_cast<int>(gold->labels.size()) != n)
      throw ValidationError("gold labels have the wrong length");
    for (int y : gold->labels)
      if (y < 1 || y > num_classes)
        throw ValidationError("gold label " + std::to_string(y) +
                              " is outside 1.." + std::to_string(num_classes));
  }
}

bool operator==(const Dataset &a, const Dataset &b) {
  auto gold_eq = [&]() {
    if (a.gold.has_value() != b.gold.has_value()) return false;
    return !a.gold || a.gold->labels == b.gold->labels;
  };
  return a.num_classes == b.num_classes &&
         a.features.rows() == b.features.rows() &&
         a.features.cols() == b.features.cols() && a.features == b.features &&
         a.answers.rows() == b.answers.rows() &&
         a.answers.cols() == b.answers.cols() && a.answers == b.answers &&
         a.orders == b.orders && gold_eq();
}

int ArgmaxLabel(const Eigen::Ref<const Eigen::RowVectorXd> &row) {
  int best = 0;
  for (int c = 1; c < row.size(); ++c)
    if (row(c) > row(best)) best = c;
  return best + 1;
}

AggregationResult MakeResult(Eigen::MatrixXd label_probs, Diagnostics diag) {
  AggregationResult result;
  result.labels.resize(label_probs.rows());
  for (int i = 0; i < label_probs.rows(); ++i)
    result.labels[i] = ArgmaxLabel(label_probs.row(i));
  result.label_probs = std::move(label_probs);
  result.diagnostics = diag;
  return result;
}

FileFormat ParseFileFormat(const std::string &name) {
  if (name == "csv") return FileFormat::kCsv;
  if (name == "json") return FileFormat::kJson;
  throw ParseError("unknown format '" + name + "' (expected csv or json)");
}

double Accuracy(std::span<const int> pred, std::span<const int> gold) {
  if (pred.size() != gold.size())
    throw LengthMismatch("prediction has " + std::to_string(pred.size()) +
                         " labels, gold has " + std::to_string(gold.size()));
  if (pred.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < pred.size(); ++i) hits += pred[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

CompletionOrders InferOrder(const Dataset &data) {
  CompletionOrders out;
  const int nw = data.num_workers();
  out.orders.resize(nw);
  out.synthetic.assign(nw, false);
  for (int w = 0; w < nw; ++w) {
    if (w < static_cast<int>(data.orders.size()) && data.orders[w]) {
      out.orders[w] = *data.orders[w];
    } else {
      out.orders[w] = data.AnsweredBy(w);
      out.synthetic[w] = true;
    }
  }
  return out;
}

Eigen::MatrixXi CompletionRanks(const CompletionOrders &orders,
                                int num_tasks) {
  const int nw = static_cast<int>(orders.orders.size());
  Eigen::MatrixXi ranks = Eigen::MatrixXi::Zero(num_tasks, nw);
  for (int w = 0; w < nw; ++w) {
    const auto &order = orders.orders[w];
    for (size_t r = 0; r < order.size(); ++r)
      ranks(order[r], w) = static_cast<int>(r) + 1;
  }
  return ranks;
}

std::string FormatReal(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV helpers.

namespace {

std::vector<std::string> SplitCsvLine(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
      cell.pop_back();
    size_t start = cell.find_first_not_of(' ');
    cells.push_back(start == std::string::npos ? "" : cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

long ParseInt(const std::string &s, const std::string &what) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw ParseError("cannot parse " + what + " '" + s + "' as an integer");
  }
}

double ParseDouble(const std::string &s, const std::string &what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw ParseError("cannot parse " + what + " '" + s + "' as a number");
  }
}

std::ifstream OpenForRead(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream OpenForWrite(const fs::path &path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

struct Dims {
  int n = -1, w = -1, c = -1, d = -1;
};

// Header line: "# num_tasks=N,num_workers=W,num_classes=C,dim=d".
Dims ParseDimsComment(const std::string &line) {
  Dims dims;
  std::string body = line.substr(1);
  for (const std::string &kv : SplitCsvLine(body)) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) continue;
    std::string key = kv.substr(0, eq);
    key.erase(0, key.find_first_not_of(' '));
    int value = static_cast<int>(ParseInt(kv.substr(eq + 1), key));
    if (key == "num_tasks") dims.n = value;
    else if (key == "num_workers") dims.w = value;
    else if (key == "num_classes") dims.c = value;
    else if (key == "dim") dims.d = value;
  }
  if (dims.n < 1 || dims.w < 1 || dims.c < 2 || dims.d < 1)
    throw ParseError("answers.csv header must declare num_tasks, num_workers, "
                     "num_classes and dim");
  return dims;
}

void CheckIndex(long v, int bound, const std::string &what) {
  if (v < 0 || v >= bound)
    throw ValidationError(what + " " + std::to_string(v) + " is outside 0.." +
                          std::to_string(bound - 1));
}

Dataset LoadCsv(const fs::path &dir) {
  std::ifstream answers_in = OpenForRead(dir / "answers.csv");
  std::string line;
  if (!std::getline(answers_in, line) || line.empty() || line[0] != '#')
    throw ParseError("answers.csv must start with a '# num_tasks=...' line");
  Dims dims = ParseDimsComment(line);
  if (!std::getline(answers_in, line))
    throw ParseError("answers.csv is missing its column header");

  Dataset data;
  data.num_classes = dims.c;
  data.answers = Eigen::MatrixXi::Zero(dims.n, dims.w);
  data.features = Eigen::MatrixXd::Zero(dims.n, dims.d);
  data.orders.assign(dims.w, std::nullopt);

  std::vector<std::map<int, int>> ranks(dims.w);  // rank -> task
  std::vector<int> with_rank(dims.w, 0), without_rank(dims.w, 0);
  int lineno = 2;
  while (std::getline(answers_in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cells = SplitCsvLine(line);
    if (cells.size() < 3 || cells.size() > 4)
      throw ParseError("answers.csv line " + std::to_string(lineno) +
                       ": expected task_id,worker_id,label[,order_rank]");
    long task = ParseInt(cells[0], "task_id");
    long worker = ParseInt(cells[1], "worker_id");
    long label = ParseInt(cells[2], "label");
    CheckIndex(task, dims.n, "task_id");
    CheckIndex(worker, dims.w, "worker_id");
    if (label < 0 || label > dims.c)
      throw ValidationError("answers.csv line " + std::to_string(lineno) +
                            ": label " + std::to_string(label) +
                            " is outside 0.." + std::to_string(dims.c));
    if (label == kNoAnswer) continue;
    if (data.answers(task, worker) != kNoAnswer)
      throw ValidationError("duplicate answer for task " +
                            std::to_string(task) + ", worker " +
                            std::to_string(worker));
    data.answers(task, worker) = static_cast<int>(label);
    if (cells.size() == 4 && !cells[3].empty()) {
      long rank = ParseInt(cells[3], "order_rank");
      if (!ranks[worker].emplace(static_cast<int>(rank), task).second)
        throw ValidationError("worker " + std::to_string(worker) +
                              " repeats order_rank " + std::to_string(rank));
      ++with_rank[worker];
    } else {
      ++without_rank[worker];
    }
  }
  for (int w = 0; w < dims.w; ++w) {
    if (with_rank[w] > 0 && without_rank[w] > 0)
      throw ValidationError("worker " + std::to_string(w) +
                            " has order ranks on only some answers");
    if (with_rank[w] == 0) continue;
    std::vector<int> order;
    int expected = 1;
    for (const auto &[rank, task] : ranks[w]) {
      if (rank != expected++)
        throw ValidationError("order ranks of worker " + std::to_string(w) +
                              " must be 1..N_w without gaps");
      order.push_back(task);
    }
    data.orders[w] = std::move(order);
  }

  std::ifstream features_in = OpenForRead(dir / "features.csv");
  if (!std::getline(features_in, line))
    throw ParseError("features.csv is empty");
  if (static_cast<int>(SplitCsvLine(line).size()) != dims.d + 1)
    throw ValidationError("features.csv header does not have dim+1 columns");
  std::vector<bool> seen(dims.n, false);
  lineno = 1;
  while (std::getline(features_in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cells = SplitCsvLine(line);
    if (static_cast<int>(cells.size()) != dims.d + 1)
      throw ValidationError("features.csv line " + std::to_string(lineno) +
                            ": expected " + std::to_string(dims.d + 1) +
                            " columns");
    long task = ParseInt(cells[0], "task_id");
    CheckIndex(task, dims.n, "task_id");
    if (seen[task])
      throw ValidationError("features.csv repeats task " +
                            std::to_string(task));
    seen[task] = true;
    for (int j = 0; j < dims.d; ++j)
      data.features(task, j) = ParseDouble(cells[j + 1], "feature");
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw ValidationError("features.csv does not cover every task");

  if (fs::exists(dir / "gold.csv")) {
    std::ifstream gold_in = OpenForRead(dir / "gold.csv");
    std::getline(gold_in, line);
    GoldLabels gold;
    gold.labels.assign(dims.n, 0);
    while (std::getline(gold_in, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto cells = SplitCsvLine(line);
      if (cells.size() != 2) throw ParseError("gold.csv: expected task_id,label");
      long task = ParseInt(cells[0], "task_id");
      CheckIndex(task, dims.n, "task_id");
      gold.labels[task] = static_cast<int>(ParseInt(cells[1], "label"));
    }
    data.gold = std::move(gold);
  }
  data.Validate();
  return data;
}

void SaveCsv(const Dataset &data, const fs::path &dir) {
  fs::create_directories(dir);
  const int n = data.num_tasks(), nw = data.num_workers();
  Eigen::MatrixXi ranks = Eigen::MatrixXi::Zero(n, nw);
  for (int w = 0; w < nw; ++w) {
    if (!data.orders[w]) continue;
    const auto &order = *data.orders[w];
    for (size_t r = 0; r < order.size(); ++r)
      ranks(order[r], w) = static_cast<int>(r) + 1;
  }
  {
    std::ofstream out = OpenForWrite(dir / "answers.csv");
    out << "# num_tasks=" << n << ",num_workers=" << nw
        << ",num_classes=" << data.num_classes << ",dim=" << data.dim() << "\n";
    out << "task_id,worker_id,label,order_rank\n";
    for (int w = 0; w < nw; ++w) {
      for (int i = 0; i < n; ++i) {
        if (data.answers(i, w) == kNoAnswer) continue;
        out << i << ',' << w << ',' << data.answers(i, w) << ',';
        if (data.orders[w]) out << ranks(i, w);
        out << '\n';
      }
    }
  }
  {
    std::ofstream out = OpenForWrite(dir / "features.csv");
    out << "task_id";
    for (int j = 0; j < data.dim(); ++j) out << ",x" << j;
    out << '\n';
    for (int i = 0; i < n; ++i) {
      out << i;
      for (int j = 0; j < data.dim(); ++j)
        out << ',' << FormatReal(data.features(i, j));
      out << '\n';
    }
  }
  if (data.gold) {
    std::ofstream out = OpenForWrite(dir / "gold.csv");
    out << "task_id,label\n";
    for (int i = 0; i < n; ++i) out << i << ',' << data.gold->labels[i] << '\n';
  }
}

Dataset LoadJson(const fs::path &path) {
  std::ifstream in = OpenForRead(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    const int n = doc.at("num_tasks").get<int>();
    const int nw = doc.at("num_workers").get<int>();
    const int d = doc.at("dim").get<int>();
    Dataset data;
    data.num_classes = doc.at("num_classes").get<int>();
    if (n < 1 || nw < 1 || d < 1)
      throw ValidationError("num_tasks, num_workers and dim must be >= 1");
    data.answers = Eigen::MatrixXi::Zero(n, nw);
    data.features.resize(n, d);
    const auto &feats = doc.at("features");
    if (static_cast<int>(feats.size()) != n)
      throw ValidationError("features must have num_tasks rows");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(feats[i].size()) != d)
        throw ValidationError("feature row " + std::to_string(i) +
                              " does not have dim entries");
      for (int j = 0; j < d; ++j) data.features(i, j) = feats[i][j].get<double>();
    }
    for (const auto &triple : doc.at("answers")) {
      if (triple.size() != 3)
        throw ParseError("answers entries must be [task, worker, label]");
      int task = triple[0].get<int>(), worker = triple[1].get<int>();
      int label = triple[2].get<int>();
      CheckIndex(task, n, "task");
      CheckIndex(worker, nw, "worker");
      if (label < 0 || label > data.num_classes)
        throw ValidationError("label " + std::to_string(label) +
                              " is outside 0.." +
                              std::to_string(data.num_classes));
      if (label != kNoAnswer && data.answers(task, worker) != kNoAnswer)
        throw ValidationError("duplicate answer for task " +
                              std::to_string(task) + ", worker " +
                              std::to_string(worker));
      data.answers(task, worker) = label;
    }
    data.orders.assign(nw, std::nullopt);
    if (doc.contains("orders") && !doc["orders"].is_null()) {
      const auto &orders = doc["orders"];
      if (static_cast<int>(orders.size()) != nw)
        throw ValidationError("orders must have num_workers entries");
      for (int w = 0; w < nw; ++w)
        if (!orders[w].is_null())
          data.orders[w] = orders[w].get<std::vector<int>>();
    }
    if (doc.contains("gold") && !doc["gold"].is_null())
      data.gold = GoldLabels{doc["gold"].get<std::vector<int>>()};
    data.Validate();
    return data;
  } catch (const json::exception &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void SaveJson(const Dataset &data, const fs::path &path) {
  json doc;
  doc["num_tasks"] = data.num_tasks();
  doc["num_workers"] = data.num_workers();
  doc["num_classes"] = data.num_classes;
  doc["dim"] = data.dim();
  json feats = json::array();
  for (int i = 0; i < data.num_tasks(); ++i) {
    json row = json::array();
    for (int j = 0; j < data.dim(); ++j) row.push_back(data.features(i, j));
    feats.push_back(std::move(row));
  }
  doc["features"] = std::move(feats);
  json answers = json::array();
  for (int w = 0; w < data.num_workers(); ++w)
    for (int i = 0; i < data.num_tasks(); ++i)
      if (data.answers(i, w) != kNoAnswer)
        answers.push_back({i, w, data.answers(i, w)});
  doc["answers"] = std::move(answers);
  json orders = json::array();
  for (const auto &o : data.orders)
    orders.push_back(o ? json(*o) : json(nullptr));
  doc["orders"] = std::move(orders);
  doc["gold"] = data.gold ? json(data.gold->labels) : json(nullptr);
  std::ofstream out = OpenForWrite(path);
  out << doc.dump(1) << '\n';
}

}  // namespace

Dataset LoadDataset(const std::string &path, FileFormat format) {
  if (!fs::exists(path)) throw ParseError("no such file: " + path);
  return format == FileFormat::kCsv ? LoadCsv(path) : LoadJson(path);
}

void SaveDataset(const Dataset &data, const std::string &path,
                 FileFormat format) {
  data.Validate();
  if (format == FileFormat::kCsv) SaveCsv(data, path);
  else SaveJson(data, path);
}

CsvTable ReadCsvTable(const std::string &path) {
  std::ifstream in = OpenForRead(path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = SplitCsvLine(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != table.header.size())
        throw ParseError(path + ": row has " + std::to_string(cells.size()) +
                         " cells, header has " +
                         std::to_string(table.header.size()));
      table.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw ParseError(path + ": missing header");
  return table;
}

void WriteCsvTable(const CsvTable &table, const std::string &path) {
  std::ofstream out = OpenForWrite(path);
  auto write_row = [&](const std::vector<std::string> &row) {
    for (size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  };
  write_row(table.header);
  for (const auto &row : table.rows) write_row(row);
}

}  // namespace crowd
