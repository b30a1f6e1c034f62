// crowd/cli.cc

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

#include "crowd/cli.h"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "crowd/baselines.h"
#include "crowd/report.h"
#include "crowd/simulator.h"

namespace crowd {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> &MethodNames() {
  static const std::vector<std::string> names = {"mv",   "ds", "glad", "awmv",
                                                 "gtic", "a3c", "a3c-na"};
  return names;
}

AggregationResult RunMethod(const std::string &method, const Dataset &data,
                            const MethodOptions &options,
                            std::optional<FitResult> *fit) {
  if (method == "mv") return MajorityVote(data);
  if (method == "ds") return DawidSkene(data).result;
  if (method == "glad") return Glad(data).result;
  if (method == "awmv") return Awmv(data);
  if (method == "gtic") {
    GticOptions g;
    g.seed = options.seed;
    return Gtic(data, g);
  }
  if (method == "a3c" || method == "a3c-na") {
    GemConfig config = options.gem;
    if (method == "a3c-na") config.attention = AttentionKind::kNone;
    KernelMatrix gram = BuildGramEscalating(data.features, options.kernel);
    FitResult f = Fit(data, gram, config);
    AggregationResult r = f.result;
    if (fit) *fit = std::move(f);
    return r;
  }
  throw ValidationError("unknown method '" + method + "'");
}

namespace {

struct Settings {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = ".";
  std::string format = "csv";
  bool timing = true;

  // Model and inference.
  std::string attention = "poisson";
  std::string kernel = "dot";
  double lengthscale = 1.0;
  int gem_max_iters = 50;
  double gem_tol = 1e-4;
  double alpha = 2.0, beta = 9.0;
  bool fit_alpha_beta = false;
  double ep_tol = 1e-5;
  int ep_max_sweeps = 200;
  double ep_damping = 0.5;
  int quad_points = 32;

  MethodOptions Methods() const {
    MethodOptions m;
    m.seed = seed;
    m.gem.attention = ParseAttentionKind(attention);
    m.gem.max_iters = gem_max_iters;
    m.gem.tol = gem_tol;
    m.gem.alpha = alpha;
    m.gem.beta = beta;
    m.gem.optimize_alpha_beta = fit_alpha_beta;
    m.gem.ep.tol = ep_tol;
    m.gem.ep.max_sweeps = ep_max_sweeps;
    m.gem.ep.damping = ep_damping;
    m.gem.ep.quad_points = quad_points;
    m.gem.ep.seed = seed;
    m.kernel.kind = kernel == "rbf" ? KernelKind::kRbf : KernelKind::kDot;
    m.kernel.lengthscale = lengthscale;
    return m;
  }

  json ToJson() const {
    return json{{"attention", attention},     {"kernel", kernel},
                {"lengthscale", lengthscale}, {"gem_max_iters", gem_max_iters},
                {"gem_tol", gem_tol},         {"alpha", alpha},
                {"beta", beta},               {"fit_alpha_beta", fit_alpha_beta},
                {"ep_tol", ep_tol},           {"ep_max_sweeps", ep_max_sweeps},
                {"ep_damping", ep_damping},   {"quad_points", quad_points}};
  }
};

void AddModelFlags(CLI::App *cmd, Settings *s) {
  cmd->add_option("--attention", s->attention, "attention model for a3c")
      ->check(CLI::IsMember({"poisson", "gaussian", "uniform", "none"}));
  cmd->add_option("--kernel", s->kernel, "GP kernel")
      ->check(CLI::IsMember({"dot", "rbf"}));
  cmd->add_option("--lengthscale", s->lengthscale, "rbf lengthscale")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--gem-max-iters", s->gem_max_iters)->check(CLI::NonNegativeNumber);
  cmd->add_option("--gem-tol", s->gem_tol)->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", s->alpha, "Beta prior on the outlier rate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--beta", s->beta)->check(CLI::PositiveNumber);
  cmd->add_flag("--fit-alpha-beta", s->fit_alpha_beta,
                "also update alpha and beta in the M-step");
  cmd->add_option("--ep-tol", s->ep_tol)->check(CLI::PositiveNumber);
  cmd->add_option("--ep-max-sweeps", s->ep_max_sweeps)->check(CLI::NonNegativeNumber);
  cmd->add_option("--ep-damping", s->ep_damping)->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--quad-points", s->quad_points)->check(CLI::Range(2, 200));
}

FileFormat Format(const Settings &s) { return ParseFileFormat(s.format); }

// Dataset path for the chosen format: a directory for csv, a file for json.
fs::path DataPath(const fs::path &dir, const std::string &name,
                  FileFormat format) {
  return format == FileFormat::kCsv ? dir / name : dir / (name + ".json");
}

void WriteText(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

std::string DatasetName(const std::string &path) {
  fs::path p(path);
  if (p.filename().empty()) p = p.parent_path();
  return p.extension() == ".json" ? p.stem().string() : p.filename().string();
}

std::string RatioName(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", r);
  return buf;
}

// --- aggregate -------------------------------------------------------------

int Aggregate(const Settings &s, const std::string &data_path,
              const std::string &method) {
  Dataset data = LoadDataset(data_path, Format(s));
  std::optional<FitResult> fit;
  AggregationResult r = RunMethod(method, data, s.Methods(), &fit);
  WriteText(fs::path(s.out_dir) / "result.json",
            ResultToJson(method, r, data.gold, fit ? &*fit : nullptr));
  if (!r.diagnostics.converged) {
    std::cerr << "warning: " << method << " did not converge\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

// --- simulate --------------------------------------------------------------

struct SimFlags {
  std::string spec_path;
  std::vector<double> noise;
  int random_spammers = 0, uniform_spammers = 0;
  bool news = false;
  std::string sim_attention;
};

int Simulate(const Settings &s, const SimFlags &f) {
  SimSpec spec = f.spec_path.empty() ? SimSpec{} : LoadSimSpec(f.spec_path);
  if (s.seed_given) spec.seed = s.seed;
  if (f.news) spec.news_protocol = true;
  if (!f.sim_attention.empty()) spec.attention = ParseAttentionKind(f.sim_attention);
  Simulation sim = crowd::Simulate(spec);
  const FileFormat format = Format(s);
  const fs::path out(s.out_dir);
  fs::create_directories(out);
  SaveDataset(sim.data, DataPath(out, "data", format).string(), format);
  WriteText(out / "profiles.json", ProfilesToJson(sim.profiles));
  WriteText(out / "spec.json", SimSpecToJson(spec));
  for (double r : f.noise) {
    if (!(r >= 0.0 && r <= 0.5))
      throw ValidationError("noise ratio must lie in [0, 0.5]");
    Dataset noisy = InjectNoise(sim.data, r, spec.seed);
    SaveDataset(noisy, DataPath(out, "noise_" + RatioName(r), format).string(),
                format);
  }
  if (f.random_spammers > 0 || f.uniform_spammers > 0) {
    Dataset spam = InjectSpammers(sim.data, f.random_spammers,
                                  f.uniform_spammers, spec.seed);
    SaveDataset(spam, DataPath(out, "spammers", format).string(), format);
  }
  return kExitOk;
}

// --- benchmark -------------------------------------------------------------

struct Cell {
  int dataset = 0;
  std::string method;
  AttentionKind attention = AttentionKind::kPoisson;
  bool attention_table = false;
  BenchmarkRow row;
  std::string error;
};

int ThreadCount() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char *env = std::getenv("CROWD_ATTN_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (const std::exception &) {
      throw ValidationError("CROWD_ATTN_THREADS must be a positive integer");
    }
  }
  return std::max(1, n);
}

void RunCells(std::vector<Cell> *cells, const std::vector<Dataset> &data,
              const std::vector<std::string> &names, const Settings &s) {
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t k = next++; k < cells->size(); k = next++) {
      Cell &c = (*cells)[k];
      const Dataset &d = data[c.dataset];
      c.row.dataset = names[c.dataset];
      c.row.method = c.method;
      MethodOptions m = s.Methods();
      m.gem.attention = c.attention;
      try {
        if (!d.gold) throw ValidationError("dataset has no gold labels");
        auto t0 = std::chrono::steady_clock::now();
        AggregationResult r = RunMethod(c.method, d, m);
        auto t1 = std::chrono::steady_clock::now();
        c.row.accuracy = Accuracy(r.labels, *d.gold);
        c.row.iters = r.diagnostics.iterations;
        c.row.seconds = std::chrono::duration<double>(t1 - t0).count();
      } catch (const std::exception &e) {
        c.error = e.what();
      }
    }
  };
  const int threads = std::min<int>(ThreadCount(), cells->size());
  if (threads <= 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  for (std::thread &t : pool) t.join();
}

int Benchmark(const Settings &s, const std::vector<std::string> &paths,
              std::vector<std::string> methods, bool variants) {
  const FileFormat format = Format(s);
  std::vector<Dataset> data;
  std::vector<std::string> names;
  for (const std::string &p : paths) {
    data.push_back(LoadDataset(p, format));
    names.push_back(DatasetName(p));
  }
  const AttentionKind attention = ParseAttentionKind(s.attention);

  std::vector<Cell> cells;
  for (size_t d = 0; d < data.size(); ++d)
    for (const std::string &m : methods)
      cells.push_back({static_cast<int>(d), m, attention, false, {}, {}});

  if (variants) {
    // Re-annotated copies with Poisson and Gaussian attention, each fitted
    // with and without attention.
    const size_t base = data.size();
    for (size_t d = 0; d < base; ++d) {
      if (!data[d].gold) continue;
      MethodOptions m = s.Methods();
      std::optional<FitResult> fit;
      RunMethod("a3c-na", data[d], m, &fit);
      for (AttentionKind kind : {AttentionKind::kPoisson, AttentionKind::kGaussian}) {
        data.push_back(Reannotate(data[d], &*fit, kind, s.seed));
        names.push_back(names[d] +
                        (kind == AttentionKind::kPoisson ? "(P)" : "(G)"));
        int idx = static_cast<int>(data.size()) - 1;
        cells.push_back({idx, "a3c", kind, true, {}, {}});
        cells.push_back({idx, "a3c-na", kind, true, {}, {}});
      }
    }
  }
  RunCells(&cells, data, names, s);

  BenchmarkReport report;
  report.seed = s.seed;
  json config = s.ToJson();
  config["methods"] = methods;
  config["attention_variants"] = variants;
  report.config = config.dump();
  for (const Cell &c : cells) {
    if (!c.error.empty()) {
      report.failures.push_back({names[c.dataset], c.method, c.error});
      continue;
    }
    (c.attention_table ? report.attention_rows : report.rows).push_back(c.row);
  }
  const fs::path out(s.out_dir);
  fs::create_directories(out);
  WriteCsvTable(BenchmarkTable(report.rows, s.timing),
                (out / "benchmark.csv").string());
  if (variants)
    WriteCsvTable(BenchmarkTable(report.attention_rows, s.timing),
                  (out / "attention.csv").string());
  WriteText(out / "benchmark.json", BenchmarkToJson(report, s.timing));
  for (const BenchmarkFailure &f : report.failures)
    std::cerr << "warning: " << f.method << " on " << f.dataset << ": "
              << f.error << "\n";
  return kExitOk;
}

// --- analyze ---------------------------------------------------------------

int Analyze(const Settings &s, const std::string &fit_path, bool triple,
            int bins) {
  FitSummary fit = ReadFitSummary(fit_path);
  AnalysisSeries series = crowd::Analyze(fit, triple, bins);
  const fs::path out(s.out_dir);
  fs::create_directories(out);
  WriteCsvTable(series.histogram, (out / "histogram.csv").string());
  WriteCsvTable(series.curves, (out / "curves.csv").string());
  WriteCsvTable(series.suitable, (out / "suitable.csv").string());
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char *const *argv) {
  CLI::App app{"Attention-aware crowdsourced label aggregation"};
  app.require_subcommand(1);
  app.fallthrough();
  Settings s;
  app.add_option("--seed", s.seed, "random seed")
      ->each([&](const std::string &) { s.seed_given = true; });
  app.add_option("--out-dir", s.out_dir, "directory for output files");
  app.add_option("--format", s.format, "dataset file format")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string data_path, method;
  CLI::App *agg = app.add_subcommand("aggregate", "infer labels for one dataset");
  agg->add_option("--data", data_path, "dataset directory (csv) or file (json)")
      ->required();
  agg->add_option("--method", method)->required()->check(CLI::IsMember(MethodNames()));
  AddModelFlags(agg, &s);

  SimFlags sim;
  CLI::App *simc = app.add_subcommand("simulate", "generate a simulated dataset");
  simc->add_option("--spec", sim.spec_path, "simulation spec (JSON)");
  simc->add_option("--noise", sim.noise, "also write a copy with this noise ratio");
  simc->add_option("--random-spammers", sim.random_spammers)->check(CLI::NonNegativeNumber);
  simc->add_option("--uniform-spammers", sim.uniform_spammers)->check(CLI::NonNegativeNumber);
  simc->add_flag("--news-protocol", sim.news, "draw qualities in three bands");
  simc->add_option("--sim-attention", sim.sim_attention, "attention of simulated workers")
      ->check(CLI::IsMember({"poisson", "gaussian", "uniform", "none"}));

  std::vector<std::string> bench_paths;
  std::vector<std::string> bench_methods = {"mv", "ds", "glad", "awmv", "gtic",
                                            "a3c-na"};
  bool variants = false, no_timing = false;
  CLI::App *bench = app.add_subcommand("benchmark", "accuracy table over datasets");
  bench->add_option("--data", bench_paths, "datasets with gold labels")->required();
  bench->add_option("--methods", bench_methods)
      ->delimiter(',')
      ->check(CLI::IsMember(MethodNames()));
  bench->add_flag("--attention-variants", variants,
                  "compare a3c and a3c-na on re-annotated copies");
  bench->add_flag("--no-timing", no_timing, "write 0 in the seconds column");
  AddModelFlags(bench, &s);

  std::string fit_path;
  bool triple = false;
  int bins = 10;
  CLI::App *an = app.add_subcommand("analyze", "series from a fitted result");
  an->add_option("--fit", fit_path, "result.json from aggregate")->required();
  an->add_flag("--triple", triple, "only an expert, a normal worker and a spammer");
  an->add_option("--bins", bins, "histogram bins")->check(CLI::Range(1, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  s.timing = !no_timing;

  try {
    if (*agg) return Aggregate(s, data_path, method);
    if (*simc) return Simulate(s, sim);
    if (*bench) return Benchmark(s, bench_paths, bench_methods, variants);
    if (*an) return Analyze(s, fit_path, triple, bins);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace crowd
