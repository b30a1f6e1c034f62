// crowd/simulator.cc

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

#include "crowd/simulator.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace crowd {

using nlohmann::json;

namespace {

// Independent stream per (seed, purpose, index).
std::mt19937_64 Stream(std::uint64_t seed, std::uint64_t purpose,
                       std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

double Uniform(std::mt19937_64 &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int WrongLabel(std::mt19937_64 &rng, int right, int num_classes) {
  int k = std::uniform_int_distribution<int>(1, num_classes - 1)(rng);
  return k >= right ? k + 1 : k;
}

// Largest-remainder apportionment of total into the given fractions.
std::vector<int> Apportion(const std::vector<double> &fractions, int total) {
  std::vector<int> counts(fractions.size());
  std::vector<std::pair<double, int>> rema;
  int used = 0;
  for (size_t k = 0; k < fractions.size(); ++k) {
    double exact = fractions[k] * total;
    counts[k] = static_cast<int>(std::floor(exact + 1e-9));
    used += counts[k];
    rema.emplace_back(exact - counts[k], static_cast<int>(k));
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](auto a, auto b) { return a.first > b.first; });
  for (int k = 0; used < total; ++k, ++used) ++counts[rema[k].second];
  return counts;
}

double DrawAmplitude(WorkerKind kind, int num_classes, std::mt19937_64 &rng) {
  switch (kind) {
    case WorkerKind::kExpert: return Uniform(rng, 0.9, 0.99);
    case WorkerKind::kNormal: return Uniform(rng, 0.6, 0.9);
    case WorkerKind::kSpammer: return Uniform(rng, 0.2, 0.5);
    default: return 1.0 / num_classes;
  }
}

std::vector<double> CurveForProfile(const WorkerProfile &p) {
  if (p.kind == WorkerKind::kRandomSpammer ||
      p.kind == WorkerKind::kUniformSpammer)
    return {};
  return QualityCurve(p.attention, p.amplitude);
}

}  // namespace

std::string WorkerKindName(WorkerKind kind) {
  switch (kind) {
    case WorkerKind::kExpert: return "expert";
    case WorkerKind::kNormal: return "normal";
    case WorkerKind::kSpammer: return "spammer";
    case WorkerKind::kRandomSpammer: return "random_spammer";
    case WorkerKind::kUniformSpammer: return "uniform_spammer";
  }
  return "normal";
}

WorkerKind ParseWorkerKind(const std::string &name) {
  for (WorkerKind k : {WorkerKind::kExpert, WorkerKind::kNormal,
                       WorkerKind::kSpammer, WorkerKind::kRandomSpammer,
                       WorkerKind::kUniformSpammer})
    if (WorkerKindName(k) == name) return k;
  throw ParseError("unknown worker kind '" + name + "'");
}

WorkerKind KindForAmplitude(double amplitude) {
  if (amplitude >= 0.9) return WorkerKind::kExpert;
  if (amplitude < 0.5) return WorkerKind::kSpammer;
  return WorkerKind::kNormal;
}

double TiedShape(double amplitude) {
  return 2.0 + 2.0 * std::clamp((amplitude - 0.6) / 0.3, 0.0, 1.0);
}

void SimSpec::Validate() const {
  if (num_tasks < 1 || num_classes < 2 || dim < 1)
    throw ValidationError("simulation needs num_tasks >= 1, num_classes >= 2 "
                          "and dim >= 1");
  if (workers.empty() && num_workers < 1)
    throw ValidationError("simulation needs at least one worker");
  if (!(answer_rate > 0.0 && answer_rate <= 1.0))
    throw ValidationError("answer_rate must lie in (0, 1]");
  if (!(separation >= 0.0)) throw ValidationError("separation must be >= 0");
  double total = mix.expert + mix.normal + mix.spammer + mix.random_spammer +
                 mix.uniform_spammer;
  for (double f : {mix.expert, mix.normal, mix.spammer, mix.random_spammer,
                   mix.uniform_spammer})
    if (f < 0.0) throw ValidationError("profile fractions must be >= 0");
  if (workers.empty() && !news_protocol && std::abs(total - 1.0) > 1e-9)
    throw ValidationError("profile fractions must sum to 1");
  for (const WorkerProfile &p : workers)
    if (!(p.amplitude > 0.0 && p.amplitude < 1.0))
      throw ValidationError("worker amplitude must lie in (0, 1)");
}

Simulation Simulate(const SimSpec &spec) {
  spec.Validate();
  const int n = spec.num_tasks, nc = spec.num_classes, d = spec.dim;
  Simulation sim;
  Dataset &data = sim.data;
  data.num_classes = nc;

  std::mt19937_64 task_rng = Stream(spec.seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd means(nc, d);
  for (int c = 0; c < nc; ++c) {
    for (int j = 0; j < d; ++j) means(c, j) = normal(task_rng);
    double norm = means.row(c).norm();
    if (norm > 0.0) means.row(c) *= spec.separation / norm;
  }
  sim.gold.labels.resize(n);
  data.features.resize(n, d);
  std::uniform_int_distribution<int> class_dist(1, nc);
  for (int i = 0; i < n; ++i) {
    int y = class_dist(task_rng);
    sim.gold.labels[i] = y;
    for (int j = 0; j < d; ++j) data.features(i, j) = means(y - 1, j) + normal(task_rng);
  }

  // Worker profiles.
  std::vector<WorkerProfile> &profiles = sim.profiles;
  if (!spec.workers.empty()) {
    profiles = spec.workers;
  } else if (spec.news_protocol) {
    std::vector<int> counts = Apportion({0.6, 0.31, 0.09}, spec.num_workers);
    std::mt19937_64 rng = Stream(spec.seed, 3);
    for (int band = 0; band < 3; ++band) {
      for (int k = 0; k < counts[band]; ++k) {
        WorkerProfile p;
        p.amplitude = band == 0   ? Uniform(rng, 0.6, 0.99)
                      : band == 1 ? Uniform(rng, 0.4, 0.6)
                                  : Uniform(rng, 0.2, 0.4);
        p.kind = KindForAmplitude(p.amplitude);
        profiles.push_back(p);
      }
    }
  } else {
    const WorkerKind kinds[] = {WorkerKind::kExpert, WorkerKind::kNormal,
                                WorkerKind::kSpammer, WorkerKind::kRandomSpammer,
                                WorkerKind::kUniformSpammer};
    std::vector<int> counts =
        Apportion({spec.mix.expert, spec.mix.normal, spec.mix.spammer,
                   spec.mix.random_spammer, spec.mix.uniform_spammer},
                  spec.num_workers);
    std::mt19937_64 rng = Stream(spec.seed, 3);
    for (int k = 0; k < 5; ++k) {
      for (int j = 0; j < counts[k]; ++j) {
        WorkerProfile p;
        p.kind = kinds[k];
        p.amplitude = DrawAmplitude(p.kind, nc, rng);
        if (p.kind == WorkerKind::kUniformSpammer) p.fixed_label = class_dist(rng);
        profiles.push_back(p);
      }
    }
  }

  const int nw = static_cast<int>(profiles.size());
  data.answers = Eigen::MatrixXi::Zero(n, nw);
  data.orders.assign(nw, std::nullopt);
  for (int w = 0; w < nw; ++w) {
    std::mt19937_64 rng = Stream(spec.seed, 1, w);
    WorkerProfile &p = profiles[w];
    std::vector<int> tasks;
    std::bernoulli_distribution take(spec.answer_rate);
    for (int i = 0; i < n; ++i)
      if (spec.answer_rate >= 1.0 || take(rng)) tasks.push_back(i);
    std::shuffle(tasks.begin(), tasks.end(), rng);
    const int nt = static_cast<int>(tasks.size());
    if (spec.workers.empty()) {
      p.attention.kind = spec.attention;
      p.attention.lambda = p.attention.mu = TiedShape(p.amplitude);
      p.attention.sigma = std::max(nt / 6.0, 0.5);
    }
    p.attention.num_tasks = nt;
    if (p.kind == WorkerKind::kUniformSpammer && p.fixed_label == 0)
      p.fixed_label = class_dist(rng);
    std::vector<double> curve = CurveForProfile(p);
    for (int r = 0; r < nt; ++r) {
      int i = tasks[r], y = sim.gold.labels[i];
      int a;
      if (p.kind == WorkerKind::kUniformSpammer) a = p.fixed_label;
      else if (p.kind == WorkerKind::kRandomSpammer) a = class_dist(rng);
      else a = Uniform(rng, 0.0, 1.0) < curve[r] ? y : WrongLabel(rng, y, nc);
      data.answers(i, w) = a;
    }
    data.orders[w] = std::move(tasks);
  }
  data.gold = sim.gold;
  return sim;
}

Dataset Reannotate(const Dataset &data, const FitResult *fit,
                   AttentionKind kind, std::uint64_t seed) {
  if (fit == nullptr) throw MissingFit("re-annotation needs a fitted model");
  if (!data.gold) throw ValidationError("re-annotation needs gold labels");
  if (static_cast<int>(fit->global_quality.size()) != data.num_workers())
    throw DimensionMismatch("fit and dataset have different worker counts");
  Dataset out = data;
  CompletionOrders orders = InferOrder(data);
  const int nc = data.num_classes;
  const bool fitted_shape = fit->params.kind == kind;
  for (int w = 0; w < data.num_workers(); ++w) {
    const std::vector<int> &order = orders.orders[w];
    AttentionModel model;
    model.kind = kind;
    model.num_tasks = static_cast<int>(order.size());
    double amp = fit->global_quality[w];
    if (fitted_shape) {
      model.lambda = fit->params.workers[w].lambda;
      model.mu = fit->params.workers[w].mu;
      model.sigma = fit->params.workers[w].sigma;
    } else {
      model.lambda = model.mu = TiedShape(amp);
      model.sigma = std::max(model.num_tasks / 6.0, 0.5);
    }
    std::vector<double> curve = QualityCurve(model, amp);
    std::mt19937_64 rng = Stream(seed, 2, w);
    for (size_t r = 0; r < order.size(); ++r) {
      int i = order[r], y = data.gold->labels[i];
      out.answers(i, w) =
          Uniform(rng, 0.0, 1.0) < curve[r] ? y : WrongLabel(rng, y, nc);
    }
  }
  return out;
}

Dataset InjectSpammers(const Dataset &data, int n_random, int n_uniform,
                       std::uint64_t seed) {
  if (n_random < 0 || n_uniform < 0)
    throw ValidationError("spammer counts must be >= 0");
  if (n_random + n_uniform == 0) return data;
  const int n = data.num_tasks(), nw = data.num_workers(), nc = data.num_classes;
  long total = (data.answers.array() != kNoAnswer).count();
  int per_worker = std::clamp(
      static_cast<int>(std::lround(double(total) / nw)), 1, n);
  Dataset out = data;
  out.answers.conservativeResize(n, nw + n_random + n_uniform);
  out.answers.rightCols(n_random + n_uniform).setZero();
  std::uniform_int_distribution<int> class_dist(1, nc);
  for (int k = 0; k < n_random + n_uniform; ++k) {
    std::mt19937_64 rng = Stream(seed, 4, k);
    std::vector<int> tasks(n);
    std::iota(tasks.begin(), tasks.end(), 0);
    std::shuffle(tasks.begin(), tasks.end(), rng);
    tasks.resize(per_worker);
    const bool uniform = k >= n_random;
    int fixed = class_dist(rng);
    for (int i : tasks) out.answers(i, nw + k) = uniform ? fixed : class_dist(rng);
    out.orders.push_back(tasks);
  }
  return out;
}

Dataset InjectNoise(const Dataset &data, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 0.5))
    throw ValidationError("noise ratio must lie in [0, 0.5]");
  Dataset out = data;
  if (ratio == 0.0) return out;
  for (int w = 0; w < data.num_workers(); ++w) {
    std::vector<int> tasks = data.AnsweredBy(w);
    int flips = static_cast<int>(std::ceil(ratio * tasks.size() - 1e-9));
    std::mt19937_64 rng = Stream(seed, 5, w);
    std::shuffle(tasks.begin(), tasks.end(), rng);
    for (int k = 0; k < flips; ++k) {
      int i = tasks[k];
      out.answers(i, w) = WrongLabel(rng, data.answers(i, w), data.num_classes);
    }
  }
  return out;
}

namespace {

json ProfileToJson(const WorkerProfile &p) {
  return json{{"kind", WorkerKindName(p.kind)},
              {"amplitude", p.amplitude},
              {"attention", AttentionKindName(p.attention.kind)},
              {"lambda", p.attention.lambda},
              {"mu", p.attention.mu},
              {"sigma", p.attention.sigma},
              {"fixed_label", p.fixed_label}};
}

WorkerProfile ProfileFromJson(const json &j) {
  WorkerProfile p;
  p.amplitude = j.at("amplitude").get<double>();
  p.kind = j.contains("kind") ? ParseWorkerKind(j["kind"].get<std::string>())
                              : KindForAmplitude(p.amplitude);
  p.attention.kind = ParseAttentionKind(j.value("attention", "uniform"));
  p.attention.lambda = j.value("lambda", TiedShape(p.amplitude));
  p.attention.mu = j.value("mu", TiedShape(p.amplitude));
  p.attention.sigma = j.value("sigma", 1.0);
  p.fixed_label = j.value("fixed_label", 0);
  return p;
}

}  // namespace

std::string ProfilesToJson(const std::vector<WorkerProfile> &profiles) {
  json j = json::array();
  for (size_t w = 0; w < profiles.size(); ++w) {
    json p = ProfileToJson(profiles[w]);
    p["worker_id"] = w;
    p["num_tasks"] = profiles[w].attention.num_tasks;
    j.push_back(p);
  }
  return j.dump(1) + "\n";
}

std::string SimSpecToJson(const SimSpec &spec) {
  json j;
  j["num_tasks"] = spec.num_tasks;
  j["num_workers"] = spec.num_workers;
  j["num_classes"] = spec.num_classes;
  j["dim"] = spec.dim;
  j["separation"] = spec.separation;
  j["answer_rate"] = spec.answer_rate;
  j["mix"] = json{{"expert", spec.mix.expert},
                  {"normal", spec.mix.normal},
                  {"spammer", spec.mix.spammer},
                  {"random_spammer", spec.mix.random_spammer},
                  {"uniform_spammer", spec.mix.uniform_spammer}};
  j["attention"] = AttentionKindName(spec.attention);
  j["news_protocol"] = spec.news_protocol;
  j["seed"] = spec.seed;
  json workers = json::array();
  for (const auto &p : spec.workers) workers.push_back(ProfileToJson(p));
  j["workers"] = workers;
  return j.dump(1);
}

SimSpec SimSpecFromJson(const std::string &text) {
  SimSpec spec;
  try {
    json j = json::parse(text);
    spec.num_tasks = j.value("num_tasks", spec.num_tasks);
    spec.num_workers = j.value("num_workers", spec.num_workers);
    spec.num_classes = j.value("num_classes", spec.num_classes);
    spec.dim = j.value("dim", spec.dim);
    spec.separation = j.value("separation", spec.separation);
    spec.answer_rate = j.value("answer_rate", spec.answer_rate);
    if (j.contains("mix")) {
      const json &m = j["mix"];
      spec.mix.expert = m.value("expert", 0.0);
      spec.mix.normal = m.value("normal", 0.0);
      spec.mix.spammer = m.value("spammer", 0.0);
      spec.mix.random_spammer = m.value("random_spammer", 0.0);
      spec.mix.uniform_spammer = m.value("uniform_spammer", 0.0);
    }
    if (j.contains("attention"))
      spec.attention = ParseAttentionKind(j["attention"].get<std::string>());
    spec.news_protocol = j.value("news_protocol", false);
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("workers"))
      for (const json &w : j["workers"]) spec.workers.push_back(ProfileFromJson(w));
  } catch (const json::exception &e) {
    throw ParseError(std::string("simulation spec: ") + e.what());
  }
  spec.Validate();
  return spec;
}

SimSpec LoadSimSpec(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return SimSpecFromJson(buf.str());
}

}  // namespace crowd
