// crowd/simulator.h

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

#ifndef CROWD_SIMULATOR_H_
#define CROWD_SIMULATOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crowd/attention.h"
#include "crowd/dataset.h"
#include "crowd/gem.h"

namespace crowd {

enum class WorkerKind { kExpert, kNormal, kSpammer, kRandomSpammer, kUniformSpammer };

std::string WorkerKindName(WorkerKind kind);
WorkerKind ParseWorkerKind(const std::string &name);

/// Expert at >= 0.9, spammer below 0.5, normal otherwise.
WorkerKind KindForAmplitude(double amplitude);

struct WorkerProfile {
  WorkerKind kind = WorkerKind::kNormal;
  double amplitude = 0.7;
  AttentionModel attention;  // num_tasks is filled in by the simulator
  int fixed_label = 0;       // uniform spammers only
};

/// Fractions of each worker kind.  They must sum to one.
struct ProfileMix {
  double expert = 0.2;
  double normal = 0.5;
  double spammer = 0.1;
  double random_spammer = 0.1;
  double uniform_spammer = 0.1;
};

struct SimSpec {
  int num_tasks = 200;
  int num_workers = 20;
  int num_classes = 4;
  int dim = 50;
  double separation = 3.0;   // norm of each class mean
  double answer_rate = 0.3;  // probability a worker answers a given task
  ProfileMix mix;
  AttentionKind attention = AttentionKind::kPoisson;
  // Draw qualities as 60% >= 0.6, 9% < 0.4, the rest in between.
  bool news_protocol = false;
  std::uint64_t seed = 0;
  // Explicit workers replace the mix when non-empty.
  std::vector<WorkerProfile> workers;

  void Validate() const;
};

struct Simulation {
  Dataset data;  // data.gold is set
  GoldLabels gold;
  std::vector<WorkerProfile> profiles;
};

/// Lambda (or mu) the simulator gives a worker of this amplitude:
/// 2 at 0.6 rising linearly to 4 at 0.9.
double TiedShape(double amplitude);

Simulation Simulate(const SimSpec &spec);

/// Redraws every answer from the gold labels with per-rank qualities whose
/// mean is the fitted global quality.  The answered cells do not change.
/// Throws MissingFit when fit is null and ValidationError without gold.
Dataset Reannotate(const Dataset &data, const FitResult *fit,
                   AttentionKind kind, std::uint64_t seed);

/// Appends random spammers (uniform labels) and uniform spammers (one fixed
/// label), each answering the average number of tasks per worker.
Dataset InjectSpammers(const Dataset &data, int n_random, int n_uniform,
                       std::uint64_t seed);

/// Flips ceil(ratio * N_w) answers of every worker to a different label.
Dataset InjectNoise(const Dataset &data, double ratio, std::uint64_t seed);

/// True profiles as a JSON array, one object per worker.
std::string ProfilesToJson(const std::vector<WorkerProfile> &profiles);

SimSpec LoadSimSpec(const std::string &path);
std::string SimSpecToJson(const SimSpec &spec);
SimSpec SimSpecFromJson(const std::string &text);

}  // namespace crowd

#endif  // CROWD_SIMULATOR_H_
