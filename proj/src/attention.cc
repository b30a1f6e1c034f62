// crowd/attention.cc

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

#include "crowd/attention.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crowd/errors.h"

namespace crowd {

AttentionKind ParseAttentionKind(const std::string &name) {
  if (name == "poisson") return AttentionKind::kPoisson;
  if (name == "gaussian") return AttentionKind::kGaussian;
  if (name == "uniform") return AttentionKind::kUniform;
  if (name == "none") return AttentionKind::kNone;
  throw ParseError("unknown attention kind '" + name + "'");
}

std::string AttentionKindName(AttentionKind kind) {
  switch (kind) {
    case AttentionKind::kPoisson: return "poisson";
    case AttentionKind::kGaussian: return "gaussian";
    case AttentionKind::kUniform: return "uniform";
    case AttentionKind::kNone: return "none";
  }
  return "none";
}

double AttentionModel::Center() const {
  if (kind == AttentionKind::kPoisson) return num_tasks / lambda;
  if (kind == AttentionKind::kGaussian) return num_tasks / mu;
  return 0.0;
}

double LogAttentionAt(const AttentionModel &model, int rank) {
  const double r = rank;
  switch (model.kind) {
    case AttentionKind::kPoisson: {
      double m = model.Center();
      return -0.5 * std::log(2.0 * std::numbers::pi * r) - m +
             r * (std::log(m) + 1.0 - std::log(r));
    }
    case AttentionKind::kGaussian: {
      double z = (r - model.Center()) / model.sigma;
      return -0.5 * z * z - std::log(model.sigma) -
             0.5 * std::log(2.0 * std::numbers::pi);
    }
    default:
      return 0.0;
  }
}

double AttentionAt(const AttentionModel &model, int rank) {
  return std::exp(LogAttentionAt(model, rank));
}

std::vector<double> AttentionCurve(const AttentionModel &model) {
  std::vector<double> t(model.num_tasks);
  for (int r = 1; r <= model.num_tasks; ++r) t[r - 1] = AttentionAt(model, r);
  return t;
}

bool AttentionSensitive(double amplitude) {
  return amplitude >= 0.5 && amplitude < 0.9;
}

std::vector<double> QualityCurve(const AttentionModel &model, double amplitude,
                                 double eps) {
  const int n = model.num_tasks;
  std::vector<double> q(n, std::clamp(amplitude, eps, 1.0 - eps));
  if (n < 2 || model.kind == AttentionKind::kUniform ||
      model.kind == AttentionKind::kNone || !AttentionSensitive(amplitude))
    return q;
  // Normalize in log space so that very peaked curves do not underflow.
  std::vector<double> logt(n);
  for (int r = 1; r <= n; ++r) logt[r - 1] = LogAttentionAt(model, r);
  double top = *std::max_element(logt.begin(), logt.end());
  std::vector<double> a(n);
  double abar = 0.0;
  for (int r = 0; r < n; ++r) {
    a[r] = std::exp(logt[r] - top);
    abar += a[r];
  }
  abar /= n;
  if (abar >= 1.0 - 1e-12) return q;
  double amp = q[0];
  double swing = std::min((1.0 - eps - amp) / (1.0 - abar), (amp - eps) / abar);
  swing = std::max(swing, 0.0);
  for (int r = 0; r < n; ++r)
    q[r] = std::clamp(amp + swing * (a[r] - abar), eps, 1.0 - eps);
  return q;
}

double QualityFromAttention(const AttentionModel &model, double amplitude,
                            int rank, double eps) {
  if (rank < 1 || rank > model.num_tasks)
    throw ValidationError("rank " + std::to_string(rank) + " is outside 1.." +
                          std::to_string(model.num_tasks));
  return QualityCurve(model, amplitude, eps)[rank - 1];
}

double StirlingError(double m, int rank) {
  AttentionModel model;
  model.kind = AttentionKind::kPoisson;
  model.num_tasks = 1;
  model.lambda = 1.0 / m;
  double log_exact = rank * std::log(m) - m - std::lgamma(rank + 1.0);
  return std::abs(std::expm1(LogAttentionAt(model, rank) - log_exact));
}

}  // namespace crowd
