// crowd/attention.h

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

#ifndef CROWD_ATTENTION_H_
#define CROWD_ATTENTION_H_

#include <string>
#include <vector>

namespace crowd {

/// kNone behaves like kUniform for quality purposes but also drops the
/// attention factor from the evidence.
enum class AttentionKind { kPoisson, kGaussian, kUniform, kNone };

AttentionKind ParseAttentionKind(const std::string &name);
std::string AttentionKindName(AttentionKind kind);

struct AttentionModel {
  AttentionKind kind = AttentionKind::kUniform;
  double lambda = 2.0;  // Poisson: mode near num_tasks / lambda
  double mu = 2.0;      // Gaussian: mean num_tasks / mu
  double sigma = 1.0;   // Gaussian
  int num_tasks = 1;    // N_w

  /// Rank at which the curve is centered (num_tasks/lambda or num_tasks/mu).
  double Center() const;
};

inline constexpr double kQualityEps = 0.01;

/// Attention at a 1-based completion rank.  Poisson uses the Stirling form
/// (2 pi r)^(-1/2) e^(-m) (m e / r)^r evaluated in log space.
double AttentionAt(const AttentionModel &model, int rank);
double LogAttentionAt(const AttentionModel &model, int rank);

/// Attention over ranks 1..num_tasks.
std::vector<double> AttentionCurve(const AttentionModel &model);

/// True for workers whose quality follows their attention.  Experts
/// (amplitude >= 0.9) and spammers (amplitude < 0.5) keep a constant
/// quality whatever the attention curve.
bool AttentionSensitive(double amplitude);

/// Per-rank quality for ranks 1..num_tasks.
///
/// With a_r = t_r / max t and abar its mean over ranks, the curve is
///   q_r = amplitude + s (a_r - abar)
/// where s is the largest swing keeping every q_r inside [eps, 1 - eps].
/// The curve is affine in t, its mean is exactly the amplitude, and a
/// constant attention gives a constant curve.  Insensitive amplitudes
/// (see AttentionSensitive) also give a constant curve.
std::vector<double> QualityCurve(const AttentionModel &model, double amplitude,
                                 double eps = kQualityEps);

double QualityFromAttention(const AttentionModel &model, double amplitude,
                            int rank, double eps = kQualityEps);

/// |Stirling - exact| / exact for the Poisson pmf with mean m at rank.
double StirlingError(double m, int rank);

}  // namespace crowd

#endif  // CROWD_ATTENTION_H_
