// crowd/quadrature.h

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

#ifndef CROWD_QUADRATURE_H_
#define CROWD_QUADRATURE_H_

#include <vector>

namespace crowd {

/// Gauss-Hermite rule for the standard normal weight: for x ~ N(0, 1),
/// E[f(x)] is approximated by sum_k weights[k] * f(nodes[k]).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rule with the given number of points, computed once per size and cached.
const GaussHermite &GaussHermiteRule(int points);

double NormPdf(double x);
/// Standard normal cdf through erfc, accurate far into the lower tail.
double NormCdf(double x);

}  // namespace crowd

#endif  // CROWD_QUADRATURE_H_
