// crowd/lbfgs.cc

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

#include "crowd/lbfgs.h"

#include <cmath>
#include <deque>

namespace crowd {

Eigen::VectorXd CentralDifferenceGradient(const Objective &f,
                                          const Eigen::VectorXd &x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (int j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    double up = f(xp);
    xp(j) = x(j) - h;
    double down = f(xp);
    xp(j) = x(j);
    g(j) = (up - down) / (2.0 * h);
  }
  return g;
}

LbfgsResult MaximizeLbfgs(const Objective &f, const Eigen::VectorXd &x0,
                          const LbfgsOptions &opt) {
  // Work on -f so the textbook minimization recursions apply unchanged.
  auto neg = [&](const Eigen::VectorXd &x) { return -f(x); };
  LbfgsResult res;
  res.x = x0;
  double fx = neg(x0);
  if (!std::isfinite(fx)) {
    res.value = -fx;
    res.stalled = true;
    return res;
  }
  Eigen::VectorXd g = CentralDifferenceGradient(neg, res.x, opt.fd_step);
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int it = 0; it < opt.max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < opt.grad_tol) break;
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    double gamma = 1.0;
    if (!s_hist.empty())
      gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    Eigen::VectorXd d = gamma * q;
    for (size_t k = 0; k < s_hist.size(); ++k) {
      double beta = rho_hist[k] * y_hist[k].dot(d);
      d += s_hist[k] * (alpha[k] - beta);
    }
    d = -d;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = 1.0;
    if (s_hist.empty()) step = std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd x_new;
    double f_new = fx;
    bool found = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = res.x + step * d;
      f_new = neg(x_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        found = true;
        break;
      }
      step *= 0.5;
    }
    if (!found) {
      res.stalled = true;
      break;
    }
    Eigen::VectorXd g_new = CentralDifferenceGradient(neg, x_new, opt.fd_step);
    Eigen::VectorXd s = x_new - res.x, y = g_new - g;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    double improvement = fx - f_new;
    res.x = x_new;
    fx = f_new;
    g = g_new;
    res.iterations = it + 1;
    if (improvement < opt.value_tol * (1.0 + std::abs(fx))) break;
  }
  res.value = -fx;
  return res;
}

}  // namespace crowd
