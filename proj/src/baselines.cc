// crowd/baselines.cc

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

#include "crowd/baselines.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace crowd {

namespace {

Eigen::MatrixXd VoteCounts(const Dataset &data) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(data.num_tasks(), data.num_classes);
  for (int i = 0; i < data.num_tasks(); ++i)
    for (int w = 0; w < data.num_workers(); ++w)
      if (data.answers(i, w) != kNoAnswer) counts(i, data.answers(i, w) - 1) += 1.0;
  return counts;
}

Eigen::MatrixXd NormalizeRows(Eigen::MatrixXd m) {
  for (int i = 0; i < m.rows(); ++i) {
    double s = m.row(i).sum();
    if (s > 0.0) m.row(i) /= s;
    else m.row(i).setConstant(1.0 / m.cols());
  }
  return m;
}

// Row-wise softmax of log values, in place; returns sum of log normalizers.
double SoftmaxRows(Eigen::MatrixXd *logp) {
  double total = 0.0;
  for (int i = 0; i < logp->rows(); ++i) {
    double top = logp->row(i).maxCoeff();
    logp->row(i) = (logp->row(i).array() - top).exp().matrix();
    double s = logp->row(i).sum();
    logp->row(i) /= s;
    total += top + std::log(s);
  }
  return total;
}

double LogSigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

AggregationResult MajorityVote(const Dataset &data) {
  Diagnostics diag;
  diag.iterations = 1;
  return MakeResult(NormalizeRows(VoteCounts(data)), diag);
}

DawidSkeneResult DawidSkene(const Dataset &data, int max_iters, double tol,
                            double smoothing) {
  const int n = data.num_tasks(), nw = data.num_workers(), nc = data.num_classes;
  Eigen::MatrixXd t = NormalizeRows(VoteCounts(data));
  DawidSkeneResult out;
  out.confusion.assign(nw, Eigen::MatrixXd::Zero(nc, nc));
  Diagnostics diag;
  diag.converged = false;
  for (int it = 1; it <= max_iters; ++it) {
    diag.iterations = it;
    out.class_prior = (t.colwise().sum().transpose().array() + smoothing) /
                      (n + nc * smoothing);
    for (int w = 0; w < nw; ++w) {
      Eigen::MatrixXd &pi = out.confusion[w];
      pi.setConstant(smoothing);
      for (int i = 0; i < n; ++i)
        if (data.answers(i, w) != kNoAnswer)
          pi.col(data.answers(i, w) - 1) += t.row(i).transpose();
      for (int c = 0; c < nc; ++c) {
        double s = pi.row(c).sum();
        if (s > 0.0) pi.row(c) /= s;
        else pi.row(c).setConstant(1.0 / nc);
      }
    }
    Eigen::MatrixXd logt(n, nc);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < nc; ++c) {
        double v = std::log(out.class_prior(c));
        for (int w = 0; w < nw; ++w)
          if (data.answers(i, w) != kNoAnswer)
            v += std::log(out.confusion[w](c, data.answers(i, w) - 1));
        logt(i, c) = v;
      }
    }
    diag.objective = SoftmaxRows(&logt);
    double change = (logt - t).cwiseAbs().maxCoeff();
    t = std::move(logt);
    if (change < tol) {
      diag.converged = true;
      break;
    }
  }
  out.result = MakeResult(std::move(t), diag);
  return out;
}

namespace {

struct BinaryGlad {
  Eigen::VectorXd post;     // P(Z_i = 1)
  Eigen::VectorXd ability;  // alpha_w
  Eigen::VectorXd log_difficulty;  // b_i, difficulty beta_i = exp(b_i)
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
};

// Whitehill-style binary model: P(label correct) = sigmoid(alpha_w beta_i),
// priors alpha ~ N(1, 1), log beta ~ N(0, 1).
BinaryGlad FitBinaryGlad(const Eigen::MatrixXi &labels,  // -1 none, 0/1
                         double prior, int max_iters, double tol) {
  const int n = static_cast<int>(labels.rows()), nw = static_cast<int>(labels.cols());
  BinaryGlad g;
  g.ability = Eigen::VectorXd::Ones(nw);
  g.log_difficulty = Eigen::VectorXd::Zero(n);
  g.post = Eigen::VectorXd::Constant(n, prior);

  auto e_step = [&]() {
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      double l1 = std::log(prior), l0 = std::log1p(-prior);
      double beta = std::exp(g.log_difficulty(i));
      for (int w = 0; w < nw; ++w) {
        int l = labels(i, w);
        if (l < 0) continue;
        double x = g.ability(w) * beta;
        double right = LogSigmoid(x), wrong = LogSigmoid(-x);
        l1 += l == 1 ? right : wrong;
        l0 += l == 0 ? right : wrong;
      }
      double top = std::max(l1, l0);
      double z = top + std::log(std::exp(l1 - top) + std::exp(l0 - top));
      g.post(i) = std::exp(l1 - z);
      ll += z;
    }
    return ll;
  };

  auto q_value = [&](const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    double q = -0.5 * (a.array() - 1.0).square().sum() - 0.5 * b.squaredNorm();
    for (int i = 0; i < n; ++i) {
      double beta = std::exp(b(i));
      for (int w = 0; w < nw; ++w) {
        int l = labels(i, w);
        if (l < 0) continue;
        double pc = l == 1 ? g.post(i) : 1.0 - g.post(i);
        double x = a(w) * beta;
        q += pc * LogSigmoid(x) + (1.0 - pc) * LogSigmoid(-x);
      }
    }
    return q;
  };

  g.objective = e_step();
  for (int it = 1; it <= max_iters; ++it) {
    g.iterations = it;
    // Gradient ascent on the expected complete log-likelihood.
    for (int step = 0; step < 10; ++step) {
      Eigen::VectorXd ga = -(g.ability.array() - 1.0).matrix();
      Eigen::VectorXd gb = -g.log_difficulty;
      for (int i = 0; i < n; ++i) {
        double beta = std::exp(g.log_difficulty(i));
        for (int w = 0; w < nw; ++w) {
          int l = labels(i, w);
          if (l < 0) continue;
          double pc = l == 1 ? g.post(i) : 1.0 - g.post(i);
          double r = pc - Sigmoid(g.ability(w) * beta);
          ga(w) += r * beta;
          gb(i) += r * g.ability(w) * beta;
        }
      }
      double q0 = q_value(g.ability, g.log_difficulty);
      double lr = 0.1;
      bool moved = false;
      for (int ls = 0; ls < 20; ++ls, lr *= 0.5) {
        Eigen::VectorXd a = g.ability + lr * ga, b = g.log_difficulty + lr * gb;
        if (q_value(a, b) > q0) {
          g.ability = a;
          g.log_difficulty = b;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    Eigen::VectorXd before = g.post;
    g.objective = e_step();
    if ((g.post - before).cwiseAbs().maxCoeff() < tol) {
      g.converged = true;
      break;
    }
  }
  return g;
}

}  // namespace

GladResult Glad(const Dataset &data, int max_iters, double tol) {
  const int n = data.num_tasks(), nw = data.num_workers(), nc = data.num_classes;
  GladResult out;
  Eigen::MatrixXd probs(n, nc);
  out.params.ability = Eigen::VectorXd::Zero(nw);
  out.params.difficulty = Eigen::VectorXd::Zero(n);
  Diagnostics diag;
  for (int c = 1; c <= nc; ++c) {
    Eigen::MatrixXi labels(n, nw);
    for (int i = 0; i < n; ++i)
      for (int w = 0; w < nw; ++w) {
        int a = data.answers(i, w);
        labels(i, w) = a == kNoAnswer ? -1 : (a == c ? 1 : 0);
      }
    BinaryGlad g = FitBinaryGlad(labels, 1.0 / nc, max_iters, tol);
    probs.col(c - 1) = g.post;
    out.params.ability += g.ability / nc;
    out.params.difficulty += g.log_difficulty.array().exp().matrix() / nc;
    diag.iterations = std::max(diag.iterations, g.iterations);
    diag.converged = diag.converged && g.converged;
    diag.objective += g.objective;
  }
  out.result = MakeResult(NormalizeRows(probs), diag);
  return out;
}

AggregationResult Awmv(const Dataset &data) {
  if (data.num_classes != 2)
    throw NotApplicable("AWMV handles binary labels only");
  Eigen::MatrixXd counts = VoteCounts(data);
  double total = counts.sum();
  double pos_rate = total > 0.0 ? counts.col(1).sum() / total : 0.5;
  Eigen::MatrixXd scores(counts.rows(), 2);
  scores.col(0) = counts.col(0) * pos_rate;
  scores.col(1) = counts.col(1) * (1.0 - pos_rate);
  Diagnostics diag;
  diag.iterations = 1;
  diag.objective = pos_rate;
  return MakeResult(NormalizeRows(scores), diag);
}

AggregationResult Gtic(const Dataset &data, const GticOptions &options) {
  const int n = data.num_tasks(), k = data.num_classes;
  Eigen::MatrixXd x = NormalizeRows(VoteCounts(data));
  AggregationResult mv = MajorityVote(data);

  std::vector<int> best_assign;
  double best_inertia = std::numeric_limits<double>::infinity();
  int best_iters = 0;
  for (int restart = 0; restart < options.restarts; ++restart) {
    std::mt19937_64 rng(options.seed * 1000003ULL + restart);
    // k-means++ seeding.
    Eigen::MatrixXd centers(k, x.cols());
    std::uniform_int_distribution<int> pick(0, n - 1);
    centers.row(0) = x.row(pick(rng));
    Eigen::VectorXd d2(n);
    for (int c = 1; c < k; ++c) {
      for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < c; ++j)
          best = std::min(best, (x.row(i) - centers.row(j)).squaredNorm());
        d2(i) = best;
      }
      double total = d2.sum();
      int chosen = pick(rng);
      if (total > 0.0) {
        double u = std::uniform_real_distribution<double>(0.0, total)(rng);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          acc += d2(i);
          if (acc >= u) {
            chosen = i;
            break;
          }
        }
      }
      centers.row(c) = x.row(chosen);
    }
    std::vector<int> assign(n, -1);
    double inertia = 0.0;
    int iters = 0;
    for (int it = 1; it <= options.iterations; ++it) {
      iters = it;
      bool changed = false;
      inertia = 0.0;
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          double d = (x.row(i) - centers.row(c)).squaredNorm();
          if (d < best) {
            best = d;
            arg = c;
          }
        }
        inertia += best;
        if (assign[i] != arg) changed = true;
        assign[i] = arg;
      }
      if (!changed) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
      std::vector<int> sizes(k, 0);
      for (int i = 0; i < n; ++i) {
        sums.row(assign[i]) += x.row(i);
        ++sizes[assign[i]];
      }
      for (int c = 0; c < k; ++c)
        if (sizes[c] > 0) centers.row(c) = sums.row(c) / sizes[c];
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_assign = assign;
      best_iters = iters;
    }
  }

  Eigen::MatrixXd cluster_votes = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < n; ++i) cluster_votes(best_assign[i], mv.labels[i] - 1) += 1.0;
  cluster_votes = NormalizeRows(cluster_votes);
  Eigen::MatrixXd probs(n, k);
  for (int i = 0; i < n; ++i) probs.row(i) = cluster_votes.row(best_assign[i]);
  Diagnostics diag;
  diag.iterations = best_iters;
  diag.objective = best_inertia;
  return MakeResult(std::move(probs), diag);
}

}  // namespace crowd
