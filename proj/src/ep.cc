// crowd/ep.cc

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

#include "crowd/ep.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace crowd {

Eigen::RowVectorXd TaskLogWeights(
    const Eigen::Ref<const Eigen::RowVectorXi> &answers,
    const Eigen::Ref<const Eigen::RowVectorXd> &qualities, int num_classes,
    WrongLabelRule rule) {
  Eigen::RowVectorXd lw = Eigen::RowVectorXd::Zero(num_classes);
  const double spread =
      rule == WrongLabelRule::kSymmetric ? std::log(num_classes - 1.0) : 0.0;
  for (int w = 0; w < answers.size(); ++w) {
    int a = answers(w);
    if (a == kNoAnswer) continue;
    double q = qualities(w);
    double wrong = std::log1p(-q) - spread;
    lw.array() += wrong;
    lw(a - 1) += std::log(q) - wrong;
  }
  return lw;
}

Eigen::MatrixXd LogWeights(const Dataset &data,
                           const Eigen::MatrixXd &qualities,
                           WrongLabelRule rule) {
  if (qualities.rows() != data.num_tasks() ||
      qualities.cols() != data.num_workers())
    throw DimensionMismatch("qualities must be N x W");
  Eigen::MatrixXd lw(data.num_tasks(), data.num_classes);
  for (int i = 0; i < data.num_tasks(); ++i)
    lw.row(i) = TaskLogWeights(data.answers.row(i), qualities.row(i),
                               data.num_classes, rule);
  return lw;
}

SiteFactors SiteFactors::Zero(int num_tasks, int num_classes) {
  SiteFactors s;
  s.tau = Eigen::MatrixXd::Zero(num_tasks, num_classes);
  s.nu = Eigen::MatrixXd::Zero(num_tasks, num_classes);
  s.a = Eigen::VectorXd::Zero(num_tasks);
  s.b = Eigen::VectorXd::Zero(num_tasks);
  return s;
}

Cavity ComputeCavity(const Eigen::Ref<const Eigen::VectorXd> &mean,
                     const Eigen::Ref<const Eigen::VectorXd> &var,
                     double alpha, double beta, const TaskSite &site) {
  Cavity cav;
  const int c = static_cast<int>(mean.size());
  cav.mean.resize(c);
  cav.var.resize(c);
  for (int k = 0; k < c; ++k) {
    double prec = 1.0 / var(k) - site.tau(k);
    if (!(prec > 0.0) || !std::isfinite(prec))
      throw NegativeCavityVariance("cavity precision " + std::to_string(prec) +
                                   " for class " + std::to_string(k + 1));
    cav.var(k) = 1.0 / prec;
    cav.mean(k) = cav.var(k) * (mean(k) / var(k) - site.nu(k));
  }
  cav.alpha = alpha - site.a;
  cav.beta = beta - site.b;
  if (!(cav.alpha > 0.0) || !(cav.beta > 0.0))
    throw NegativeCavityVariance("cavity Beta pseudo-counts are not positive");
  return cav;
}

namespace {

// Values of Phi(u_c) and phi(u_c) for every class at one quadrature node,
// where u_c = (s - m_c) / sd_c.
struct NodeTerms {
  Eigen::VectorXd cdf, pdf, u;
};

void FillNode(double s, const Eigen::VectorXd &mean, const Eigen::VectorXd &sd,
              int skip, NodeTerms *t) {
  for (int c = 0; c < mean.size(); ++c) {
    if (c == skip) {
      t->cdf(c) = 1.0;
      t->pdf(c) = 0.0;
      t->u(c) = 0.0;
      continue;
    }
    double u = (s - mean(c)) / sd(c);
    t->u(c) = u;
    t->cdf(c) = NormCdf(u);
    t->pdf(c) = NormPdf(u);
  }
}

double ProductExcept(const Eigen::VectorXd &v, int skip) {
  double p = 1.0;
  for (int c = 0; c < v.size(); ++c)
    if (c != skip) p *= v(c);
  return p;
}

}  // namespace

Eigen::VectorXd WinProbabilities(const Eigen::Ref<const Eigen::VectorXd> &mean,
                                 const Eigen::Ref<const Eigen::VectorXd> &var,
                                 const GaussHermite &rule) {
  const int nc = static_cast<int>(mean.size());
  Eigen::VectorXd m = mean, sd = var.array().sqrt();
  Eigen::VectorXd win = Eigen::VectorXd::Zero(nc);
  NodeTerms t{Eigen::VectorXd(nc), Eigen::VectorXd(nc), Eigen::VectorXd(nc)};
  for (int y = 0; y < nc; ++y) {
    for (size_t k = 0; k < rule.nodes.size(); ++k) {
      FillNode(m(y) + sd(y) * rule.nodes[k], m, sd, y, &t);
      win(y) += rule.weights[k] * t.cdf.prod();
    }
  }
  return win;
}

MomentMatch MomentMatchTask(const Eigen::Ref<const Eigen::VectorXd> &log_w,
                            const Cavity &cavity, const GaussHermite &rule) {
  const int nc = static_cast<int>(log_w.size());
  const Eigen::VectorXd &m = cavity.mean, &v = cavity.var;
  Eigen::VectorXd sd = v.array().sqrt();
  double top = log_w.maxCoeff();
  Eigen::VectorXd w = (log_w.array() - top).exp();
  double wsum = w.sum();
  w /= wsum;
  const double theta = cavity.ThetaBar();

  // dz_dm(y, c) = d P(y wins) / d m_c, likewise dz_dv.
  Eigen::VectorXd zy = Eigen::VectorXd::Zero(nc);
  Eigen::MatrixXd dz_dm = Eigen::MatrixXd::Zero(nc, nc);
  Eigen::MatrixXd dz_dv = Eigen::MatrixXd::Zero(nc, nc);
  NodeTerms t{Eigen::VectorXd(nc), Eigen::VectorXd(nc), Eigen::VectorXd(nc)};
  for (int y = 0; y < nc; ++y) {
    if (w(y) == 0.0) continue;
    for (size_t k = 0; k < rule.nodes.size(); ++k) {
      const double x = rule.nodes[k], wk = rule.weights[k];
      FillNode(m(y) + sd(y) * x, m, sd, y, &t);
      double all = t.cdf.prod();
      zy(y) += wk * all;
      dz_dv(y, y) += wk * (x * x - 1.0) / (2.0 * v(y)) * all;
      for (int c = 0; c < nc; ++c) {
        if (c == y) continue;
        double others = ProductExcept(t.cdf, c);
        dz_dm(y, c) -= wk * t.pdf(c) / sd(c) * others;
        dz_dv(y, c) -= wk * t.pdf(c) * t.u(c) / (2.0 * v(c)) * others;
      }
    }
    dz_dm(y, y) = -(dz_dm.row(y).sum());
  }

  MomentMatch mm;
  double z = theta / nc + (1.0 - theta) * w.dot(zy);
  mm.log_z = top + std::log(wsum) + std::log(z);
  Eigen::VectorXd g = (1.0 - theta) * (dz_dm.transpose() * w) / z;
  Eigen::VectorXd h = (1.0 - theta) * (dz_dv.transpose() * w) / z;
  mm.mean = m.array() + v.array() * g.array();
  mm.var = v.array() - v.array().square() * (g.array().square() - 2.0 * h.array());
  mm.outlier_resp = theta / nc / z;
  return mm;
}

TaskSite SiteFromMoments(const MomentMatch &mm, const Cavity &cavity) {
  const int nc = static_cast<int>(mm.mean.size());
  TaskSite site;
  site.tau.resize(nc);
  site.nu.resize(nc);
  for (int c = 0; c < nc; ++c) {
    double var = std::max(mm.var(c), 1e-10 * cavity.var(c));
    site.tau(c) = 1.0 / var - 1.0 / cavity.var(c);
    site.nu(c) = mm.mean(c) / var - cavity.mean(c) / cavity.var(c);
  }
  site.a = mm.outlier_resp;
  site.b = 1.0 - mm.outlier_resp;
  return site;
}

TaskSite DampedUpdate(const TaskSite &old_site, const TaskSite &new_site,
                      double eps) {
  TaskSite s;
  s.tau = eps * new_site.tau + (1.0 - eps) * old_site.tau;
  s.nu = eps * new_site.nu + (1.0 - eps) * old_site.nu;
  s.a = eps * new_site.a + (1.0 - eps) * old_site.a;
  s.b = eps * new_site.b + (1.0 - eps) * old_site.b;
  return s;
}

namespace {

// Posterior covariance and mean of one class's latent vector given its
// sites, by the usual B = I + S^1/2 K S^1/2 factorization.
struct ClassPosterior {
  Eigen::MatrixXd sigma;
  Eigen::VectorXd mu;
  double half_logdet_b = 0.0;
};

void Recompute(const Eigen::MatrixXd &k, const Eigen::VectorXd &tau,
               const Eigen::VectorXd &nu, ClassPosterior *cp) {
  const int n = static_cast<int>(k.rows());
  Eigen::VectorXd sw = tau.array().sqrt();
  Eigen::MatrixXd b = sw.asDiagonal() * k * sw.asDiagonal();
  b.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success)
    throw CholeskyFailure("EP posterior factorization failed");
  Eigen::MatrixXd v = llt.matrixL().solve(sw.asDiagonal() * k);
  cp->sigma = k - v.transpose() * v;
  cp->sigma = 0.5 * (cp->sigma + cp->sigma.transpose()).eval();
  cp->mu = cp->sigma * nu;
  cp->half_logdet_b = 0.0;
  for (int i = 0; i < n; ++i)
    cp->half_logdet_b += std::log(llt.matrixLLT()(i, i));
}

TaskSite SiteOf(const SiteFactors &s, int i) {
  TaskSite t;
  t.tau = s.tau.row(i).transpose();
  t.nu = s.nu.row(i).transpose();
  t.a = s.a(i);
  t.b = s.b(i);
  return t;
}

}  // namespace

Posterior RunEp(const KernelMatrix &gram, const Eigen::MatrixXd &log_weights,
                double alpha, double beta, const EpConfig &config,
                const SiteFactors *warm, double evidence_offset) {
  const int n = gram.size(), nc = static_cast<int>(log_weights.cols());
  if (log_weights.rows() != n)
    throw DimensionMismatch("log weights must have one row per task");
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw ValidationError("alpha and beta must be positive");
  const GaussHermite &rule = GaussHermiteRule(config.quad_points);
  const Eigen::MatrixXd &k = gram.values;

  Posterior post;
  post.sites = warm ? *warm : SiteFactors::Zero(n, nc);
  std::vector<bool> active(n);
  for (int i = 0; i < n; ++i)
    active[i] = log_weights.row(i).maxCoeff() - log_weights.row(i).minCoeff() >
                1e-12;
  for (int i = 0; i < n; ++i) {
    if (active[i]) continue;
    post.sites.tau.row(i).setZero();
    post.sites.nu.row(i).setZero();
    post.sites.a(i) = post.sites.b(i) = 0.0;
  }

  std::vector<ClassPosterior> cls(nc);
  for (int c = 0; c < nc; ++c)
    Recompute(k, post.sites.tau.col(c), post.sites.nu.col(c), &cls[c]);
  double alpha_post = alpha + post.sites.a.sum();
  double beta_post = beta + post.sites.b.sum();

  std::vector<double> damping(n, config.damping);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  post.converged = false;
  Eigen::VectorXd m(nc), v(nc);
  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    post.sweeps = sweep;
    if (config.random_order) std::shuffle(order.begin(), order.end(), rng);
    double max_change = 0.0;
    for (int i : order) {
      if (!active[i]) continue;
      for (int c = 0; c < nc; ++c) {
        m(c) = cls[c].mu(i);
        v(c) = cls[c].sigma(i, i);
      }
      TaskSite old_site = SiteOf(post.sites, i);
      Cavity cav;
      try {
        cav = ComputeCavity(m, v, alpha_post, beta_post, old_site);
      } catch (const NegativeCavityVariance &) {
        damping[i] = std::max(damping[i] * 0.5, config.min_damping);
        max_change = std::max(max_change, config.tol * 2.0);
        continue;
      }
      MomentMatch mm = MomentMatchTask(log_weights.row(i).transpose(), cav, rule);
      if (!std::isfinite(mm.log_z) || !mm.mean.allFinite() ||
          !mm.var.allFinite())
        continue;
      TaskSite fresh = SiteFromMoments(mm, cav);
      double eps = damping[i];
      TaskSite upd = DampedUpdate(old_site, fresh, eps);
      while (upd.tau.minCoeff() < 0.0 && eps * 0.5 >= config.min_damping) {
        eps *= 0.5;
        upd = DampedUpdate(old_site, fresh, eps);
      }
      upd.tau = upd.tau.cwiseMax(0.0);

      max_change = std::max(
          {max_change, (upd.tau - old_site.tau).cwiseAbs().maxCoeff(),
           (upd.nu - old_site.nu).cwiseAbs().maxCoeff(),
           std::abs(upd.a - old_site.a), std::abs(upd.b - old_site.b)});
      for (int c = 0; c < nc; ++c) {
        double dtau = upd.tau(c) - old_site.tau(c);
        double dnu = upd.nu(c) - old_site.nu(c);
        ClassPosterior &cp = cls[c];
        Eigen::VectorXd s = cp.sigma.col(i);
        double kk = dtau / (1.0 + dtau * s(i));
        cp.mu += (dnu - kk * (cp.mu(i) + dnu * s(i))) * s;
        if (dtau != 0.0) cp.sigma.noalias() -= kk * s * s.transpose();
        post.sites.tau(i, c) = upd.tau(c);
        post.sites.nu(i, c) = upd.nu(c);
      }
      alpha_post += upd.a - old_site.a;
      beta_post += upd.b - old_site.b;
      post.sites.a(i) = upd.a;
      post.sites.b(i) = upd.b;
    }
    for (int c = 0; c < nc; ++c)
      Recompute(k, post.sites.tau.col(c), post.sites.nu.col(c), &cls[c]);
    if (max_change < config.tol) {
      post.converged = true;
      break;
    }
  }
  if (config.max_sweeps < 1) post.converged = true;

  post.alpha = alpha + post.sites.a.sum();
  post.beta = beta + post.sites.b.sum();
  post.mean.resize(n, nc);
  post.var.resize(n, nc);
  for (int c = 0; c < nc; ++c) {
    post.mean.col(c) = cls[c].mu;
    post.var.col(c) = cls[c].sigma.diagonal();
  }

  // Cavities at the final marginals, then the evidence.
  post.cavity_mean.resize(n, nc);
  post.cavity_var.resize(n, nc);
  post.cavity_theta.resize(n);
  Eigen::MatrixXd cav_prec(n, nc), cav_shift(n, nc);
  double log_m = evidence_offset;
  for (int i = 0; i < n; ++i) {
    TaskSite site = SiteOf(post.sites, i);
    Cavity cav;
    try {
      cav = ComputeCavity(post.mean.row(i).transpose(),
                          post.var.row(i).transpose(), post.alpha, post.beta,
                          site);
    } catch (const NegativeCavityVariance &) {
      // Drop the offending site from the evidence; the marginal stands in
      // for its cavity.
      site = TaskSite{Eigen::VectorXd::Zero(nc), Eigen::VectorXd::Zero(nc),
                      0.0, 0.0};
      cav = ComputeCavity(post.mean.row(i).transpose(),
                          post.var.row(i).transpose(), post.alpha, post.beta,
                          site);
      post.converged = false;
    }
    post.cavity_mean.row(i) = cav.mean.transpose();
    post.cavity_var.row(i) = cav.var.transpose();
    post.cavity_theta(i) = cav.ThetaBar();
    cav_prec.row(i) = cav.var.cwiseInverse().transpose();
    cav_shift.row(i) = cav.mean.cwiseQuotient(cav.var).transpose();
    if (active[i])
      log_m += MomentMatchTask(log_weights.row(i).transpose(), cav, rule).log_z;
    else
      log_m += log_weights(i, 0);
  }
  for (int c = 0; c < nc; ++c) {
    const Eigen::VectorXd &tt = post.sites.tau.col(c), &tn = post.sites.nu.col(c);
    Eigen::VectorXd tp = cav_prec.col(c), np = cav_shift.col(c);
    log_m += -cls[c].half_logdet_b + 0.5 * tn.dot(cls[c].sigma * tn);
    Eigen::ArrayXd denom = tt.array() + tp.array();
    log_m += 0.5 * (np.array() *
                    (tt.array() / tp.array() * np.array() - 2.0 * tn.array()) /
                    denom).sum();
    log_m -= 0.5 * (tn.array().square() / denom).sum();
    log_m += 0.5 * (tt.array() / tp.array()).log1p().sum();
  }
  post.log_evidence = log_m;
  return post;
}

Posterior RunEp(const Dataset &data, const KernelMatrix &gram,
                const Eigen::MatrixXd &qualities, double alpha, double beta,
                const EpConfig &config) {
  return RunEp(gram, LogWeights(data, qualities), alpha, beta, config);
}

Eigen::RowVectorXd Predictive(const Posterior &post, int task,
                              int quad_points) {
  const int nc = post.num_classes();
  const double theta = post.ThetaBar();
  Eigen::VectorXd win =
      WinProbabilities(post.mean.row(task).transpose(),
                       post.var.row(task).transpose(),
                       GaussHermiteRule(quad_points));
  Eigen::RowVectorXd p =
      (theta / nc + (1.0 - theta) * win.array()).matrix().transpose();
  return p / p.sum();
}

Eigen::MatrixXd PredictiveAll(const Posterior &post, int quad_points) {
  Eigen::MatrixXd p(post.num_tasks(), post.num_classes());
  for (int i = 0; i < post.num_tasks(); ++i)
    p.row(i) = Predictive(post, i, quad_points);
  return p;
}

}  // namespace crowd
