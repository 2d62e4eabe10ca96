#include "rkhm/pca.hpp"

#include <cmath>
#include <stdexcept>

namespace rkhm {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool commutative(const Descriptor& d) {
  return d->kind == AlgebraKind::Scalar || d->kind == AlgebraKind::Function ||
         (d->kind == AlgebraKind::Matrix && d->dim == 1);
}

ModuleVector ones_vector(const Descriptor& d, int n) {
  ModuleVector c = mv_zero(d, n);
  for (int i = 0; i < n; ++i) c.entries[i] = identity(d);
  return c;
}

// constant kernel f(s,t) = 1 with no identity part; the all-ones start for
// the Hilbert-Schmidt solver, where the identity channel is off limits
ModuleVector ones_kernel_vector(const Descriptor& d, int n) {
  ModuleVector c = mv_zero(d, n);
  for (int i = 0; i < n; ++i) c.entries[i].m(0, 0) = 1.0;
  return c;
}

// deflator: module Gram-Schmidt of the axes found so far; projecting a
// candidate onto their orthogonal complement keeps later axes G-orthogonal
struct Deflator {
  std::vector<ModuleVector> axes;
  QrResult qr;
  bool active = false;

  void rebuild(const OperatorMatrix& g, const std::vector<ModuleVector>& found, double eps) {
    axes = found;
    active = !axes.empty();
    if (!active) return;
    const int k = static_cast<int>(axes.size());
    OperatorMatrix m = om_zero(g.desc, k, k);
    std::vector<ModuleVector> gax(axes.size());
    for (int i = 0; i < k; ++i) gax[i] = om_apply(g, axes[i]);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) m.at(i, j) = inner(axes[i], gax[j]);
    m.hermitian_flag = true;
    qr = gram_schmidt_qr(m, eps);
  }

  ModuleVector apply(const OperatorMatrix& g, const ModuleVector& c) const {
    if (!active) return c;
    const int k = static_cast<int>(axes.size());
    ModuleVector gc = om_apply(g, c);
    ModuleVector v = mv_zero(g.desc, k);
    for (int i = 0; i < k; ++i) v.entries[i] = inner(axes[i], gc);
    ModuleVector w = om_apply(qr.R_inv, om_apply(om_adjoint(qr.R_inv), v));
    ModuleVector out = c;
    for (int i = 0; i < k; ++i)
      for (int l = 0; l < c.size(); ++l)
        out.entries[l] = sub(out.entries[l], multiply(axes[i].entries[l], w.entries[i]));
    return out;
  }
};

double hs_vec_norm(const ModuleVector& u) {
  double s = 0.0;
  for (const auto& e : u.entries) s += std::real(hs_inner(e, e));
  return std::sqrt(std::max(0.0, s));
}

cplx hs_vec_inner(const ModuleVector& a, const ModuleVector& b) {
  cplx s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += hs_inner(a.entries[i], b.entries[i]);
  return s;
}

} // namespace

AlgebraElement pca_objective(const OperatorMatrix& g, const ModuleVector& c, double lambda) {
  require(commutative(g.desc), "use trace solver");
  require(same_algebra(g.desc, c.desc) && g.rows == g.cols && g.rows == c.size(),
          "shape mismatch");
  ModuleVector gc = om_apply(g, c);
  ModuleVector ggc = om_apply(g, gc);
  AlgebraElement quad = inner(c, ggc);                        // c* G^2 c
  AlgebraElement dev = sub(inner(c, gc), identity(g.desc));   // c* G c - 1
  return add(scale(quad, -1.0), scale(multiply(adjoint(dev), dev), lambda));
}

ModuleVector pca_gradient(const OperatorMatrix& g, const ModuleVector& c, double lambda) {
  require(commutative(g.desc), "use trace solver");
  require(same_algebra(g.desc, c.desc) && g.rows == g.cols && g.rows == c.size(),
          "shape mismatch");
  ModuleVector gc = om_apply(g, c);
  ModuleVector ggc = om_apply(g, gc);
  AlgebraElement cgc = inner(c, gc);
  ModuleVector d = mv_zero(g.desc, c.size());
  for (int l = 0; l < c.size(); ++l) {
    AlgebraElement t = scale(ggc.entries[l], -2.0);
    t = sub(t, scale(gc.entries[l], 4.0 * lambda));
    t = add(t, scale(multiply(gc.entries[l], cgc), 4.0 * lambda));
    d.entries[l] = t;
  }
  return d;
}

PcaModel fit_pca_gd(const OperatorMatrix& g, const PcaConfig& config) {
  require(commutative(g.desc), "use trace solver");
  require(g.rows == g.cols, "shape mismatch");
  require(config.rank >= 1 && config.lambda > 0 && config.eta > 0, "bad config");
  const int n = g.rows;

  ModuleVector c0 = config.init.entries.empty() ? ones_vector(g.desc, n) : config.init;
  require(c0.size() == n && same_algebra(c0.desc, g.desc), "shape mismatch");

  PcaModel model;
  model.gram = g;
  Deflator defl;
  for (int axis = 0; axis < config.rank; ++axis) {
    defl.rebuild(g, model.coeffs, config.epsilon);
    ModuleVector c = defl.apply(g, c0);
    std::vector<AlgebraElement> trace_j;
    trace_j.push_back(pca_objective(g, c, config.lambda));
    for (int t = 0; t < config.max_iters; ++t) {
      ModuleVector d = pca_gradient(g, c, config.lambda);
      if (module_norm(d) < 1e-8) break;
      for (int l = 0; l < n; ++l)
        c.entries[l] = sub(c.entries[l], scale(d.entries[l], config.eta));
      c = defl.apply(g, c);
      trace_j.push_back(pca_objective(g, c, config.lambda));
    }
    model.coeffs.push_back(c);
    model.objective_trace.push_back(std::move(trace_j));
  }
  return model;
}

PcaModel fit_pca_trace(const OperatorMatrix& g, int r) {
  require(g.desc->kind == AlgebraKind::Matrix || g.desc->kind == AlgebraKind::Scalar,
          "algebra mismatch");
  require(g.rows == g.cols, "shape mismatch");
  const int m = g.desc->kind == AlgebraKind::Scalar ? 1 : g.desc->dim;
  const int n = g.rows;
  require(r >= 1 && r <= m * n, "rank exceeds flattened dimension");

  Eigen::MatrixXcd flat = flatten(g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (flat + flat.adjoint()));
  Eigen::VectorXd evals = es.eigenvalues().reverse();
  Eigen::MatrixXcd evecs = es.eigenvectors().rowwise().reverse();
  for (int j = 0; j < evecs.cols(); ++j) {
    int imax = 0;
    double best = -1.0;
    for (int i = 0; i < evecs.rows(); ++i)
      if (std::abs(evecs(i, j)) > best + 1e-14) {
        best = std::abs(evecs(i, j));
        imax = i;
      }
    cplx ph = evecs(imax, j);
    if (std::abs(ph) > 0) evecs.col(j) *= std::conj(ph) / std::abs(ph);
  }

  PcaModel model;
  model.gram = g;
  model.eigenvalues = evals.head(r);
  const double floor_ev = 1e-12 * std::max(1.0, evals.size() ? std::abs(evals(0)) : 1.0);
  for (int j = 0; j < r; ++j) {
    ModuleVector c = mv_zero(g.desc, n);
    if (evals(j) > floor_ev) {
      const double s = 1.0 / std::sqrt(evals(j));
      for (int i = 0; i < n; ++i) {
        if (g.desc->kind == AlgebraKind::Scalar)
          c.entries[i].s = s * evecs(i, j);
        else
          c.entries[i].m.col(0) = s * evecs.col(j).segment(i * m, m);
      }
    }
    ModuleVector ggc = om_apply(g, om_apply(g, c));
    model.objective_trace.push_back({scale(inner(c, ggc), -1.0)});
    model.coeffs.push_back(std::move(c));
  }
  return model;
}

PcaModel fit_pca_hs_gd(const OperatorMatrix& g, int r, const PcaConfig& config) {
  require(g.desc->kind == AlgebraKind::IntegralOperator, "algebra mismatch");
  require(g.rows == g.cols, "shape mismatch");
  require(r >= 1 && config.lambda > 0, "bad config");
  const int n = g.rows;
  double scale_g = 0.0;
  for (const auto& e : g.data) scale_g = std::max(scale_g, norm(e));
  for (const auto& e : g.data)
    require(std::abs(e.alpha) <= 1e-10 * std::max(1.0, scale_g), "nonzero identity channel");

  ModuleVector c0 = config.init.entries.empty() ? ones_kernel_vector(g.desc, n) : config.init;
  require(c0.size() == n && same_algebra(c0.desc, g.desc), "shape mismatch");
  for (const auto& e : c0.entries)
    require(std::abs(e.alpha) <= 1e-12, "nonzero identity channel");

  double eta = config.eta;
  if (eta <= 0) {
    // power iteration for the top HS-singular value of G, to scale the step
    ModuleVector v = ones_kernel_vector(g.desc, n);
    double theta = 1.0;
    for (int t = 0; t < 20; ++t) {
      v = om_apply(g, v);
      theta = hs_vec_norm(v);
      if (theta < 1e-300) break;
      for (auto& e : v.entries) e = scale(e, 1.0 / theta);
    }
    eta = 0.5 / (2.0 * theta * theta + 2.0 * config.lambda * theta + 1e-12);
  }

  PcaModel model;
  model.gram = g;
  std::vector<ModuleVector> ortho; // HS-orthonormal basis of the found axes
  for (int axis = 0; axis < r; ++axis) {
    auto deflate = [&](ModuleVector c) {
      for (const auto& u : ortho) {
        cplx ip = hs_vec_inner(u, c);
        for (int l = 0; l < n; ++l)
          c.entries[l] = sub(c.entries[l], scale(u.entries[l], ip));
      }
      return c;
    };
    // for lambda below the top eigenvalue of G the penalized objective is
    // unbounded below, so iterates are pulled back onto the unit level set
    // of <c,Gc> that the penalty targets; that keeps the descent bounded
    auto renorm = [&](ModuleVector c) {
      double s = std::real(hs_vec_inner(c, om_apply(g, c)));
      if (s > 1e-300)
        for (auto& e : c.entries) e = scale(e, 1.0 / std::sqrt(s));
      return c;
    };
    ModuleVector c = renorm(deflate(c0));
    std::vector<AlgebraElement> trace_j;
    auto objv = [&](const ModuleVector& cc, const ModuleVector& gc) {
      double q = 0.0;
      for (const auto& e : gc.entries) q += std::real(hs_inner(e, e));
      double s = std::real(hs_vec_inner(cc, gc));
      return -q + config.lambda * std::abs(s - 1.0);
    };
    double fcur = objv(c, om_apply(g, c));
    trace_j.push_back(from_scalar(scalar_algebra(), fcur));
    double step = eta;
    for (int t = 0; t < config.max_iters; ++t) {
      ModuleVector gc = om_apply(g, c);
      ModuleVector ggc = om_apply(g, gc);
      double s = std::real(hs_vec_inner(c, gc));
      double sgn = s >= 1.0 ? 1.0 : -1.0;
      ModuleVector d = mv_zero(g.desc, n);
      for (int l = 0; l < n; ++l)
        d.entries[l] = add(scale(ggc.entries[l], -2.0),
                           scale(gc.entries[l], 2.0 * config.lambda * sgn));
      if (hs_vec_norm(d) < 1e-8) break;
      // backtracking keeps the recorded objective monotone
      bool moved = false;
      while (step > 1e-18) {
        ModuleVector cand = c;
        for (int l = 0; l < n; ++l)
          cand.entries[l] = sub(cand.entries[l], scale(d.entries[l], step));
        cand = renorm(deflate(cand));
        double fcand = objv(cand, om_apply(g, cand));
        if (fcand <= fcur + 1e-14) {
          c = std::move(cand);
          fcur = fcand;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      trace_j.push_back(from_scalar(scalar_algebra(), fcur));
    }
    model.coeffs.push_back(c);
    model.objective_trace.push_back(std::move(trace_j));
    double cn = hs_vec_norm(c);
    if (cn > 1e-14) {
      for (auto& e : c.entries) e = scale(e, 1.0 / cn);
      ortho.push_back(c);
    }
  }

  // descent enforces the trace constraint only softly; orthonormalize the
  // axes in the module metric so downstream projections are well posed
  {
    const int k = static_cast<int>(model.coeffs.size());
    OperatorMatrix msmall = om_zero(g.desc, k, k);
    std::vector<ModuleVector> gax(model.coeffs.size());
    for (int i = 0; i < k; ++i) gax[i] = om_apply(g, model.coeffs[i]);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) msmall.at(i, j) = inner(model.coeffs[i], gax[j]);
    msmall.hermitian_flag = true;
    QrResult qr = gram_schmidt_qr(msmall, config.epsilon);
    std::vector<ModuleVector> out;
    for (int j = 0; j < k; ++j) {
      ModuleVector cj = mv_zero(g.desc, n);
      for (int i = 0; i < k; ++i)
        for (int l = 0; l < n; ++l)
          cj.entries[l] =
              add(cj.entries[l], multiply(model.coeffs[i].entries[l], qr.R_inv.at(i, j)));
      out.push_back(std::move(cj));
    }
    model.coeffs = std::move(out);
  }
  return model;
}

AlgebraElement reconstruction_error(const OperatorMatrix& g, const PcaModel& model) {
  require(g.rows == g.cols, "shape mismatch");
  AlgebraElement err = zero(g.desc);
  for (int i = 0; i < g.rows; ++i) err = add(err, g.at(i, i));
  for (const auto& c : model.coeffs) {
    require(c.size() == g.rows && same_algebra(c.desc, g.desc), "shape mismatch");
    ModuleVector gc = om_apply(g, c);
    for (int i = 0; i < g.rows; ++i)
      err = sub(err, multiply(gc.entries[i], adjoint(gc.entries[i])));
  }
  return err;
}

std::vector<AlgebraElement> principal_weights(const KernelSpec& spec, const PcaModel& model,
                                              const Sample& x) {
  require(!model.samples.empty(), "model has no samples");
  std::vector<AlgebraElement> w;
  for (const auto& c : model.coeffs) {
    AlgebraElement acc = zero(c.desc);
    for (size_t i = 0; i < model.samples.size(); ++i)
      acc = add(acc, multiply(adjoint(c.entries[static_cast<int>(i)]),
                              eval_kernel(spec, model.samples[i], x)));
    w.push_back(acc);
  }
  return w;
}

OperatorMatrix training_weights(const PcaModel& model) {
  const OperatorMatrix& g = model.gram;
  const int r = static_cast<int>(model.coeffs.size());
  OperatorMatrix w = om_zero(g.desc, r, g.cols);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < g.cols; ++i) {
      AlgebraElement acc = zero(g.desc);
      for (int l = 0; l < g.rows; ++l)
        acc = add(acc, multiply(adjoint(model.coeffs[j].entries[l]), g.at(l, i)));
      w.at(j, i) = acc;
    }
  return w;
}

} // namespace rkhm
