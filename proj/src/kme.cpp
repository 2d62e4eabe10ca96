#include "rkhm/kme.hpp"

#include "rkhm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rkhm {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

AlgebraElement fm_entry(const ScalarKernel& kb, const Sample& xi, const Sample& xj,
                        const Descriptor& d) {
  const int q = d->grid_count();
  Eigen::MatrixXcd vals(q, q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      double acc = 0.0;
      for (int rq = 0; rq < q; ++rq)
        acc += d->weights(rq) * scalar_kernel_point(kb, eval_bivariate(xi, d->nodes(rq), d->nodes(a)),
                                                    eval_bivariate(xj, d->nodes(rq), d->nodes(b)));
      vals(a, b) = acc;
    }
  return operator_from_kernel_values(d, vals, 0.0);
}

} // namespace

DiscreteMeasure dirac(const Descriptor& d, const Sample& x) {
  DiscreteMeasure mu;
  mu.desc = d;
  mu.atoms.push_back({x, identity(d)});
  return mu;
}

AlgebraElement embed_inner(const KernelSpec& spec, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu) {
  require(same_algebra(mu.desc, spec.target) && same_algebra(nu.desc, spec.target),
          "descriptor mismatch");
  AlgebraElement acc = zero(spec.target);
  for (const auto& a : mu.atoms)
    for (const auto& b : nu.atoms)
      acc = add(acc, multiply(adjoint(a.weight),
                              multiply(eval_kernel(spec, a.point, b.point), b.weight)));
  return acc;
}

AlgebraElement mmd(const KernelSpec& spec, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require(same_algebra(mu.desc, nu.desc), "descriptor mismatch");
  DiscreteMeasure diff;
  diff.desc = mu.desc;
  diff.atoms = mu.atoms;
  for (const auto& a : nu.atoms) diff.atoms.push_back({a.point, scale(a.weight, -1.0)});
  return sqrt_positive(embed_inner(spec, diff, diff));
}

FunctionalMeasureSet functional_measure_gram(const std::vector<Sample>& samples,
                                             const ScalarKernel& base_kernel,
                                             const Descriptor& d) {
  require(d->kind == AlgebraKind::IntegralOperator, "algebra mismatch");
  require(!samples.empty(), "need at least one sample");
  for (const auto& s : samples)
    require(s.form == Sample::Form::BivariateFn, "incompatible sample pair");

  FunctionalMeasureSet fm;
  fm.samples = samples;
  fm.base_kernel = base_kernel;
  const int n = static_cast<int>(samples.size());
  fm.gram = om_zero(d, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      fm.gram.at(i, j) = fm_entry(base_kernel, samples[i], samples[j], d);
      if (j != i) fm.gram.at(j, i) = adjoint(fm.gram.at(i, j));
    }
  fm.gram.hermitian_flag = true;
  check_gram_psd(fm.gram);
  return fm;
}

ModuleVector fm_cross_column(const FunctionalMeasureSet& fm, const Sample& x_new) {
  require(x_new.form == Sample::Form::BivariateFn, "incompatible sample pair");
  const Descriptor& d = fm.gram.desc;
  ModuleVector col = mv_zero(d, static_cast<int>(fm.samples.size()));
  for (size_t i = 0; i < fm.samples.size(); ++i)
    col.entries[i] = fm_entry(fm.base_kernel, fm.samples[i], x_new, d);
  return col;
}

InteractionEstimator interaction_fit(const FunctionalMeasureSet& fm,
                                     const std::vector<AlgebraElement>& y, int r,
                                     const PcaConfig& pca_config) {
  const int n = fm.gram.rows;
  require(static_cast<int>(y.size()) == n, "shape mismatch");
  for (const auto& yi : y) require(same_algebra(yi.desc, fm.gram.desc), "algebra mismatch");

  PcaConfig cfg = pca_config;
  cfg.rank = r;
  PcaModel pm;
  switch (fm.gram.desc->kind) {
    case AlgebraKind::IntegralOperator:
      pm = fit_pca_hs_gd(fm.gram, r, cfg);
      break;
    case AlgebraKind::Matrix:
      pm = fit_pca_trace(fm.gram, r);
      break;
    default:
      pm = fit_pca_gd(fm.gram, cfg);
      break;
  }

  InteractionEstimator est;
  est.fm = fm;
  est.Y = y;
  est.C = om_zero(fm.gram.desc, n, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < n; ++i) est.C.at(i, j) = pm.coeffs[j].entries[i];
  for (int j = 0; j < r; ++j) {
    AlgebraElement w = zero(fm.gram.desc);
    for (int i = 0; i < n; ++i) w = add(w, multiply(y[i], est.C.at(i, j)));
    est.YC.push_back(w);
  }
  est.u_coeffs = mv_zero(fm.gram.desc, n);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < r; ++j)
      est.u_coeffs.entries[l] =
          add(est.u_coeffs.entries[l], multiply(est.C.at(l, j), adjoint(est.YC[j])));
  return est;
}

namespace {

AlgebraElement estimate_from_column(const InteractionEstimator& est, const ModuleVector& col) {
  const int n = est.C.rows;
  const int r = est.C.cols;
  AlgebraElement out = zero(est.fm.gram.desc);
  for (int j = 0; j < r; ++j) {
    AlgebraElement proj = zero(est.fm.gram.desc); // (C* g_new)_j
    for (int l = 0; l < n; ++l)
      proj = add(proj, multiply(adjoint(est.C.at(l, j)), col.entries[l]));
    out = add(out, multiply(est.YC[j], proj));
  }
  return out;
}

} // namespace

AlgebraElement interaction_estimate(const InteractionEstimator& est, const Sample& x_new) {
  return estimate_from_column(est, fm_cross_column(est.fm, x_new));
}

AlgebraElement interaction_estimate_at(const InteractionEstimator& est, int i) {
  require(i >= 0 && i < est.fm.gram.cols, "shape mismatch");
  return estimate_from_column(est, om_col(est.fm.gram, i));
}

InteractionMax interaction_max(const InteractionEstimator& est, double epsilon) {
  require(epsilon > 0.0, "epsilon must be positive");
  InteractionMax out;
  AlgebraElement u2 = quad_form(est.u_coeffs, est.fm.gram, est.u_coeffs); // |u|^2
  AlgebraElement au = sqrt_positive(u2);                                  // |u|
  AlgebraElement beps = shifted_inverse(au, epsilon);
  out.v = mv_rmul(est.u_coeffs, beps);
  out.impact = quad_form(est.u_coeffs, est.fm.gram, out.v);

  if (est.fm.gram.desc->kind == AlgebraKind::Matrix ||
      est.fm.gram.desc->kind == AlgebraKind::Scalar) {
    const double cut = 1e-12 * std::max(1.0, norm(u2));
    AlgebraElement b =
        spectral_map(u2, [cut](double x) { return x > cut ? 1.0 / std::sqrt(x) : 0.0; });
    out.v_exact = mv_rmul(est.u_coeffs, b);
    out.impact_exact = quad_form(est.u_coeffs, est.fm.gram, out.v_exact);
    out.has_exact = true;
  }
  return out;
}

std::pair<double, double> quantum_inner(const Eigen::MatrixXcd& rho1,
                                        const Eigen::MatrixXcd& rho2,
                                        const Eigen::MatrixXcd& onb) {
  const int m = static_cast<int>(onb.rows());
  require(m >= 1 && onb.cols() == m, "non-orthonormal basis");
  require((onb.adjoint() * onb - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-10,
          "non-orthonormal basis");
  for (const auto* rho : {&rho1, &rho2}) {
    require(rho->rows() == m && rho->cols() == m, "invalid density matrix");
    require((*rho - rho->adjoint()).cwiseAbs().maxCoeff() <= 1e-10, "invalid density matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(*rho);
    require(es.eigenvalues().minCoeff() >= -1e-10, "invalid density matrix");
    require(std::abs(rho->trace() - cplx(1.0, 0.0)) <= 1e-10, "invalid density matrix");
  }

  Descriptor d = matrix_algebra(m);
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::QuantumState;
  spec.target = d;

  auto measure = [&](const Eigen::MatrixXcd& rho) {
    DiscreteMeasure mu;
    mu.desc = d;
    for (int i = 0; i < m; ++i) {
      AlgebraElement w = zero(d);
      w.m = onb.col(i) * (onb.col(i).adjoint() * rho);
      mu.atoms.push_back({point_sample_c(onb.col(i)), w});
    }
    return mu;
  };

  AlgebraElement ip = embed_inner(spec, measure(rho1), measure(rho2));
  double lhs = std::real(trace(ip));
  double rhs = std::real((rho2 * rho1.adjoint()).trace());
  return {lhs, rhs};
}

} // namespace rkhm
