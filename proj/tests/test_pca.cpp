#include "rkhm/pca.hpp"
#include "rkhm/rng.hpp"

#include <doctest.h>

using namespace rkhm;

namespace {

OperatorMatrix scalar_gram(const Eigen::MatrixXd& m) {
  Descriptor d = scalar_algebra();
  OperatorMatrix g = om_zero(d, static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) g.at(i, j).s = m(i, j);
  g.hermitian_flag = true;
  return g;
}

OperatorMatrix random_psd_gram(const Descriptor& d, int n, Rng& rng, int top_degree = -1) {
  OperatorMatrix b = om_zero(d, n, n);
  for (auto& e : b.data) {
    switch (d->kind) {
      case AlgebraKind::Scalar: e.s = cplx(rng.normal(), rng.normal()); break;
      case AlgebraKind::Matrix:
        for (int i = 0; i < d->dim; ++i)
          for (int j = 0; j < d->dim; ++j) e.m(i, j) = cplx(rng.normal(), rng.normal());
        break;
      case AlgebraKind::Function: {
        int top = top_degree < 0 ? std::max(1, d->order / 4) : top_degree;
        for (int j = 0; j <= top; ++j) e.m(j, 0) = cplx(rng.normal(), rng.normal());
        break;
      }
      case AlgebraKind::IntegralOperator:
        for (int i = 0; i < d->coeff_count(); ++i)
          for (int j = 0; j < d->coeff_count(); ++j) e.m(i, j) = cplx(rng.normal(), rng.normal());
        break;
    }
  }
  OperatorMatrix g = om_mul(om_adjoint(b), b);
  g.hermitian_flag = true;
  return g;
}

// the objective is self-adjoint; its derivative along direction v is the
// symmetrization of <v, grad>
AlgebraElement sym_pairing(const ModuleVector& v, const ModuleVector& grad) {
  AlgebraElement p = inner(v, grad);
  return scale(add(p, adjoint(p)), 0.5);
}

} // namespace

TEST_SUITE("pca") {

TEST_CASE("objective and gradient hand values") {
  OperatorMatrix g = scalar_gram(Eigen::MatrixXd::Identity(1, 1));
  ModuleVector c = mv_zero(g.desc, 1);
  c.entries[0].s = 0.5;
  // f(c) = -c^2 + lambda (c^2 - 1)^2 at lambda = 1: f(0.5) = 0.3125
  CHECK(pca_objective(g, c, 1.0).s.real() == doctest::Approx(0.3125).epsilon(1e-14));
  c.entries[0].s = 1.0;
  CHECK(pca_objective(g, c, 1.0).s.real() == doctest::Approx(-1.0).epsilon(1e-14));
  ModuleVector d = pca_gradient(g, c, 1.0);
  CHECK(d.entries[0].s.real() == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(std::abs(d.entries[0].s.imag()) < 1e-14);
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(47);
  // the objective is quartic along any ray, so the symmetric five-point rule
  // differentiates it exactly; a wide step keeps basis refit noise small
  const double h = 5e-2;
  int checked = 0;
  for (int t = 0; t < 50; ++t) {
    Descriptor d = (t % 2 == 0) ? scalar_algebra() : function_algebra(FunctionBasis::Polynomial, 10);
    const int n = 3;
    // degree-1 inputs keep all objective/gradient products representable
    OperatorMatrix g = random_psd_gram(d, n, rng, d->kind == AlgebraKind::Function ? 1 : -1);
    // unit gram scale keeps the difference quotient's truncation term small
    double gs = 0.0;
    for (const auto& e : g.data) gs = std::max(gs, norm(e));
    g = om_scale(g, 1.0 / std::max(1.0, gs));
    double lambda = 0.05 + 0.5 * rng.uniform();
    ModuleVector c = mv_zero(d, n), v = mv_zero(d, n);
    for (int i = 0; i < n; ++i) {
      c.entries[i] = from_scalar(d, cplx(rng.normal(), rng.normal()));
      v.entries[i] = from_scalar(d, cplx(rng.normal(), rng.normal()));
      if (d->kind == AlgebraKind::Function) {
        c.entries[i].m(1, 0) = cplx(rng.normal(), rng.normal());
        v.entries[i].m(1, 0) = cplx(rng.normal(), rng.normal());
      }
    }
    auto f_at = [&](double t) { return pca_objective(g, mv_add(c, mv_scale(v, t)), lambda); };
    AlgebraElement d1 = sub(f_at(h), f_at(-h));
    AlgebraElement d2 = sub(f_at(2 * h), f_at(-2 * h));
    AlgebraElement fd = scale(sub(scale(d1, 8.0), d2), 1.0 / (12.0 * h));
    AlgebraElement an = sym_pairing(v, pca_gradient(g, c, lambda));
    double rel = norm(sub(fd, an)) / std::max(1.0, norm(an));
    CHECK(rel < 1e-5);
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("gradient refuses non-commutative algebras") {
  Rng rng(1);
  OperatorMatrix g = random_psd_gram(matrix_algebra(2), 2, rng);
  ModuleVector c = mv_zero(g.desc, 2);
  c.entries[0] = identity(g.desc);
  CHECK_THROWS_WITH_AS((void)pca_gradient(g, c, 0.1), "use trace solver", std::invalid_argument);
  CHECK_THROWS_WITH_AS((void)pca_objective(g, c, 0.1), "use trace solver", std::invalid_argument);
}

TEST_CASE("gradient descent converges on a scalar gram") {
  Eigen::MatrixXd gm(2, 2);
  gm << 2.0, 0.0, 0.0, 1.0;
  OperatorMatrix g = scalar_gram(gm);
  PcaConfig cfg;
  cfg.rank = 2;
  cfg.lambda = 1.0;
  cfg.eta = 0.05;
  cfg.max_iters = 2000;
  PcaModel model = fit_pca_gd(g, cfg);
  REQUIRE(model.coeffs.size() == 2);
  // first axis aligns with the dominant eigenvector e_1
  const auto& c1 = model.coeffs[0];
  CHECK(std::abs(c1.entries[1].s) < 1e-3 * std::abs(c1.entries[0].s));
  // deflation keeps the axes G-orthogonal
  CHECK(norm(quad_form(model.coeffs[0], g, model.coeffs[1])) < 1e-5);
  // recorded objective decreases monotonically
  const auto& tr = model.objective_trace[0];
  REQUIRE(tr.size() >= 2);
  for (size_t i = 0; i + 1 < tr.size(); ++i)
    CHECK(tr[i + 1].s.real() <= tr[i].s.real() + 1e-9);
}

TEST_CASE("trace solver hand values") {
  Eigen::MatrixXd gm(2, 2);
  gm << 2.0, 0.0, 0.0, 1.0;
  OperatorMatrix g = scalar_gram(gm);
  PcaModel model = fit_pca_trace(g, 1);
  REQUIRE(model.coeffs.size() == 1);
  // c_1 = lambda^{-1/2} w = (1/sqrt(2), 0)
  CHECK(std::abs(model.coeffs[0].entries[0].s) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(model.coeffs[0].entries[1].s) < 1e-12);
  CHECK(model.eigenvalues(0) == doctest::Approx(2.0).epsilon(1e-12));
  // residual trace: (2 + 1) - 2 = 1
  CHECK(std::real(trace(reconstruction_error(g, model))) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_WITH_AS((void)fit_pca_trace(g, 5), "rank exceeds flattened dimension",
                       std::invalid_argument);
}

TEST_CASE("trace solver matches the flat eigendecomposition") {
  Rng rng(53);
  for (int t = 0; t < 10; ++t) {
    Descriptor d = matrix_algebra(2);
    OperatorMatrix g = random_psd_gram(d, 5, rng);
    const int r = 3;
    PcaModel model = fit_pca_trace(g, r);
    Eigen::MatrixXcd flat = flatten(g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (flat + flat.adjoint()));
    Eigen::VectorXd evals = es.eigenvalues().reverse();
    double oracle = evals.sum() - evals.head(r).sum();
    CHECK(std::abs(std::real(trace(reconstruction_error(g, model))) - oracle) < 1e-8);
    for (int j = 0; j < r; ++j)
      CHECK(model.eigenvalues(j) == doctest::Approx(evals(j)).epsilon(1e-10));
    // per-axis attained value: tr(c_j* G^2 c_j) = lambda_j
    for (int j = 0; j < r; ++j) {
      ModuleVector gc = om_apply(g, model.coeffs[j]);
      CHECK(std::real(trace(inner(gc, gc))) == doctest::Approx(evals(j)).epsilon(1e-8));
    }
  }
}

TEST_CASE("hs descent orthonormalizes operator-valued axes") {
  Rng rng(59);
  Descriptor d = operator_algebra(5);
  OperatorMatrix g = random_psd_gram(d, 4, rng);
  PcaConfig cfg;
  cfg.rank = 2;
  cfg.lambda = 0.5;
  cfg.eta = 0.0; // automatic
  cfg.max_iters = 150;
  cfg.epsilon = 1e-6;
  PcaModel model = fit_pca_hs_gd(g, 2, cfg);
  REQUIRE(model.coeffs.size() == 2);
  for (const auto& c : model.coeffs)
    for (const auto& e : c.entries) CHECK(std::abs(e.alpha) < 1e-10);
  // axes are module-orthonormal after the final Gram-Schmidt pass
  for (size_t a = 0; a < model.coeffs.size(); ++a)
    for (size_t b = 0; b < model.coeffs.size(); ++b) {
      AlgebraElement p = quad_form(model.coeffs[a], g, model.coeffs[b]);
      if (a == b) {
        CHECK(norm(sub(multiply(p, p), p)) < 1e-6 * std::max(1.0, norm(p)));
      } else {
        CHECK(norm(p) < 1e-6);
      }
    }
  // objective decreased overall
  const auto& tr = model.objective_trace[0];
  REQUIRE(tr.size() >= 2);
  CHECK(tr.back().s.real() < tr.front().s.real() + 1e-12);
}

TEST_CASE("hs descent rejects identity channels") {
  Rng rng(61);
  Descriptor d = operator_algebra(5);
  OperatorMatrix g = random_psd_gram(d, 3, rng);
  OperatorMatrix bad = g;
  bad.at(0, 0).alpha = 1.0;
  PcaConfig cfg;
  cfg.rank = 1;
  CHECK_THROWS_WITH_AS((void)fit_pca_hs_gd(bad, 1, cfg), "nonzero identity channel",
                       std::invalid_argument);
  cfg.init = mv_zero(d, 3);
  cfg.init.entries[0] = identity(d);
  CHECK_THROWS_WITH_AS((void)fit_pca_hs_gd(g, 1, cfg), "nonzero identity channel",
                       std::invalid_argument);
}

TEST_CASE("training weights recover the projections") {
  Eigen::MatrixXd gm(2, 2);
  gm << 2.0, 0.0, 0.0, 1.0;
  OperatorMatrix g = scalar_gram(gm);
  PcaModel model = fit_pca_trace(g, 1);
  OperatorMatrix w = training_weights(model);
  CHECK(w.rows == 1);
  CHECK(w.cols == 2);
  // w(0, i) = sum_l adjoint(c_l) G_{l,i} = conj(c_i) * g_ii for a diagonal Gram
  CHECK(std::abs(w.at(0, 0).s - std::conj(model.coeffs[0].entries[0].s) * 2.0) < 1e-12);
  CHECK(std::abs(w.at(0, 1).s - std::conj(model.coeffs[0].entries[1].s) * 1.0) < 1e-12);
  CHECK_THROWS_WITH_AS((void)principal_weights(KernelSpec{}, model, Sample{}),
                       "model has no samples", std::invalid_argument);
}

} // TEST_SUITE
