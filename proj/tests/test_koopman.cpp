#include "rkhm/koopman.hpp"
#include "rkhm/rng.hpp"

#include <doctest.h>

using namespace rkhm;

namespace {

KernelSpec scalar_spec(double gamma = 1.0) {
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::ScalarTimesIdentity;
  spec.target = scalar_algebra();
  spec.base = {ScalarKernel::Base::Gaussian, gamma};
  return spec;
}

std::vector<Sample> periodic_points(int period, int count) {
  std::vector<Sample> out;
  std::vector<Eigen::VectorXd> states;
  for (int p = 0; p < period; ++p) {
    Eigen::VectorXd x(1);
    x << 0.85 * p - 0.3;
    states.push_back(x);
  }
  for (int t = 0; t < count; ++t) out.push_back(point_sample(states[t % period]));
  return out;
}

} // namespace

TEST_SUITE("koopman") {

TEST_CASE("transfer estimate reproduces similarities on periodic series") {
  for (int period : {2, 3}) {
    KernelSpec spec = scalar_spec();
    std::vector<Sample> series = periodic_points(period, 7);
    PfModel model = estimate_pf(spec, series, 1e-9);
    const int t = model.horizon();
    CHECK(t == 6);
    for (int a = 0; a <= t; ++a)
      for (int b = 0; b <= t; ++b) {
        AlgebraElement truth = eval_kernel(spec, series[a], series[b]);
        CHECK(norm(sub(predict_similarity(model, a, b), truth)) < 1e-6);
        CHECK(norm(sub(model.gram_full.at(a, b), truth)) < 1e-14);
      }
  }
}

TEST_CASE("two step feature oracle for the 2-periodic series") {
  // with two distinct states the feature space is 2-dimensional and K swaps
  // the features, so K^2 = identity on the span
  KernelSpec spec = scalar_spec();
  std::vector<Sample> series = periodic_points(2, 6);
  PfModel model = estimate_pf(spec, series, 1e-9);
  OperatorMatrix k2 = om_mul(model.K_T, model.K_T);
  OperatorMatrix gt = om_zero(spec.target, model.horizon(), model.horizon());
  for (int i = 0; i < model.horizon(); ++i)
    for (int l = 0; l < model.horizon(); ++l) gt.at(i, l) = model.gram_full.at(i, l);
  gt.hermitian_flag = true;
  OperatorMatrix j = om_mul(om_adjoint(model.qr.R_inv), om_mul(gt, model.qr.R_inv));
  // K^2 acts as the identity on the projected feature space: J K^2 = J K^0
  OperatorMatrix lhs = om_mul(j, k2);
  double res = 0.0;
  for (int i = 0; i < model.horizon(); ++i)
    for (int l = 0; l < model.horizon(); ++l) res = std::max(res, norm(sub(lhs.at(i, l), j.at(i, l))));
  CHECK(res < 1e-8);
}

TEST_CASE("eigenvector at one exists for periodic dynamics") {
  KernelSpec spec = scalar_spec();
  std::vector<Sample> series = periodic_points(2, 7);
  PfModel model = estimate_pf(spec, series, 1e-9);
  std::vector<ModuleVector> vecs = pf_eig1(model, 0.01, 0.1, 300);
  REQUIRE(!vecs.empty());
  for (const auto& v : vecs) {
    double res = module_norm(mv_sub(om_apply(model.K_T, v), v)) / module_norm(v);
    CHECK(res < 10.0 * std::sqrt(0.01));
  }
}

TEST_CASE("oversized steps are reported") {
  KernelSpec spec = scalar_spec();
  std::vector<Sample> series = periodic_points(2, 7);
  PfModel model = estimate_pf(spec, series, 1e-9);
  CHECK_THROWS_WITH_AS((void)pf_eig1(model, 0.01, 1e9, 50), "step too large",
                       std::runtime_error);
}

TEST_CASE("mode decomposition reconstructs the gram") {
  KernelSpec spec = scalar_spec();
  std::vector<Sample> series = periodic_points(3, 8);
  PfModel model = estimate_pf(spec, series, 1e-9);
  std::vector<ModuleVector> vecs = pf_eig1(model, 0.01, 0.1, 300);
  REQUIRE(!vecs.empty());
  ModeDecomposition md = mode_decompose(model, vecs);
  CHECK(asymmetry(md.invariant_term) < 1e-10);
  const int t = model.horizon();
  for (int a = 0; a <= t; ++a)
    for (int b = 0; b <= t; ++b)
      CHECK(norm(sub(add(md.invariant_term, md.residual(a, b)), model.gram_full.at(a, b))) <
            1e-12);
}

TEST_CASE("degenerate eigenvectors are rejected") {
  KernelSpec spec = scalar_spec();
  std::vector<Sample> series = periodic_points(2, 6);
  PfModel model = estimate_pf(spec, series, 1e-9);
  std::vector<ModuleVector> zeros = {mv_zero(spec.target, model.horizon())};
  CHECK_THROWS_WITH_AS((void)mode_decompose(model, zeros), "all eigenvectors degenerate",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS((void)mode_decompose(model, {}), "eig_vecs empty", std::invalid_argument);
}

TEST_CASE("input validation") {
  KernelSpec spec = scalar_spec();
  std::vector<Sample> series = periodic_points(2, 6);
  CHECK_THROWS_WITH_AS((void)estimate_pf(spec, {series[0]}, 1e-9), "need at least two samples",
                       std::invalid_argument);
  PfModel model = estimate_pf(spec, series, 1e-9);
  CHECK_THROWS_WITH_AS((void)predict_similarity(model, -1, 0), "negative time index",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS((void)pf_eig1(model, 1.5, 0.1, 10), "lambda must lie in (0,1)",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS((void)pf_eig1(model, 0.1, -1.0, 10), "bad descent parameters",
                       std::invalid_argument);
}

TEST_CASE("operator valued series round trip") {
  // same contract with the integral-operator kernel on short functional series
  Descriptor d = operator_algebra(4);
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::IntegralOperatorKernel;
  spec.target = d;
  // narrow kernel plus profiles with disjoint value ranges and matched slopes:
  // the feature columns of distinct profiles are then nearly orthogonal and
  // the whitened transfer matrix stays bounded, so its powers do not amplify
  // the spectral truncation of the normalizers
  spec.base = {ScalarKernel::Base::Gaussian, 8.0};
  std::vector<Sample> series;
  Eigen::MatrixXd c0(1, 2), c1(1, 3);
  c0 << 0.2, 0.6;
  c1 << 1.6, 0.6, -0.05;
  for (int t = 0; t < 6; ++t) series.push_back(univariate_sample(t % 2 == 0 ? c0 : c1));
  // the genuine second direction clears the cutoff while duplicate columns
  // (spectral tails) fall under it
  PfModel model = estimate_pf(spec, series, 1e-3);
  const int t = model.horizon();
  double worst = 0.0;
  for (int a = 0; a <= t; ++a)
    for (int b = 0; b <= t; ++b)
      worst = std::max(worst,
                       norm(sub(predict_similarity(model, a, b), model.gram_full.at(a, b))));
  CHECK(worst < 1e-6);
}

} // TEST_SUITE
