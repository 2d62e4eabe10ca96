#include "rkhm/kernels.hpp"
#include "rkhm/rng.hpp"

#include <doctest.h>

using namespace rkhm;

TEST_SUITE("kernels") {

TEST_CASE("scalar kernels on points") {
  ScalarKernel g{ScalarKernel::Base::Gaussian, 1.0};
  ScalarKernel l{ScalarKernel::Base::Laplacian, 2.0};
  CHECK(scalar_kernel_point(g, 0.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(scalar_kernel_point(l, 0.0, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  Eigen::VectorXd a(2), b(2);
  a << 0, 0;
  b << 3, 4;
  CHECK(scalar_kernel(g, point_sample(a), point_sample(b)) ==
        doctest::Approx(std::exp(-25.0)).epsilon(1e-12));
}

TEST_CASE("univariate functional distance is the exact L2 distance") {
  // x(t) = t, y(t) = 0: ||x-y||^2 = 1/3
  Eigen::MatrixXd cx(1, 2), cy(1, 1);
  cx << 0.0, 1.0;
  cy << 0.0;
  ScalarKernel g{ScalarKernel::Base::Gaussian, 1.0};
  CHECK(scalar_kernel(g, univariate_sample(cx), univariate_sample(cy)) ==
        doctest::Approx(std::exp(-1.0 / 3.0)).epsilon(1e-14));
  CHECK(eval_univariate(univariate_sample(cx), 0, 0.25) == doctest::Approx(0.25));
}

TEST_CASE("bivariate functional distance uses the moment matrix") {
  // x(s,t) = s t: ||x||^2 = (1/3)^2
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
  c(1, 1) = 1.0;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 2);
  ScalarKernel g{ScalarKernel::Base::Gaussian, 1.0};
  CHECK(scalar_kernel(g, bivariate_sample(c), bivariate_sample(z)) ==
        doctest::Approx(std::exp(-1.0 / 9.0)).epsilon(1e-14));
  CHECK(eval_bivariate(bivariate_sample(c), 0.5, 0.25) == doctest::Approx(0.125));
}

TEST_CASE("scalar times identity lifts to any target algebra") {
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::ScalarTimesIdentity;
  spec.target = matrix_algebra(2);
  spec.base = {ScalarKernel::Base::Gaussian, 1.0};
  Eigen::VectorXd a(1), b(1);
  a << 0;
  b << 1;
  AlgebraElement k = eval_kernel(spec, point_sample(a), point_sample(b));
  CHECK(std::abs(k.m(0, 0) - cplx(std::exp(-1.0), 0)) < 1e-14);
  CHECK(std::abs(k.m(1, 1) - cplx(std::exp(-1.0), 0)) < 1e-14);
  CHECK(std::abs(k.m(0, 1)) < 1e-15);
}

TEST_CASE("functional moment kernel on constant samples") {
  // x = y = 1 on the grid with unit total weight: k(t) = (t-1)^2
  Descriptor d = function_algebra(FunctionBasis::Polynomial, 10);
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::FunctionalMoment;
  spec.target = d;
  spec.input_weights = Eigen::VectorXd::Constant(9, 1.0 / 9.0);
  Sample ones = grid_sample(Eigen::VectorXd::Ones(9));
  AlgebraElement k = eval_kernel(spec, ones, ones);
  CHECK(std::abs(k.m(0, 0) - cplx(1, 0)) < 1e-14);
  CHECK(std::abs(k.m(1, 0) - cplx(-2, 0)) < 1e-14);
  CHECK(std::abs(k.m(2, 0) - cplx(1, 0)) < 1e-14);
  for (int j = 3; j <= 10; ++j) CHECK(std::abs(k.m(j, 0)) < 1e-15);
}

TEST_CASE("pointwise function kernel of a sample with itself is one") {
  Descriptor d = function_algebra(FunctionBasis::Polynomial, 10);
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::PointwiseFunction;
  spec.target = d;
  spec.base = {ScalarKernel::Base::Gaussian, 1.0};
  Eigen::MatrixXd cx(1, 3);
  cx << 0.3, -1.0, 0.7;
  AlgebraElement k = eval_kernel(spec, univariate_sample(cx), univariate_sample(cx));
  Eigen::VectorXcd vals = function_values(k);
  for (int q = 0; q < d->grid_count(); ++q)
    CHECK(vals(q).real() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("diagonal matrix kernel stacks scalar kernels") {
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::DiagonalMatrix;
  spec.target = matrix_algebra(2);
  spec.diag = {{ScalarKernel::Base::Gaussian, 1.0}, {ScalarKernel::Base::Laplacian, 1.0}};
  Eigen::VectorXd a(1), b(1);
  a << 0;
  b << 2;
  AlgebraElement k = eval_kernel(spec, point_sample(a), point_sample(b));
  CHECK(std::abs(k.m(0, 0) - cplx(std::exp(-4.0), 0)) < 1e-14);
  CHECK(std::abs(k.m(1, 1) - cplx(std::exp(-2.0), 0)) < 1e-14);
}

TEST_CASE("integral operator kernel is self adjoint and psd on the diagonal") {
  Descriptor d = operator_algebra(5);
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::IntegralOperatorKernel;
  spec.target = d;
  spec.base = {ScalarKernel::Base::Gaussian, 1.0};
  Eigen::MatrixXd cx(1, 2);
  cx << 0.0, 1.0; // x(t) = t
  AlgebraElement k = eval_kernel(spec, univariate_sample(cx), univariate_sample(cx));
  CHECK(std::abs(k.alpha) == 0.0);
  CHECK(asymmetry(k) < 1e-10);
  CHECK(is_positive(k, 1e-8));
  // smooth kernel refits well: value at the grid center is close to 1
  Eigen::MatrixXcd vals = operator_kernel_values(k);
  int mid = d->grid_count() / 2;
  CHECK(vals(mid, mid).real() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("quantum state kernel rank one identity") {
  Descriptor d = matrix_algebra(2);
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::QuantumState;
  spec.target = d;
  Eigen::VectorXcd e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  AlgebraElement k11 = eval_kernel(spec, point_sample_c(e1), point_sample_c(e1));
  CHECK(std::abs(k11.m(0, 0) - cplx(1, 0)) < 1e-15);
  CHECK(std::abs(k11.m(1, 1)) < 1e-15);
  AlgebraElement k12 = eval_kernel(spec, point_sample_c(e1), point_sample_c(e2));
  CHECK(norm(k12) < 1e-15); // orthogonal states
}

TEST_CASE("gram is hermitian and certified psd") {
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::ScalarTimesIdentity;
  spec.target = scalar_algebra();
  spec.base = {ScalarKernel::Base::Gaussian, 0.7};
  Rng rng(41);
  std::vector<Sample> pts;
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd x(2);
    x << rng.normal(), rng.normal();
    pts.push_back(point_sample(x));
  }
  OperatorMatrix g = gram(spec, pts);
  CHECK(g.hermitian_flag);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(norm(sub(g.at(i, j), adjoint(g.at(j, i)))) < 1e-14);
}

TEST_CASE("psd certificate rejects an indefinite matrix") {
  Descriptor d = scalar_algebra();
  OperatorMatrix g = om_zero(d, 2, 2);
  g.at(0, 0).s = 1.0;
  g.at(0, 1).s = 2.0;
  g.at(1, 0).s = 2.0;
  g.at(1, 1).s = 1.0; // eigenvalues 3 and -1
  g.hermitian_flag = true;
  CHECK_THROWS_WITH_AS(check_gram_psd(g), "kernel not PSD at given truncation",
                       std::invalid_argument);
}

TEST_CASE("rkhm evaluation matches the direct sum") {
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::ScalarTimesIdentity;
  spec.target = scalar_algebra();
  spec.base = {ScalarKernel::Base::Gaussian, 1.0};
  Rng rng(43);
  std::vector<Sample> pts;
  ModuleVector c = mv_zero(spec.target, 3);
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd x(1);
    x << rng.normal();
    pts.push_back(point_sample(x));
    c.entries[i].s = cplx(rng.normal(), rng.normal());
  }
  Eigen::VectorXd x0(1);
  x0 << 0.25;
  AlgebraElement v = rkhm_eval(spec, pts, c, point_sample(x0));
  cplx expect = 0.0;
  for (int i = 0; i < 3; ++i)
    expect += scalar_kernel(spec.base, point_sample(x0), pts[i]) * c.entries[i].s;
  CHECK(std::abs(v.s - expect) < 1e-13);
}

} // TEST_SUITE
