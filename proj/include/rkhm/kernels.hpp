#pragma once

#include "rkhm/module.hpp"

namespace rkhm {

// One data point. Functional samples are stored two ways: fitted coefficients
// (univariate/bivariate monomials) or raw values on a kernel-owned grid.
struct Sample {
  enum class Form { Point, UnivariateFn, BivariateFn, GridFn };
  Form form = Form::Point;
  Eigen::VectorXcd point; // complex so quantum states fit; real elsewhere
  Eigen::MatrixXd uni;    // channels x (deg+1) monomial coefficients on [0,1]
  Eigen::MatrixXd bi;     // (deg+1) x (deg+1) monomial coefficients on [0,1]^2
  Eigen::VectorXd grid;   // flattened values over the kernel's input grid
};

Sample point_sample(const Eigen::VectorXd& x);
Sample point_sample_c(const Eigen::VectorXcd& x);
Sample univariate_sample(const Eigen::MatrixXd& channel_coeffs);
Sample bivariate_sample(const Eigen::MatrixXd& coeffs);
Sample grid_sample(const Eigen::VectorXd& values);

double eval_univariate(const Sample& s, int channel, double t);
double eval_bivariate(const Sample& s, double x, double y);

struct ScalarKernel {
  enum class Base { Gaussian, Laplacian };
  Base base = Base::Gaussian;
  double gamma = 1.0;
};

double scalar_kernel_point(const ScalarKernel& k, double x, double y);
double scalar_kernel(const ScalarKernel& k, const Sample& x, const Sample& y);

struct KernelSpec {
  enum class Variant {
    ScalarTimesIdentity,   // k~(x,y) * 1_A
    FunctionalMoment,      // k(x,y)(t) = integral (t - x(s))(t - y(s)) ds
    PointwiseFunction,     // k(x,y)(t) = k~(x(t), y(t))
    DiagonalMatrix,        // diag of m scalar kernels
    IntegralOperatorKernel, // kernel k~(x(s), y(t)), alpha = 0
    QuantumState           // k(x,y) = x x* y y* over Matrix(m)
  };
  Variant variant = Variant::ScalarTimesIdentity;
  Descriptor target;
  ScalarKernel base;
  std::vector<ScalarKernel> diag;  // DiagonalMatrix
  Eigen::VectorXd input_weights;   // FunctionalMoment quadrature over [0,1]^m
};

AlgebraElement eval_kernel(const KernelSpec& spec, const Sample& x, const Sample& y);
// random-coefficient positivity certificate; throws on failure
void check_gram_psd(const OperatorMatrix& g);
OperatorMatrix gram(const KernelSpec& spec, const std::vector<Sample>& samples);
AlgebraElement rkhm_eval(const KernelSpec& spec, const std::vector<Sample>& basis,
                         const ModuleVector& coeffs, const Sample& x);

} // namespace rkhm
