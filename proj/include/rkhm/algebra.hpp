#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rkhm {

using cplx = std::complex<double>;

enum class AlgebraKind { Scalar, Matrix, Function, IntegralOperator };
enum class FunctionBasis { Polynomial, Fourier };

// Shared per-algebra data: quadrature rule on [0,1] plus cached basis tables.
// Elements keep a shared_ptr to this, so descriptors are built once and reused.
struct AlgebraDescriptor {
  AlgebraKind kind = AlgebraKind::Scalar;
  int dim = 1;                                    // m for Matrix
  FunctionBasis basis = FunctionBasis::Polynomial; // Function only
  int order = 0;                                  // N
  Eigen::VectorXd nodes;   // Q Gauss-Legendre nodes on [0,1]
  Eigen::VectorXd weights; // matching weights, sum 1

  // basis tables: eval(q,j) = phi_j(node_q); fit maps grid values back to
  // coefficients by weighted least squares (QR-factored once, see algebra.cpp)
  Eigen::MatrixXd eval;
  Eigen::MatrixXd fit;
  Eigen::VectorXd sqw;     // elementwise sqrt of weights
  Eigen::MatrixXd overlap; // IntegralOperator: overlap(l,p) = integral of t^{l+p}

  int coeff_count() const { return order + 1; }
  int grid_count() const { return static_cast<int>(nodes.size()); }
};

using Descriptor = std::shared_ptr<const AlgebraDescriptor>;

Descriptor scalar_algebra();
Descriptor matrix_algebra(int m);
// q = 0 picks the default rule with 4*(N+1) nodes
Descriptor function_algebra(FunctionBasis basis, int order, int q = 0);
Descriptor function_algebra_on_grid(FunctionBasis basis, int order,
                                    const Eigen::VectorXd& nodes,
                                    const Eigen::VectorXd& weights);
Descriptor operator_algebra(int order, int q = 0);

bool same_algebra(const Descriptor& a, const Descriptor& b);

// Gauss-Legendre rule on [0,1] (weights sum to 1)
void gauss_legendre_01(int q, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

// One element of a concrete C*-algebra. Payload by kind:
//   Scalar          -> s
//   Matrix          -> m (dim x dim)
//   Function        -> m ((N+1) x 1 basis coefficients)
//   IntegralOperator-> alpha (identity channel) + m ((N+1) x (N+1) bivariate
//                      polynomial coefficients H, kernel f(s,t) = sum H_jl s^j t^l)
struct AlgebraElement {
  Descriptor desc;
  cplx s{0.0, 0.0};
  Eigen::MatrixXcd m;
  cplx alpha{0.0, 0.0};
};

AlgebraElement zero(const Descriptor& d);
AlgebraElement identity(const Descriptor& d);
AlgebraElement from_scalar(const Descriptor& d, cplx v); // v * 1_A

AlgebraElement add(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement sub(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement scale(const AlgebraElement& a, cplx v);
AlgebraElement multiply(const AlgebraElement& a, const AlgebraElement& b);
AlgebraElement adjoint(const AlgebraElement& a);

double norm(const AlgebraElement& a);
// distance from self-adjointness, measured with norm()
double asymmetry(const AlgebraElement& a);
bool is_positive(const AlgebraElement& a, double tol);

struct SpectralData {
  Eigen::VectorXd eigenvalues;  // descending
  Eigen::MatrixXcd eigenvectors; // columns match eigenvalues; grid-space for
                                 // Function (indicators) and IntegralOperator
                                 // (weighted coordinates)
  int retained = 0;              // count of eigenvalues > threshold
  double threshold = 0.0;
};

// Spectrum of a self-adjoint positive element. For Function the "spectrum"
// is the grid values sorted descending with indicator eigenvectors; for
// IntegralOperator it is the discretized operator alpha*I + sqrt(W)F sqrt(W).
SpectralData spectral_decompose(const AlgebraElement& a, double threshold);

// g applied to the spectrum: g(alpha)*1 + sum (g(alpha+lambda_i) - g(alpha)) v_i v_i*.
// Thresholded maps (normalize, pseudo-inverses) pass a g that is 0 below the cut.
AlgebraElement spectral_map(const AlgebraElement& a, const std::function<double(double)>& g);

AlgebraElement sqrt_positive(const AlgebraElement& a);
// (a + eps*1)^{-1} through the spectrum; a self-adjoint positive
AlgebraElement shifted_inverse(const AlgebraElement& a, double eps);

// Frobenius / L2(kernel) pairing; IntegralOperator requires alpha = 0
cplx hs_inner(const AlgebraElement& a, const AlgebraElement& b);
// Matrix trace / integral of the kernel along the diagonal (alpha must be 0)
cplx trace(const AlgebraElement& a);

// helpers used across modules and tests
Eigen::VectorXcd function_values(const AlgebraElement& a);          // Function: values at nodes
AlgebraElement function_from_values(const Descriptor& d, const Eigen::VectorXcd& vals);
Eigen::MatrixXcd operator_kernel_values(const AlgebraElement& a);   // IntegralOperator: f at tensor grid
AlgebraElement operator_from_kernel_values(const Descriptor& d, const Eigen::MatrixXcd& vals, cplx alpha);
// dense matrix acting on the discretization space (Scalar 1x1, Matrix m x m,
// Function diag(values), IntegralOperator alpha*I + sqrt(W) F sqrt(W))
Eigen::MatrixXcd discretize(const AlgebraElement& a);

} // namespace rkhm
