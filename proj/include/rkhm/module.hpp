#pragma once

#include "rkhm/algebra.hpp"

namespace rkhm {

struct ModuleVector {
  Descriptor desc;
  std::vector<AlgebraElement> entries;

  int size() const { return static_cast<int>(entries.size()); }
};

struct OperatorMatrix {
  Descriptor desc;
  int rows = 0, cols = 0;
  std::vector<AlgebraElement> data; // row-major
  bool hermitian_flag = false;

  AlgebraElement& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  const AlgebraElement& at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
};

ModuleVector mv_zero(const Descriptor& d, int n);
ModuleVector mv_basis(const Descriptor& d, int n, int j); // e_j (1_A at slot j)
ModuleVector mv_add(const ModuleVector& a, const ModuleVector& b);
ModuleVector mv_sub(const ModuleVector& a, const ModuleVector& b);
ModuleVector mv_scale(const ModuleVector& a, cplx v);
// right module action: entries u_i * a
ModuleVector mv_rmul(const ModuleVector& u, const AlgebraElement& a);

OperatorMatrix om_zero(const Descriptor& d, int rows, int cols);
OperatorMatrix om_identity(const Descriptor& d, int n);
OperatorMatrix om_adjoint(const OperatorMatrix& a);
OperatorMatrix om_mul(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix om_add(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix om_sub(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix om_scale(const OperatorMatrix& a, cplx v);
ModuleVector om_apply(const OperatorMatrix& a, const ModuleVector& u); // (A u)_i = sum_j A_ij u_j
ModuleVector om_col(const OperatorMatrix& a, int j);

AlgebraElement inner(const ModuleVector& u, const ModuleVector& v);
// <a, G b> without forming G b twice
AlgebraElement quad_form(const ModuleVector& a, const OperatorMatrix& g, const ModuleVector& b);
AlgebraElement absolute(const ModuleVector& u);
double module_norm(const ModuleVector& u);

struct Normalized {
  ModuleVector q;
  AlgebraElement b_hat;
  AlgebraElement b;
};
// Spectral normalization: q = q_hat * b_hat with <q,q> a nonzero idempotent
Normalized normalize(const ModuleVector& q_hat, double epsilon);

struct QrResult {
  OperatorMatrix R;
  OperatorMatrix R_inv;
  std::vector<bool> kept;
  double epsilon = 0.0;
};

// Gram-Schmidt in coefficient space: all inner products go through G
QrResult gram_schmidt_qr(const OperatorMatrix& g, double epsilon);

// coefficients of the projection of u onto span{q_j}: R_inv (R_inv* G u)
ModuleVector project(const ModuleVector& u_coeffs, const QrResult& qr, const OperatorMatrix& g);

// dense representation of an A-valued matrix acting on the discretization
// space (block structure), for spectral checks in tests and diagnostics
Eigen::MatrixXcd flatten(const OperatorMatrix& a);

} // namespace rkhm
