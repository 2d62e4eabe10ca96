#include "rkhm/module.hpp"

#include "rkhm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rkhm {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

} // namespace

ModuleVector mv_zero(const Descriptor& d, int n) {
  require(n >= 1, "module vector needs at least one entry");
  ModuleVector u;
  u.desc = d;
  u.entries.assign(n, zero(d));
  return u;
}

ModuleVector mv_basis(const Descriptor& d, int n, int j) {
  ModuleVector u = mv_zero(d, n);
  u.entries[j] = identity(d);
  return u;
}

ModuleVector mv_add(const ModuleVector& a, const ModuleVector& b) {
  require(a.size() == b.size(), "shape mismatch");
  ModuleVector r = a;
  for (int i = 0; i < r.size(); ++i) r.entries[i] = add(a.entries[i], b.entries[i]);
  return r;
}

ModuleVector mv_sub(const ModuleVector& a, const ModuleVector& b) {
  require(a.size() == b.size(), "shape mismatch");
  ModuleVector r = a;
  for (int i = 0; i < r.size(); ++i) r.entries[i] = sub(a.entries[i], b.entries[i]);
  return r;
}

ModuleVector mv_scale(const ModuleVector& a, cplx v) {
  ModuleVector r = a;
  for (auto& e : r.entries) e = scale(e, v);
  return r;
}

ModuleVector mv_rmul(const ModuleVector& u, const AlgebraElement& a) {
  ModuleVector r = u;
  for (auto& e : r.entries) e = multiply(e, a);
  return r;
}

OperatorMatrix om_zero(const Descriptor& d, int rows, int cols) {
  OperatorMatrix a;
  a.desc = d;
  a.rows = rows;
  a.cols = cols;
  a.data.assign(static_cast<size_t>(rows) * cols, zero(d));
  return a;
}

OperatorMatrix om_identity(const Descriptor& d, int n) {
  OperatorMatrix a = om_zero(d, n, n);
  for (int i = 0; i < n; ++i) a.at(i, i) = identity(d);
  a.hermitian_flag = true;
  return a;
}

OperatorMatrix om_adjoint(const OperatorMatrix& a) {
  OperatorMatrix r = om_zero(a.desc, a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r.at(j, i) = adjoint(a.at(i, j));
  r.hermitian_flag = a.hermitian_flag;
  return r;
}

OperatorMatrix om_mul(const OperatorMatrix& a, const OperatorMatrix& b) {
  require(a.cols == b.rows, "shape mismatch");
  OperatorMatrix r = om_zero(a.desc, a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j) {
      AlgebraElement s = zero(a.desc);
      for (int k = 0; k < a.cols; ++k) s = add(s, multiply(a.at(i, k), b.at(k, j)));
      r.at(i, j) = s;
    }
  return r;
}

OperatorMatrix om_add(const OperatorMatrix& a, const OperatorMatrix& b) {
  require(a.rows == b.rows && a.cols == b.cols, "shape mismatch");
  OperatorMatrix r = a;
  for (size_t i = 0; i < r.data.size(); ++i) r.data[i] = add(a.data[i], b.data[i]);
  r.hermitian_flag = a.hermitian_flag && b.hermitian_flag;
  return r;
}

OperatorMatrix om_sub(const OperatorMatrix& a, const OperatorMatrix& b) {
  require(a.rows == b.rows && a.cols == b.cols, "shape mismatch");
  OperatorMatrix r = a;
  for (size_t i = 0; i < r.data.size(); ++i) r.data[i] = sub(a.data[i], b.data[i]);
  r.hermitian_flag = a.hermitian_flag && b.hermitian_flag;
  return r;
}

OperatorMatrix om_scale(const OperatorMatrix& a, cplx v) {
  OperatorMatrix r = a;
  for (auto& e : r.data) e = scale(e, v);
  return r;
}

ModuleVector om_apply(const OperatorMatrix& a, const ModuleVector& u) {
  require(a.cols == u.size(), "shape mismatch");
  ModuleVector r = mv_zero(a.desc, a.rows);
  for (int i = 0; i < a.rows; ++i) {
    AlgebraElement s = zero(a.desc);
    for (int j = 0; j < a.cols; ++j) s = add(s, multiply(a.at(i, j), u.entries[j]));
    r.entries[i] = s;
  }
  return r;
}

ModuleVector om_col(const OperatorMatrix& a, int j) {
  ModuleVector r = mv_zero(a.desc, a.rows);
  for (int i = 0; i < a.rows; ++i) r.entries[i] = a.at(i, j);
  return r;
}

AlgebraElement inner(const ModuleVector& u, const ModuleVector& v) {
  require(u.size() == v.size() && same_algebra(u.desc, v.desc), "shape mismatch");
  AlgebraElement s = zero(u.desc);
  for (int i = 0; i < u.size(); ++i) s = add(s, multiply(adjoint(u.entries[i]), v.entries[i]));
  return s;
}

AlgebraElement quad_form(const ModuleVector& a, const OperatorMatrix& g, const ModuleVector& b) {
  return inner(a, om_apply(g, b));
}

AlgebraElement absolute(const ModuleVector& u) { return sqrt_positive(inner(u, u)); }

double module_norm(const ModuleVector& u) {
  return std::sqrt(std::max(0.0, norm(inner(u, u))));
}

Normalized normalize(const ModuleVector& q_hat, double epsilon) {
  AlgebraElement m = inner(q_hat, q_hat);
  const double n = std::sqrt(std::max(0.0, norm(m)));
  require(n > epsilon, "degenerate vector");
  const double cut = epsilon * epsilon;
  Normalized out;
  out.b_hat = spectral_map(m, [cut](double x) { return x > cut ? 1.0 / std::sqrt(x) : 0.0; });
  out.b = spectral_map(m, [cut](double x) { return x > cut ? std::sqrt(x) : 0.0; });
  out.q = mv_rmul(q_hat, out.b_hat);
  return out;
}

QrResult gram_schmidt_qr(const OperatorMatrix& g, double epsilon) {
  require(g.rows == g.cols, "shape mismatch");
  const int n = g.rows;
  const Descriptor& d = g.desc;

  {
    // cheap empirical PSD certificate (hermitian + random quadratic forms)
    double scale_g = 0.0;
    for (int i = 0; i < n; ++i) scale_g = std::max(scale_g, norm(g.at(i, i)));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        if (norm(sub(g.at(i, j), adjoint(g.at(j, i)))) > 1e-8 * std::max(1.0, scale_g))
          throw std::invalid_argument("invalid Gram matrix");
    Rng rng_check(0x5eedULL);
    for (int rep = 0; rep < 4; ++rep) {
      ModuleVector c = mv_zero(d, n);
      for (int i = 0; i < n; ++i)
        c.entries[i] = from_scalar(d, cplx(rng_check.normal(), rng_check.normal()));
      AlgebraElement q = quad_form(c, g, c);
      if (!is_positive(q, 1e-8)) throw std::invalid_argument("invalid Gram matrix");
    }
  }

  QrResult out;
  out.epsilon = epsilon;
  out.kept.assign(n, false);
  out.R = om_zero(d, n, n);
  OperatorMatrix c = om_zero(d, n, n); // columns are the q_j coefficients
  OperatorMatrix b_hat = om_zero(d, n, n);

  for (int j = 0; j < n; ++j) {
    ModuleVector chat = mv_basis(d, n, j);
    for (int i = 0; i < j; ++i) {
      if (!out.kept[i]) continue;
      // r_ij = <q_i, w_j> = C_i^* G e_j
      AlgebraElement r_ij = zero(d);
      for (int l = 0; l < n; ++l) r_ij = add(r_ij, multiply(adjoint(c.at(l, i)), g.at(l, j)));
      out.R.at(i, j) = r_ij;
      for (int l = 0; l < n; ++l)
        chat.entries[l] = sub(chat.entries[l], multiply(c.at(l, i), r_ij));
    }
    AlgebraElement m = quad_form(chat, g, chat);
    const double nrm = std::sqrt(std::max(0.0, norm(m)));
    if (nrm > epsilon) {
      // the retention cut sits two orders below the pivot threshold, so a
      // later duplicate column leaves a residual (the dropped spectral tail)
      // that falls clearly under the pivot instead of straddling it; the
      // relative floor keeps the inverted spectral range well conditioned
      const double cut = std::max(1e-4 * epsilon * epsilon, 1e-8 * nrm * nrm);
      AlgebraElement bh =
          spectral_map(m, [cut](double x) { return x > cut ? 1.0 / std::sqrt(x) : 0.0; });
      AlgebraElement b = spectral_map(m, [cut](double x) { return x > cut ? std::sqrt(x) : 0.0; });
      out.R.at(j, j) = b;
      b_hat.at(j, j) = bh;
      for (int l = 0; l < n; ++l) c.at(l, j) = multiply(chat.entries[l], bh);
      out.kept[j] = true;
    }
  }

  // R_inv = B_hat (I + (R - B) B_hat)^{-1}; the strictly upper factor is
  // nilpotent so the Neumann series is finite: inv = sum (-N)^k, k < n
  OperatorMatrix nmat = om_zero(d, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      AlgebraElement s = zero(d);
      // (R - B) has the strict upper part of R; B_hat is diagonal
      s = multiply(out.R.at(i, j), b_hat.at(j, j));
      nmat.at(i, j) = s;
    }
  OperatorMatrix inv = om_identity(d, n);
  for (int k = 0; k < n - 1; ++k) inv = om_sub(om_identity(d, n), om_mul(nmat, inv));
  out.R_inv = om_mul(b_hat, inv);
  return out;
}

ModuleVector project(const ModuleVector& u_coeffs, const QrResult& qr, const OperatorMatrix& g) {
  require(u_coeffs.size() == g.rows && qr.R_inv.rows == g.rows, "shape mismatch");
  ModuleVector gu = om_apply(g, u_coeffs);
  ModuleVector t = om_apply(om_adjoint(qr.R_inv), gu);
  return om_apply(qr.R_inv, t);
}

Eigen::MatrixXcd flatten(const OperatorMatrix& a) {
  Eigen::MatrixXcd block0 = discretize(a.at(0, 0));
  const int b = static_cast<int>(block0.rows());
  Eigen::MatrixXcd f(a.rows * b, a.cols * b);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) f.block(i * b, j * b, b, b) = discretize(a.at(i, j));
  return f;
}

} // namespace rkhm
