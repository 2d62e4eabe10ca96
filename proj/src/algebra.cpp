#include "rkhm/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rkhm {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

Eigen::VectorXd basis_at(FunctionBasis basis, int order, double t) {
  Eigen::VectorXd phi(order + 1);
  if (basis == FunctionBasis::Polynomial) {
    double p = 1.0;
    for (int j = 0; j <= order; ++j) {
      phi(j) = p;
      p *= t;
    }
  } else {
    phi(0) = 1.0;
    for (int j = 1; j <= order; ++j) {
      int k = (j + 1) / 2;
      double a = 2.0 * std::numbers::pi * k * t;
      phi(j) = (j % 2 == 1) ? std::cos(a) : std::sin(a);
    }
  }
  return phi;
}

void fill_tables(AlgebraDescriptor& d) {
  const int q = d.grid_count();
  const int nc = d.coeff_count();
  d.eval.resize(q, nc);
  for (int i = 0; i < q; ++i) d.eval.row(i) = basis_at(d.basis, d.order, d.nodes(i)).transpose();
  d.sqw = d.weights.cwiseSqrt();
  // weighted least squares through QR of sqrt(W)*B; the monomial normal
  // equations are Hilbert-matrix conditioned and unusable at N=10
  Eigen::MatrixXd wb = d.sqw.asDiagonal() * d.eval;
  d.fit = wb.colPivHouseholderQr().solve(Eigen::MatrixXd(d.sqw.asDiagonal())).eval();
  if (d.kind == AlgebraKind::IntegralOperator) {
    d.overlap.resize(nc, nc);
    for (int l = 0; l < nc; ++l)
      for (int p = 0; p < nc; ++p) d.overlap(l, p) = 1.0 / (l + p + 1);
  }
}

double sa_gate(const AlgebraElement& a, double tol) {
  return std::max(tol, 1e-9 * std::max(1.0, norm(a)));
}

struct EigPair {
  double value;
  Eigen::VectorXcd vector;
};

// descending eigenvalues; ties resolved lexicographically on the vector;
// phase fixed so the first max-magnitude entry is real positive
std::vector<EigPair> ordered_eigs(const Eigen::MatrixXcd& herm) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  require(es.info() == Eigen::Success, "eigendecomposition failed");
  const int n = static_cast<int>(herm.rows());
  std::vector<EigPair> out(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXcd v = es.eigenvectors().col(n - 1 - i);
    int arg = 0;
    double best = -1.0;
    for (int k = 0; k < v.size(); ++k)
      if (std::abs(v(k)) > best + 1e-15) {
        best = std::abs(v(k));
        arg = k;
      }
    if (best > 0.0) v *= std::conj(v(arg)) / std::abs(v(arg));
    out[i] = {es.eigenvalues()(n - 1 - i), v};
  }
  std::stable_sort(out.begin(), out.end(), [](const EigPair& a, const EigPair& b) {
    if (a.value != b.value) return a.value > b.value;
    for (int k = 0; k < a.vector.size(); ++k) {
      if (a.vector(k).real() != b.vector(k).real()) return a.vector(k).real() > b.vector(k).real();
      if (a.vector(k).imag() != b.vector(k).imag()) return a.vector(k).imag() > b.vector(k).imag();
    }
    return false;
  });
  return out;
}

AlgebraElement hermitian_part(const AlgebraElement& a) {
  return scale(add(a, adjoint(a)), 0.5);
}

} // namespace

void gauss_legendre_01(int q, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  nodes.resize(q);
  weights.resize(q);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes(i) = (1.0 - x) / 2.0;
    nodes(q - 1 - i) = (1.0 + x) / 2.0;
    weights(i) = w / 2.0;
    weights(q - 1 - i) = w / 2.0;
  }
}

Descriptor scalar_algebra() {
  auto d = std::make_shared<AlgebraDescriptor>();
  d->kind = AlgebraKind::Scalar;
  return d;
}

Descriptor matrix_algebra(int m) {
  require(m >= 1, "matrix dimension must be positive");
  auto d = std::make_shared<AlgebraDescriptor>();
  d->kind = AlgebraKind::Matrix;
  d->dim = m;
  return d;
}

Descriptor function_algebra(FunctionBasis basis, int order, int q) {
  require(order >= 0, "order must be non-negative");
  if (q <= 0) q = 4 * (order + 1);
  require(q >= order + 1, "grid too small for order");
  auto d = std::make_shared<AlgebraDescriptor>();
  d->kind = AlgebraKind::Function;
  d->basis = basis;
  d->order = order;
  gauss_legendre_01(q, d->nodes, d->weights);
  fill_tables(*d);
  return d;
}

Descriptor function_algebra_on_grid(FunctionBasis basis, int order,
                                    const Eigen::VectorXd& nodes,
                                    const Eigen::VectorXd& weights) {
  require(nodes.size() == weights.size() && nodes.size() >= order + 1, "grid too small for order");
  auto d = std::make_shared<AlgebraDescriptor>();
  d->kind = AlgebraKind::Function;
  d->basis = basis;
  d->order = order;
  d->nodes = nodes;
  d->weights = weights;
  fill_tables(*d);
  return d;
}

Descriptor operator_algebra(int order, int q) {
  require(order >= 0, "order must be non-negative");
  if (q <= 0) q = 4 * (order + 1);
  require(q >= order + 1, "grid too small for order");
  auto d = std::make_shared<AlgebraDescriptor>();
  d->kind = AlgebraKind::IntegralOperator;
  d->basis = FunctionBasis::Polynomial;
  d->order = order;
  gauss_legendre_01(q, d->nodes, d->weights);
  fill_tables(*d);
  return d;
}

bool same_algebra(const Descriptor& a, const Descriptor& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case AlgebraKind::Scalar: return true;
    case AlgebraKind::Matrix: return a->dim == b->dim;
    default:
      return a->basis == b->basis && a->order == b->order &&
             a->grid_count() == b->grid_count() && a->nodes == b->nodes;
  }
}

AlgebraElement zero(const Descriptor& d) {
  AlgebraElement a;
  a.desc = d;
  switch (d->kind) {
    case AlgebraKind::Scalar: break;
    case AlgebraKind::Matrix: a.m = Eigen::MatrixXcd::Zero(d->dim, d->dim); break;
    case AlgebraKind::Function: a.m = Eigen::MatrixXcd::Zero(d->coeff_count(), 1); break;
    case AlgebraKind::IntegralOperator:
      a.m = Eigen::MatrixXcd::Zero(d->coeff_count(), d->coeff_count());
      break;
  }
  return a;
}

AlgebraElement identity(const Descriptor& d) {
  AlgebraElement a = zero(d);
  switch (d->kind) {
    case AlgebraKind::Scalar: a.s = 1.0; break;
    case AlgebraKind::Matrix: a.m = Eigen::MatrixXcd::Identity(d->dim, d->dim); break;
    case AlgebraKind::Function: a.m(0, 0) = 1.0; break; // basis function 0 is constant 1
    case AlgebraKind::IntegralOperator: a.alpha = 1.0; break;
  }
  return a;
}

AlgebraElement from_scalar(const Descriptor& d, cplx v) { return scale(identity(d), v); }

AlgebraElement add(const AlgebraElement& a, const AlgebraElement& b) {
  require(same_algebra(a.desc, b.desc), "algebra mismatch");
  AlgebraElement r = a;
  r.s += b.s;
  r.alpha += b.alpha;
  if (r.m.size() > 0) r.m += b.m;
  return r;
}

AlgebraElement sub(const AlgebraElement& a, const AlgebraElement& b) {
  require(same_algebra(a.desc, b.desc), "algebra mismatch");
  AlgebraElement r = a;
  r.s -= b.s;
  r.alpha -= b.alpha;
  if (r.m.size() > 0) r.m -= b.m;
  return r;
}

AlgebraElement scale(const AlgebraElement& a, cplx v) {
  AlgebraElement r = a;
  r.s *= v;
  r.alpha *= v;
  if (r.m.size() > 0) r.m *= v;
  return r;
}

AlgebraElement multiply(const AlgebraElement& a, const AlgebraElement& b) {
  require(same_algebra(a.desc, b.desc), "algebra mismatch");
  const auto& d = a.desc;
  AlgebraElement r = zero(d);
  switch (d->kind) {
    case AlgebraKind::Scalar: r.s = a.s * b.s; break;
    case AlgebraKind::Matrix: r.m = a.m * b.m; break;
    case AlgebraKind::Function: {
      Eigen::VectorXcd va = d->eval * a.m.col(0);
      Eigen::VectorXcd vb = d->eval * b.m.col(0);
      r.m = d->fit * va.cwiseProduct(vb);
      break;
    }
    case AlgebraKind::IntegralOperator:
      r.alpha = a.alpha * b.alpha;
      r.m = a.alpha * b.m + b.alpha * a.m + a.m * d->overlap * b.m;
      break;
  }
  return r;
}

AlgebraElement adjoint(const AlgebraElement& a) {
  AlgebraElement r = a;
  switch (a.desc->kind) {
    case AlgebraKind::Scalar: r.s = std::conj(a.s); break;
    case AlgebraKind::Matrix: r.m = a.m.adjoint(); break;
    case AlgebraKind::Function: r.m = a.m.conjugate(); break;
    case AlgebraKind::IntegralOperator:
      r.alpha = std::conj(a.alpha);
      r.m = a.m.adjoint();
      break;
  }
  return r;
}

Eigen::VectorXcd function_values(const AlgebraElement& a) {
  require(a.desc->kind == AlgebraKind::Function, "algebra mismatch");
  return a.desc->eval * a.m.col(0);
}

AlgebraElement function_from_values(const Descriptor& d, const Eigen::VectorXcd& vals) {
  require(d->kind == AlgebraKind::Function, "algebra mismatch");
  AlgebraElement r = zero(d);
  r.m = d->fit * vals;
  return r;
}

Eigen::MatrixXcd operator_kernel_values(const AlgebraElement& a) {
  require(a.desc->kind == AlgebraKind::IntegralOperator, "algebra mismatch");
  return a.desc->eval * a.m * a.desc->eval.transpose();
}

AlgebraElement operator_from_kernel_values(const Descriptor& d, const Eigen::MatrixXcd& vals,
                                           cplx alpha) {
  require(d->kind == AlgebraKind::IntegralOperator, "algebra mismatch");
  AlgebraElement r = zero(d);
  r.m = d->fit * vals * d->fit.transpose();
  r.alpha = alpha;
  return r;
}

Eigen::MatrixXcd discretize(const AlgebraElement& a) {
  switch (a.desc->kind) {
    case AlgebraKind::Scalar: {
      Eigen::MatrixXcd r(1, 1);
      r(0, 0) = a.s;
      return r;
    }
    case AlgebraKind::Matrix: return a.m;
    case AlgebraKind::Function: return function_values(a).asDiagonal();
    case AlgebraKind::IntegralOperator: {
      const auto& d = *a.desc;
      Eigen::MatrixXcd f = d.eval * a.m * d.eval.transpose();
      Eigen::MatrixXcd r = d.sqw.asDiagonal() * f * d.sqw.asDiagonal();
      r.diagonal().array() += a.alpha;
      return r;
    }
  }
  return {};
}

double norm(const AlgebraElement& a) {
  switch (a.desc->kind) {
    case AlgebraKind::Scalar: return std::abs(a.s);
    case AlgebraKind::Matrix: return a.m.jacobiSvd().singularValues()(0);
    case AlgebraKind::Function: return function_values(a).cwiseAbs().maxCoeff();
    case AlgebraKind::IntegralOperator: return discretize(a).jacobiSvd().singularValues()(0);
  }
  return 0.0;
}

double asymmetry(const AlgebraElement& a) { return norm(sub(a, adjoint(a))); }

bool is_positive(const AlgebraElement& a, double tol) {
  require(asymmetry(a) <= sa_gate(a, tol), "not self-adjoint");
  const double cut = -tol * std::max(1.0, norm(a));
  switch (a.desc->kind) {
    case AlgebraKind::Scalar: return a.s.real() >= cut;
    case AlgebraKind::Function: return function_values(a).real().minCoeff() >= cut;
    default: {
      Eigen::MatrixXcd h = discretize(hermitian_part(a));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff() >= cut;
    }
  }
}

SpectralData spectral_decompose(const AlgebraElement& a, double threshold) {
  require(asymmetry(a) <= sa_gate(a, 1e-8), "not self-adjoint");
  const double neg_gate = -1e-8 * std::max(1.0, norm(a));
  SpectralData sd;
  sd.threshold = threshold;
  if (a.desc->kind == AlgebraKind::Function) {
    Eigen::VectorXcd vals = function_values(a);
    const int q = static_cast<int>(vals.size());
    std::vector<int> idx(q);
    for (int i = 0; i < q; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int i, int j) { return vals(i).real() > vals(j).real(); });
    sd.eigenvalues.resize(q);
    sd.eigenvectors = Eigen::MatrixXcd::Zero(q, q);
    for (int i = 0; i < q; ++i) {
      sd.eigenvalues(i) = vals(idx[i]).real();
      sd.eigenvectors(idx[i], i) = 1.0;
    }
  } else if (a.desc->kind == AlgebraKind::Scalar) {
    sd.eigenvalues.resize(1);
    sd.eigenvalues(0) = a.s.real();
    sd.eigenvectors = Eigen::MatrixXcd::Ones(1, 1);
  } else {
    auto eigs = ordered_eigs(discretize(hermitian_part(a)));
    const int n = static_cast<int>(eigs.size());
    sd.eigenvalues.resize(n);
    sd.eigenvectors.resize(eigs[0].vector.size(), n);
    for (int i = 0; i < n; ++i) {
      sd.eigenvalues(i) = eigs[i].value;
      sd.eigenvectors.col(i) = eigs[i].vector;
    }
  }
  require(sd.eigenvalues.minCoeff() >= neg_gate, "not positive");
  for (int i = 0; i < sd.eigenvalues.size(); ++i)
    if (sd.eigenvalues(i) < 0.0) sd.eigenvalues(i) = 0.0;
  sd.retained = static_cast<int>((sd.eigenvalues.array() > threshold).count());
  return sd;
}

AlgebraElement spectral_map(const AlgebraElement& a, const std::function<double(double)>& g) {
  const auto& d = a.desc;
  switch (d->kind) {
    case AlgebraKind::Scalar: return from_scalar(d, g(a.s.real()));
    case AlgebraKind::Matrix: {
      auto eigs = ordered_eigs(hermitian_part(a).m);
      AlgebraElement r = zero(d);
      for (const auto& e : eigs) r.m += g(e.value) * (e.vector * e.vector.adjoint());
      return r;
    }
    case AlgebraKind::Function: {
      Eigen::VectorXcd vals = function_values(a);
      Eigen::VectorXcd out(vals.size());
      for (int i = 0; i < vals.size(); ++i) out(i) = g(vals(i).real());
      return function_from_values(d, out);
    }
    case AlgebraKind::IntegralOperator: {
      // spectrum of alpha*I + H is alpha + spec(H) plus alpha on the
      // complement, so g(a) = g(alpha)*I + sum (g(alpha+l) - g(alpha)) v v*
      const double ar = a.alpha.real();
      AlgebraElement h = hermitian_part(a);
      Eigen::MatrixXcd f = d->eval * h.m * d->eval.transpose();
      Eigen::MatrixXcd dh = d->sqw.asDiagonal() * f * d->sqw.asDiagonal();
      dh = (dh + dh.adjoint()).eval() / 2.0;
      auto eigs = ordered_eigs(dh);
      const int q = d->grid_count();
      Eigen::MatrixXcd fvals = Eigen::MatrixXcd::Zero(q, q);
      for (const auto& e : eigs) {
        double c = g(ar + e.value) - g(ar);
        if (c == 0.0) continue;
        Eigen::VectorXcd vt = e.vector.cwiseQuotient(d->sqw.cast<cplx>());
        fvals += c * (vt * vt.adjoint());
      }
      return operator_from_kernel_values(d, fvals, g(ar));
    }
  }
  return zero(d);
}

AlgebraElement sqrt_positive(const AlgebraElement& a) {
  require(asymmetry(a) <= sa_gate(a, 1e-8), "not self-adjoint");
  require(is_positive(a, 1e-8), "not positive");
  return spectral_map(a, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

AlgebraElement shifted_inverse(const AlgebraElement& a, double eps) {
  require(eps > 0.0, "epsilon must be positive");
  return spectral_map(a, [eps](double x) { return 1.0 / (std::max(x, 0.0) + eps); });
}

cplx hs_inner(const AlgebraElement& a, const AlgebraElement& b) {
  require(same_algebra(a.desc, b.desc), "algebra mismatch");
  switch (a.desc->kind) {
    case AlgebraKind::Scalar: return std::conj(a.s) * b.s;
    case AlgebraKind::Matrix: return (a.m.adjoint() * b.m).trace();
    case AlgebraKind::Function: {
      Eigen::VectorXcd va = function_values(a), vb = function_values(b);
      return (va.conjugate().cwiseProduct(vb).transpose() * a.desc->weights.cast<cplx>())(0);
    }
    case AlgebraKind::IntegralOperator: {
      double s = std::max(1.0, a.m.norm() + b.m.norm());
      require(std::abs(a.alpha) + std::abs(b.alpha) <= 1e-10 * s,
              "identity channel has no Hilbert-Schmidt pairing");
      const auto& t = a.desc->overlap;
      return a.m.conjugate().cwiseProduct(t * b.m * t).sum();
    }
  }
  return 0.0;
}

cplx trace(const AlgebraElement& a) {
  switch (a.desc->kind) {
    case AlgebraKind::Scalar: return a.s;
    case AlgebraKind::Matrix: return a.m.trace();
    case AlgebraKind::Function:
      return (function_values(a).transpose() * a.desc->weights.cast<cplx>())(0);
    case AlgebraKind::IntegralOperator: {
      require(std::abs(a.alpha) <= 1e-10 * std::max(1.0, a.m.norm()),
              "identity channel has no finite trace");
      return a.m.cwiseProduct(a.desc->overlap).sum();
    }
  }
  return 0.0;
}

} // namespace rkhm
