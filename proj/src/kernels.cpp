#include "rkhm/kernels.hpp"

#include "rkhm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rkhm {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double horner(const Eigen::MatrixXd& coeffs, int row, double t) {
  double v = 0.0;
  for (int j = static_cast<int>(coeffs.cols()) - 1; j >= 0; --j) v = v * t + coeffs(row, j);
  return v;
}

} // namespace

Sample point_sample(const Eigen::VectorXd& x) {
  Sample s;
  s.form = Sample::Form::Point;
  s.point = x.cast<cplx>();
  return s;
}

Sample point_sample_c(const Eigen::VectorXcd& x) {
  Sample s;
  s.form = Sample::Form::Point;
  s.point = x;
  return s;
}

Sample univariate_sample(const Eigen::MatrixXd& channel_coeffs) {
  Sample s;
  s.form = Sample::Form::UnivariateFn;
  s.uni = channel_coeffs;
  return s;
}

Sample bivariate_sample(const Eigen::MatrixXd& coeffs) {
  Sample s;
  s.form = Sample::Form::BivariateFn;
  s.bi = coeffs;
  return s;
}

Sample grid_sample(const Eigen::VectorXd& values) {
  Sample s;
  s.form = Sample::Form::GridFn;
  s.grid = values;
  return s;
}

double eval_univariate(const Sample& s, int channel, double t) {
  return horner(s.uni, channel, t);
}

double eval_bivariate(const Sample& s, double x, double y) {
  double v = 0.0;
  for (int j = static_cast<int>(s.bi.rows()) - 1; j >= 0; --j) {
    double row = 0.0;
    for (int l = static_cast<int>(s.bi.cols()) - 1; l >= 0; --l) row = row * y + s.bi(j, l);
    v = v * x + row;
  }
  return v;
}

double scalar_kernel_point(const ScalarKernel& k, double x, double y) {
  double d = std::abs(x - y);
  return k.base == ScalarKernel::Base::Gaussian ? std::exp(-k.gamma * d * d)
                                                : std::exp(-k.gamma * d);
}

double scalar_kernel(const ScalarKernel& k, const Sample& x, const Sample& y) {
  require(x.form == y.form, "incompatible sample pair");
  double d2 = 0.0, d1 = 0.0;
  switch (x.form) {
    case Sample::Form::Point: {
      require(x.point.size() == y.point.size(), "incompatible sample pair");
      for (int i = 0; i < x.point.size(); ++i) {
        double d = std::abs(x.point(i) - y.point(i));
        d2 += d * d;
        d1 += d;
      }
      break;
    }
    case Sample::Form::GridFn: {
      require(x.grid.size() == y.grid.size(), "incompatible sample pair");
      for (int i = 0; i < x.grid.size(); ++i) {
        double d = std::abs(x.grid(i) - y.grid(i));
        d2 += d * d;
        d1 += d;
      }
      break;
    }
    case Sample::Form::UnivariateFn: {
      // L2([0,1]) distance, exact on the monomial coefficients
      require(x.uni.rows() == y.uni.rows(), "incompatible sample pair");
      const int deg = static_cast<int>(std::max(x.uni.cols(), y.uni.cols()));
      Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(x.uni.rows(), deg);
      diff.leftCols(x.uni.cols()) = x.uni;
      diff.leftCols(y.uni.cols()) -= y.uni;
      for (int c = 0; c < diff.rows(); ++c)
        for (int j = 0; j < diff.cols(); ++j)
          for (int l = 0; l < diff.cols(); ++l) d2 += diff(c, j) * diff(c, l) / (j + l + 1);
      d2 = std::max(0.0, d2);
      d1 = std::sqrt(d2);
      break;
    }
    case Sample::Form::BivariateFn: {
      // L2([0,1]^2) distance from bivariate coefficients
      Eigen::MatrixXd diff = x.bi - y.bi;
      const int n = static_cast<int>(diff.rows());
      Eigen::MatrixXd t(n, n);
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) t(j, l) = 1.0 / (j + l + 1);
      d2 = std::max(0.0, diff.cwiseProduct(t * diff * t).sum());
      d1 = std::sqrt(d2);
      break;
    }
  }
  return k.base == ScalarKernel::Base::Gaussian ? std::exp(-k.gamma * d2)
                                                : std::exp(-k.gamma * d1);
}

AlgebraElement eval_kernel(const KernelSpec& spec, const Sample& x, const Sample& y) {
  const Descriptor& d = spec.target;
  switch (spec.variant) {
    case KernelSpec::Variant::ScalarTimesIdentity:
      return from_scalar(d, scalar_kernel(spec.base, x, y));

    case KernelSpec::Variant::FunctionalMoment: {
      require(d->kind == AlgebraKind::Function && d->order >= 2 &&
                  d->basis == FunctionBasis::Polynomial,
              "algebra mismatch");
      require(x.form == Sample::Form::GridFn && y.form == Sample::Form::GridFn,
              "incompatible sample pair");
      const auto& w = spec.input_weights;
      require(w.size() == x.grid.size() && w.size() == y.grid.size(),
              "incompatible sample pair");
      double xy = 0.0, xs = 0.0, ys = 0.0, vol = 0.0;
      for (int i = 0; i < w.size(); ++i) {
        xy += w(i) * x.grid(i) * y.grid(i);
        xs += w(i) * x.grid(i);
        ys += w(i) * y.grid(i);
        vol += w(i);
      }
      AlgebraElement r = zero(d);
      r.m(0, 0) = xy;
      r.m(1, 0) = -(xs + ys);
      r.m(2, 0) = vol;
      return r;
    }

    case KernelSpec::Variant::PointwiseFunction: {
      require(d->kind == AlgebraKind::Function, "algebra mismatch");
      require(x.form == Sample::Form::UnivariateFn && y.form == Sample::Form::UnivariateFn,
              "incompatible sample pair");
      require(x.uni.rows() == y.uni.rows(), "incompatible sample pair");
      const int q = d->grid_count();
      const int ch = static_cast<int>(x.uni.rows());
      Eigen::VectorXcd vals(q);
      for (int i = 0; i < q; ++i) {
        double t = d->nodes(i);
        double d2 = 0.0, d1 = 0.0;
        for (int c = 0; c < ch; ++c) {
          double dd = std::abs(horner(x.uni, c, t) - horner(y.uni, c, t));
          d2 += dd * dd;
          d1 += dd;
        }
        vals(i) = spec.base.base == ScalarKernel::Base::Gaussian
                      ? std::exp(-spec.base.gamma * d2)
                      : std::exp(-spec.base.gamma * d1);
      }
      return function_from_values(d, vals);
    }

    case KernelSpec::Variant::DiagonalMatrix: {
      require(d->kind == AlgebraKind::Matrix &&
                  static_cast<int>(spec.diag.size()) == d->dim,
              "algebra mismatch");
      AlgebraElement r = zero(d);
      for (int i = 0; i < d->dim; ++i) r.m(i, i) = scalar_kernel(spec.diag[i], x, y);
      return r;
    }

    case KernelSpec::Variant::IntegralOperatorKernel: {
      require(d->kind == AlgebraKind::IntegralOperator, "algebra mismatch");
      require(x.form == Sample::Form::UnivariateFn && y.form == Sample::Form::UnivariateFn,
              "incompatible sample pair");
      const int q = d->grid_count();
      Eigen::MatrixXcd vals(q, q);
      for (int a = 0; a < q; ++a) {
        double xs = horner(x.uni, 0, d->nodes(a));
        for (int b = 0; b < q; ++b)
          vals(a, b) = scalar_kernel_point(spec.base, xs, horner(y.uni, 0, d->nodes(b)));
      }
      return operator_from_kernel_values(d, vals, 0.0);
    }

    case KernelSpec::Variant::QuantumState: {
      require(d->kind == AlgebraKind::Matrix, "algebra mismatch");
      require(x.form == Sample::Form::Point && y.form == Sample::Form::Point &&
                  x.point.size() == d->dim && y.point.size() == d->dim,
              "incompatible sample pair");
      AlgebraElement r = zero(d);
      // |x><x|y><y| = (x^* y) x y^*
      cplx ip = x.point.adjoint() * y.point;
      r.m = ip * (x.point * y.point.adjoint());
      return r;
    }
  }
  return zero(d);
}

void check_gram_psd(const OperatorMatrix& g) {
  const int n = g.rows;
  double scale_g = 0.0;
  for (int i = 0; i < n; ++i) scale_g = std::max(scale_g, norm(g.at(i, i)));
  Rng rng(0x6b65726eULL);
  for (int rep = 0; rep < 20; ++rep) {
    ModuleVector c = mv_zero(g.desc, n);
    for (int i = 0; i < n; ++i)
      c.entries[i] = from_scalar(g.desc, cplx(rng.normal(), rng.normal()));
    AlgebraElement q = quad_form(c, g, c);
    if (!is_positive(q, 1e-6 * std::max(1.0, scale_g)))
      throw std::invalid_argument("kernel not PSD at given truncation");
  }
}

OperatorMatrix gram(const KernelSpec& spec, const std::vector<Sample>& samples) {
  require(!samples.empty(), "need at least one sample");
  const int n = static_cast<int>(samples.size());
  OperatorMatrix g = om_zero(spec.target, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      g.at(i, j) = eval_kernel(spec, samples[i], samples[j]);
      if (j != i) g.at(j, i) = adjoint(g.at(i, j));
    }
  g.hermitian_flag = true;
  check_gram_psd(g);
  return g;
}

AlgebraElement rkhm_eval(const KernelSpec& spec, const std::vector<Sample>& basis,
                         const ModuleVector& coeffs, const Sample& x) {
  require(static_cast<int>(basis.size()) == coeffs.size(), "shape mismatch");
  AlgebraElement v = zero(spec.target);
  for (size_t i = 0; i < basis.size(); ++i)
    v = add(v, multiply(eval_kernel(spec, x, basis[i]), coeffs.entries[i]));
  return v;
}

} // namespace rkhm
