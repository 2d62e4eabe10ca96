#include "rkhm/koopman.hpp"

#include "rkhm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rkhm {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

OperatorMatrix leading_block(const OperatorMatrix& g, int t) {
  OperatorMatrix b = om_zero(g.desc, t, t);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) b.at(i, j) = g.at(i, j);
  b.hermitian_flag = g.hermitian_flag;
  return b;
}

} // namespace

PfModel estimate_pf(const KernelSpec& spec, const std::vector<Sample>& series, double epsilon) {
  require(series.size() >= 2, "need at least two samples");
  const int t = static_cast<int>(series.size()) - 1;

  PfModel model;
  model.samples = series;
  model.epsilon = epsilon;
  model.gram_full = gram(spec, series);
  OperatorMatrix g = leading_block(model.gram_full, t);
  model.qr = gram_schmidt_qr(g, epsilon);

  OperatorMatrix shifted = om_zero(g.desc, t, t); // <phi(x_i), phi(x_{j+1})>
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) shifted.at(i, j) = model.gram_full.at(i, j + 1);
  model.K_T = om_mul(om_adjoint(model.qr.R_inv), om_mul(shifted, model.qr.R_inv));
  return model;
}

std::vector<ModuleVector> pf_eig1(const PfModel& model, double lambda, double eta, int iters) {
  require(lambda > 0 && lambda < 1, "lambda must lie in (0,1)");
  require(eta > 0 && iters > 0, "bad descent parameters");
  const int t = model.horizon();
  const Descriptor& d = model.K_T.desc;

  // M = K*K - K* - K + (1 - lambda) I, so v* M v = ||Kv - v||^2 - lambda ||v||^2
  OperatorMatrix ka = om_adjoint(model.K_T);
  OperatorMatrix m = om_mul(ka, model.K_T);
  m = om_sub(m, ka);
  m = om_sub(m, model.K_T);
  OperatorMatrix shift = om_scale(om_identity(d, t), 1.0 - lambda);
  m = om_add(m, shift);

  std::vector<ModuleVector> starts;
  starts.push_back(mv_basis(d, t, 0));
  {
    ModuleVector u = mv_zero(d, t);
    for (int i = 0; i < t; ++i) u.entries[i] = from_scalar(d, 1.0 / std::sqrt(double(t)));
    starts.push_back(u);
  }
  {
    Rng rng(0x7066656967ULL);
    ModuleVector u = mv_zero(d, t);
    for (int i = 0; i < t; ++i) u.entries[i] = from_scalar(d, cplx(rng.normal(), 0.0));
    starts.push_back(u);
  }

  const double accept = 10.0 * std::sqrt(lambda);
  std::vector<ModuleVector> found;
  for (const auto& start : starts) {
    ModuleVector v = start;
    double nv = module_norm(v);
    if (nv < 1e-14) continue;
    for (auto& e : v.entries) e = scale(e, 1.0 / nv);
    for (int it = 0; it < iters; ++it) {
      ModuleVector mv = om_apply(m, v);
      for (int i = 0; i < t; ++i) v.entries[i] = sub(v.entries[i], scale(mv.entries[i], eta));
      nv = module_norm(v);
      if (!std::isfinite(nv) || nv > 1e12) throw std::runtime_error("step too large");
      if ((it + 1) % 10 == 0) {
        if (nv < 1e-14) break;
        for (auto& e : v.entries) e = scale(e, 1.0 / nv);
      }
    }
    nv = module_norm(v);
    if (nv < 1e-14) continue;
    ModuleVector kv = om_apply(model.K_T, v);
    double res = module_norm(mv_sub(kv, v)) / nv;
    if (res < accept) {
      for (auto& e : v.entries) e = scale(e, 1.0 / nv);
      found.push_back(v);
    }
  }
  return found;
}

ModeDecomposition mode_decompose(const PfModel& model, const std::vector<ModuleVector>& eig_vecs) {
  require(!eig_vecs.empty(), "eig_vecs empty");
  const int t = model.horizon();
  const int k = static_cast<int>(eig_vecs.size());
  const Descriptor& d = model.K_T.desc;
  OperatorMatrix g = leading_block(model.gram_full, t);

  // orthonormalize the candidate vectors against the module inner product
  OperatorMatrix small = om_zero(d, k, k);
  std::vector<ModuleVector> gv(eig_vecs.size());
  for (int j = 0; j < k; ++j) gv[j] = om_apply(g, eig_vecs[j]);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) small.at(i, j) = inner(eig_vecs[i], gv[j]);
  small.hermitian_flag = true;
  QrResult qr = gram_schmidt_qr(small, model.epsilon);
  bool any = false;
  for (bool kept : qr.kept) any = any || kept;
  require(any, "all eigenvectors degenerate");

  std::vector<ModuleVector> basis;
  for (int j = 0; j < k; ++j) {
    ModuleVector z = mv_zero(d, t);
    for (int i = 0; i < k; ++i)
      for (int l = 0; l < t; ++l)
        z.entries[l] = add(z.entries[l], multiply(eig_vecs[i].entries[l], qr.R_inv.at(i, j)));
    basis.push_back(std::move(z));
  }

  ModuleVector col0 = mv_zero(d, t); // <phi(x_i), phi(x_0)>
  for (int i = 0; i < t; ++i) col0.entries[i] = model.gram_full.at(i, 0);

  ModeDecomposition out;
  out.gram_full = model.gram_full;
  out.v = mv_zero(d, t);
  for (int j = 0; j < k; ++j) {
    AlgebraElement w = zero(d); // <q_j, phi(x_0)>
    for (int l = 0; l < t; ++l)
      w = add(w, multiply(adjoint(basis[j].entries[l]), col0.entries[l]));
    for (int l = 0; l < t; ++l)
      out.v.entries[l] = add(out.v.entries[l], multiply(basis[j].entries[l], w));
  }
  out.invariant_term = quad_form(out.v, g, out.v);
  return out;
}

AlgebraElement ModeDecomposition::residual(int alpha, int beta) const {
  return sub(gram_full.at(alpha, beta), invariant_term);
}

AlgebraElement predict_similarity(const PfModel& model, int alpha, int beta) {
  require(alpha >= 0 && beta >= 0, "negative time index");
  const int t = model.horizon();
  const Descriptor& d = model.K_T.desc;

  ModuleVector col0 = mv_zero(d, t);
  for (int i = 0; i < t; ++i) col0.entries[i] = model.gram_full.at(i, 0);
  ModuleVector q0 = om_apply(om_adjoint(model.qr.R_inv), col0);

  OperatorMatrix g = leading_block(model.gram_full, t);
  OperatorMatrix j = om_mul(om_adjoint(model.qr.R_inv), om_mul(g, model.qr.R_inv));

  ModuleVector a = q0;
  for (int i = 0; i < alpha; ++i) a = om_apply(model.K_T, a);
  ModuleVector b = q0;
  for (int i = 0; i < beta; ++i) b = om_apply(model.K_T, b);
  return quad_form(a, j, b);
}

} // namespace rkhm
