#include "rkhm/experiments.hpp"

#include "rkhm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace rkhm {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double jget(const json& j, const char* key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

int jget(const json& j, const char* key, int dflt) {
  return j.contains(key) ? j.at(key).get<int>() : dflt;
}

std::string jget(const json& j, const char* key, const std::string& dflt) {
  return j.contains(key) ? j.at(key).get<std::string>() : dflt;
}

AlgebraElement random_element(const Descriptor& d, Rng& rng, bool low_degree) {
  AlgebraElement a = zero(d);
  switch (d->kind) {
    case AlgebraKind::Scalar:
      a.s = cplx(rng.normal(), rng.normal());
      break;
    case AlgebraKind::Matrix:
      for (int i = 0; i < d->dim; ++i)
        for (int j = 0; j < d->dim; ++j) a.m(i, j) = cplx(rng.normal(), rng.normal());
      break;
    case AlgebraKind::Function: {
      const int top = low_degree ? d->order / 2 : d->order;
      for (int j = 0; j <= top; ++j) a.m(j, 0) = cplx(rng.normal(), rng.normal());
      break;
    }
    case AlgebraKind::IntegralOperator: {
      a.alpha = cplx(rng.normal(), rng.normal());
      for (int i = 0; i < d->coeff_count(); ++i)
        for (int j = 0; j < d->coeff_count(); ++j) a.m(i, j) = cplx(rng.normal(), rng.normal());
      break;
    }
  }
  return a;
}

// entries shallow in degree so that quadratic expressions stay representable
AlgebraElement random_module_entry(const Descriptor& d, Rng& rng) {
  if (d->kind != AlgebraKind::Function) return random_element(d, rng, true);
  AlgebraElement a = zero(d);
  const int top = std::max(1, d->order / 4);
  for (int j = 0; j <= top; ++j) a.m(j, 0) = cplx(rng.normal(), rng.normal());
  return a;
}

struct SuiteResult {
  double cstar = 0, involution = 0, submult = 0, product_adjoint = 0;
  double inner_linear = 0, inner_adjoint = 0;
  int positivity_fail = 0, cauchy_schwarz_fail = 0;
};

SuiteResult run_property_suite(const Descriptor& d, Rng& rng, int instances) {
  SuiteResult r;
  for (int it = 0; it < instances; ++it) {
    AlgebraElement a = random_element(d, rng, true);
    AlgebraElement b = random_element(d, rng, true);
    double na = norm(a), nb = norm(b);
    r.cstar = std::max(r.cstar,
                       std::abs(norm(multiply(adjoint(a), a)) - na * na) / std::max(1.0, na * na));
    r.involution = std::max(r.involution, norm(sub(adjoint(adjoint(a)), a)) / std::max(1.0, na));
    AlgebraElement ab = multiply(a, b);
    r.submult =
        std::max(r.submult, std::max(0.0, norm(ab) - na * nb) / std::max(1.0, na * nb));
    r.product_adjoint =
        std::max(r.product_adjoint,
                 norm(sub(adjoint(ab), multiply(adjoint(b), adjoint(a)))) / std::max(1.0, na * nb));

    const int n = 3;
    ModuleVector u = mv_zero(d, n), v = mv_zero(d, n);
    for (int i = 0; i < n; ++i) {
      u.entries[i] = random_module_entry(d, rng);
      v.entries[i] = random_module_entry(d, rng);
    }
    AlgebraElement c = random_module_entry(d, rng);
    AlgebraElement uv = inner(u, v);
    double scale_uv = std::max(1.0, norm(uv) * norm(c));
    r.inner_linear = std::max(
        r.inner_linear, norm(sub(inner(u, mv_rmul(v, c)), multiply(uv, c))) / scale_uv);
    r.inner_adjoint =
        std::max(r.inner_adjoint, norm(sub(adjoint(uv), inner(v, u))) / std::max(1.0, norm(uv)));
    AlgebraElement uu = inner(u, u);
    if (!is_positive(uu, 1e-8)) ++r.positivity_fail;
    AlgebraElement lhs = multiply(inner(v, u), uv); // <u,v>* <u,v>
    AlgebraElement rhs = scale(inner(v, v), norm(uu));
    if (!is_positive(sub(rhs, lhs), 1e-6)) ++r.cauchy_schwarz_fail;
  }
  return r;
}

json suite_to_json(const SuiteResult& r, double tol) {
  json j;
  j["cstar_identity_max"] = r.cstar;
  j["involution_max"] = r.involution;
  j["submultiplicative_excess"] = r.submult;
  j["product_adjoint_max"] = r.product_adjoint;
  j["inner_linearity_max"] = r.inner_linear;
  j["inner_adjoint_max"] = r.inner_adjoint;
  j["positivity_failures"] = r.positivity_fail;
  j["cauchy_schwarz_failures"] = r.cauchy_schwarz_fail;
  bool pass = r.cstar <= tol && r.involution <= tol && r.submult <= tol &&
              r.product_adjoint <= tol && r.inner_linear <= tol && r.inner_adjoint <= tol &&
              r.positivity_fail == 0 && r.cauchy_schwarz_fail == 0;
  j["pass"] = pass;
  return j;
}

ExperimentReport run_selftest(const ExperimentConfig& cfg) {
  const int instances = jget(cfg.params, "instances", 25);
  ExperimentReport rep;
  Rng rng(cfg.seed);
  struct Case {
    const char* name;
    Descriptor d;
    double tol;
  };
  std::vector<Case> cases = {
      {"scalar", scalar_algebra(), 1e-6},
      {"matrix2", matrix_algebra(2), 1e-6},
      {"matrix3", matrix_algebra(3), 1e-6},
      {"function_n10", function_algebra(FunctionBasis::Polynomial, 10), 1e-3},
      {"operator_n5", operator_algebra(5), 1e-3},
  };
  bool all = true;
  for (const auto& c : cases) {
    SuiteResult r = run_property_suite(c.d, rng, instances);
    json j = suite_to_json(r, c.tol);
    all = all && j["pass"].get<bool>();
    rep.summary["suites"][c.name] = j;
  }
  rep.summary["pass"] = all;
  rep.ok = all;
  return rep;
}

// ---------------------------------------------------------------- functional PCA

double bivariate_base(int cls, double s, double t) {
  switch (cls) {
    case 0: return std::exp(10.0 * (s - t));
    case 1: return 10.0 * s * t;
    default: return std::cos(10.0 * (s - t));
  }
}

ExperimentReport run_pca_functional(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const int per_class = jget(p, "per_class", 20);
  const int gpts = jget(p, "input_grid", 11);
  const double sigma = jget(p, "noise_sigma", 0.3);
  const int order = jget(p, "order", 10);
  PcaConfig pc;
  pc.rank = 1;
  pc.lambda = jget(p, "lambda", 0.1);
  pc.eta = jget(p, "eta", 0.01);
  pc.max_iters = jget(p, "max_iters", 100);
  pc.epsilon = jget(p, "epsilon", 1e-6);

  Rng rng(cfg.seed);
  Eigen::VectorXd w1(gpts);
  const double h = 1.0 / (gpts - 1);
  for (int i = 0; i < gpts; ++i) w1(i) = (i == 0 || i == gpts - 1) ? h / 2 : h;
  Eigen::VectorXd wflat(gpts * gpts);
  std::vector<Sample> samples;
  std::vector<int> cls;
  for (int a = 0; a < gpts; ++a)
    for (int b = 0; b < gpts; ++b) wflat(a * gpts + b) = w1(a) * w1(b);
  for (int c = 0; c < 3; ++c)
    for (int j = 0; j < per_class; ++j) {
      Eigen::VectorXd v(gpts * gpts);
      for (int a = 0; a < gpts; ++a)
        for (int b = 0; b < gpts; ++b)
          v(a * gpts + b) = bivariate_base(c, a * h, b * h) + sigma * rng.normal();
      samples.push_back(grid_sample(v));
      cls.push_back(c);
    }
  const int n = static_cast<int>(samples.size());

  Descriptor d = function_algebra(FunctionBasis::Polynomial, order);
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::FunctionalMoment;
  spec.target = d;
  spec.input_weights = wflat;
  OperatorMatrix g = gram(spec, samples);

  // rescale the kernel so the default step size is stable: divide by the
  // largest grid-pointwise eigenvalue of [G_ij(t)]
  const int q = d->grid_count();
  std::vector<Eigen::VectorXcd> gvals(g.data.size());
  for (size_t i = 0; i < g.data.size(); ++i) gvals[i] = function_values(g.data[i]);
  double zscale = 0.0;
  for (int node = 0; node < q; ++node) {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = gvals[static_cast<size_t>(i) * n + j](node);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
    zscale = std::max(zscale, es.eigenvalues().maxCoeff());
  }
  require(zscale > 0, "degenerate Gram scale");
  g = om_scale(g, 1.0 / zscale);

  PcaModel model = fit_pca_gd(g, pc);
  model.samples = samples;

  const auto& tr = model.objective_trace[0];
  ExperimentReport rep;
  CsvTable obj;
  obj.headers = {"iter", "t", "value"};
  for (size_t it = 0; it < tr.size(); ++it) {
    Eigen::VectorXcd fv = function_values(tr[it]);
    for (int node = 0; node < q; ++node)
      obj.rows.push_back({double(it), d->nodes(node), fv(node).real()});
  }
  rep.tables.push_back({"objective", obj});

  int early_violations = 0, total_violations = 0;
  double min_margin = 1e300;
  for (size_t it = 0; it + 1 < tr.size(); ++it) {
    Eigen::VectorXcd a = function_values(tr[it]);
    Eigen::VectorXcd b = function_values(tr[it + 1]);
    double worst = 1e300;
    for (int node = 0; node < q; ++node) worst = std::min(worst, (a(node) - b(node)).real());
    if (worst < -1e-9) {
      ++total_violations;
      if (it < 10) ++early_violations;
    }
    if (it < 10) min_margin = std::min(min_margin, worst);
  }
  double d10 = tr.size() > 9 ? norm(sub(tr[9], tr[8])) : 0.0;
  double d1 = tr.size() > 1 ? norm(sub(tr[1], tr[0])) : 0.0;
  bool flattening = tr.size() > 9 && d10 < d1;

  OperatorMatrix w = training_weights(model);
  CsvTable wt;
  wt.headers = {"sample_id", "class_id", "t", "value"};
  std::vector<Eigen::VectorXcd> wv(n);
  for (int i = 0; i < n; ++i) {
    wv[i] = function_values(w.at(0, i));
    for (int node = 0; node < q; ++node)
      wt.rows.push_back({double(i), double(cls[i]), d->nodes(node), wv[i](node).real()});
  }
  rep.tables.push_back({"weights", wt});

  double within = 0, between = 0;
  int cw = 0, cb = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double acc = 0;
      for (int node = 0; node < q; ++node)
        acc += d->weights(node) * std::norm(wv[i](node) - wv[j](node));
      double dist = std::sqrt(acc);
      if (cls[i] == cls[j]) {
        within += dist;
        ++cw;
      } else {
        between += dist;
        ++cb;
      }
    }
  within /= cw;
  between /= cb;

  rep.summary["gram_scale"] = zscale;
  rep.summary["iterations"] = tr.size() - 1;
  rep.summary["early_decrease_margin"] = min_margin;
  rep.summary["early_violations"] = early_violations;
  rep.summary["total_violations"] = total_violations;
  rep.summary["flattening"] = flattening;
  rep.summary["step_norm_first"] = d1;
  rep.summary["step_norm_late"] = d10;
  rep.summary["within_class_distance"] = within;
  rep.summary["between_class_distance"] = between;
  rep.summary["separated"] = within < between;
  rep.ok = early_violations == 0 && flattening && within < between;
  rep.summary["pass"] = rep.ok;
  return rep;
}

// ---------------------------------------------------------------- trace PCA

ExperimentReport run_pca_trace(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const int m = jget(p, "dim", 2);
  const int n = jget(p, "samples", 5);
  const int r = jget(p, "rank", 2);
  const int trials = jget(p, "trials", 20);
  require(r >= 1 && r <= m * n, "rank exceeds flattened dimension");

  Descriptor d = matrix_algebra(m);
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::DiagonalMatrix;
  spec.target = d;
  for (int i = 0; i < m; ++i)
    spec.diag.push_back({ScalarKernel::Base::Gaussian, 0.5 + 0.5 * i});

  Rng rng(cfg.seed);
  double max_err = 0.0;
  CsvTable ev;
  ev.headers = {"trial", "axis", "eigenvalue"};
  for (int t = 0; t < trials; ++t) {
    std::vector<Sample> pts;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd x(3);
      for (int k = 0; k < 3; ++k) x(k) = rng.normal();
      pts.push_back(point_sample(x));
    }
    OperatorMatrix g = gram(spec, pts);
    PcaModel model = fit_pca_trace(g, r);
    for (int j = 0; j < r; ++j) ev.rows.push_back({double(t), double(j), model.eigenvalues(j)});

    Eigen::MatrixXcd flat = flatten(g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (flat + flat.adjoint()));
    Eigen::VectorXd evals = es.eigenvalues().reverse();
    double oracle = evals.sum() - evals.head(r).sum();
    double got = std::real(trace(reconstruction_error(g, model)));
    max_err = std::max(max_err, std::abs(got - oracle));
  }
  ExperimentReport rep;
  rep.tables.push_back({"eigenvalues", ev});
  rep.summary["trials"] = trials;
  rep.summary["max_reconstruction_error_gap"] = max_err;
  rep.ok = max_err <= 1e-8;
  rep.summary["pass"] = rep.ok;
  return rep;
}

// ---------------------------------------------------------------- koopman

Eigen::MatrixXd series_function(const std::string& kind, int tau) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, 4);
  auto set = [&c](double a0, double a1, double a2, double a3) {
    c(0, 0) = a0;
    c(0, 1) = a1;
    c(0, 2) = a2;
    c(0, 3) = a3;
  };
  // profiles occupy disjoint value ranges with matched slopes: under a narrow
  // Gaussian kernel their features are then nearly orthogonal while the
  // whitened transfer matrix stays bounded
  if (kind == "periodic2") {
    if (tau % 2 == 0)
      set(0.2, 0.6, 0.0, 0.0);
    else
      set(1.6, 0.6, -0.05, 0.0);
  } else if (kind == "periodic3") {
    switch (tau % 3) {
      case 0: set(0.2, 0.6, 0.0, 0.0); break;
      case 1: set(1.6, 0.6, -0.05, 0.0); break;
      default: set(-1.1, 0.6, 0.0, 0.05); break;
    }
  } else { // contracting toward a fixed profile
    double rho = std::pow(0.6, tau);
    set(0.5 + rho * (0.2 - 0.5), 0.1 + rho * (0.6 - 0.1), 0.0, rho * 0.3);
  }
  return c;
}

ExperimentReport run_koopman(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const std::string kind = jget(p, "series", std::string("periodic3"));
  const int steps = jget(p, "length", 9); // T + 1 samples
  const int order = jget(p, "order", 5);
  // rank cutoff sits above the duplicate-column noise floor of the operator
  // arithmetic and below the separation of distinct profiles; the contracting
  // series has a long tail of near-duplicates, so its default cutoff is
  // coarser and compresses the tail onto the dominant direction
  const double epsilon = jget(p, "epsilon", kind == "contracting" ? 5e-2 : 1e-3);
  const double lambda = jget(p, "lambda", 0.01);
  const double eta = jget(p, "eta", 0.1);
  const int iters = jget(p, "iters", 300);
  const int hm = jget(p, "heatmap_grid", 21);
  require(steps >= 2, "length must be at least 2");

  Descriptor d = operator_algebra(order);
  KernelSpec spec;
  spec.variant = KernelSpec::Variant::IntegralOperatorKernel;
  spec.target = d;
  // narrow kernel by default: distinct profiles map to nearly orthogonal
  // feature columns, which keeps the compressed transfer matrix small enough
  // that the periodic-series reproduction property survives truncated
  // operator arithmetic
  spec.base = {ScalarKernel::Base::Gaussian, jget(p, "gamma", 8.0)};

  std::vector<Sample> series;
  for (int tau = 0; tau < steps; ++tau)
    series.push_back(univariate_sample(series_function(kind, tau)));

  PfModel model = estimate_pf(spec, series, epsilon);
  const int t = model.horizon();

  ExperimentReport rep;
  CsvTable sim;
  sim.headers = {"alpha", "beta", "prediction_error"};
  double max_sim_err = 0.0;
  for (int a = 0; a <= t; ++a)
    for (int b = 0; b <= t; ++b) {
      double err = norm(sub(predict_similarity(model, a, b), model.gram_full.at(a, b)));
      sim.rows.push_back({double(a), double(b), err});
      max_sim_err = std::max(max_sim_err, err);
    }
  rep.tables.push_back({"similarity", sim});

  // gradient descent on the eigenvalue penalty is stable only for steps below
  // the inverse curvature (1 + ||K||)^2, so cap the configured step by a
  // Frobenius-type bound on the transfer matrix
  double kf = 0.0;
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) kf += norm(model.K_T.at(i, j)) * norm(model.K_T.at(i, j));
  kf = std::sqrt(kf);
  const double eta_eff = std::min(eta, 1.0 / ((1.0 + kf) * (1.0 + kf)));
  std::vector<ModuleVector> candidates = pf_eig1(model, lambda, eta_eff, iters);
  // the solver returns anything below its loose acceptance band; keep only
  // vectors whose residual shows actual convergence
  std::vector<ModuleVector> vecs;
  json residuals = json::array();
  for (const auto& v : candidates) {
    ModuleVector kv = om_apply(model.K_T, v);
    double res = module_norm(mv_sub(kv, v)) / module_norm(v);
    if (res <= std::sqrt(lambda)) {
      vecs.push_back(v);
      residuals.push_back(res);
    }
  }
  rep.summary["eig1_candidates"] = candidates.size();
  rep.summary["eig1_found"] = vecs.size();
  rep.summary["eig1_residuals"] = residuals;

  double recon = 0.0;
  if (!vecs.empty()) {
    ModeDecomposition md = mode_decompose(model, vecs);
    for (int a = 0; a <= t; ++a)
      for (int b = 0; b <= t; ++b)
        recon = std::max(recon, norm(sub(add(md.invariant_term, md.residual(a, b)),
                                         model.gram_full.at(a, b))));
    rep.summary["invariant_alpha"] = std::real(md.invariant_term.alpha);
    rep.summary["invariant_norm"] = norm(md.invariant_term);
    CsvTable heat;
    heat.headers = {"s", "t", "value"};
    Eigen::MatrixXcd kvals(hm, hm);
    for (int a = 0; a < hm; ++a)
      for (int b = 0; b < hm; ++b) {
        double s = double(a) / (hm - 1), u = double(b) / (hm - 1);
        cplx acc = 0.0;
        for (int jj = 0; jj < md.invariant_term.m.rows(); ++jj)
          for (int ll = 0; ll < md.invariant_term.m.cols(); ++ll)
            acc += md.invariant_term.m(jj, ll) * std::pow(s, jj) * std::pow(u, ll);
        heat.rows.push_back({s, u, acc.real()});
      }
    rep.tables.push_back({"invariant_heatmap", heat});
  }
  rep.summary["max_similarity_error"] = max_sim_err;
  rep.summary["decomposition_residual"] = recon;
  const bool periodic = kind.rfind("periodic", 0) == 0;
  rep.ok = (!periodic || max_sim_err <= 1e-6) && !vecs.empty() && recon <= 1e-8;
  rep.summary["pass"] = rep.ok;
  return rep;
}

// ---------------------------------------------------------------- interaction

double interaction_target(const Sample& x, double alpha, const Eigen::VectorXd& qn,
                          const Eigen::VectorXd& qw) {
  double acc = 0.0;
  for (int a = 0; a < qn.size(); ++a)
    for (int b = 0; b < qn.size(); ++b) {
      double v = std::max(eval_bivariate(x, qn(a), qn(b)), 1e-12);
      acc += qw(a) * qw(b) * std::pow(v, alpha * (qn(a) + qn(b) - 1.0));
    }
  return acc;
}

ExperimentReport run_interaction(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const int n = jget(p, "samples", 30);
  const int deg = jget(p, "degree", 5);
  const int order = jget(p, "order", 5);
  const int r = jget(p, "rank", 3);
  const double lambda = jget(p, "lambda", 0.5);
  const double emax = jget(p, "event_upper", 0.1);
  const int hm = jget(p, "heatmap_grid", 26);
  std::vector<double> alphas = {3.0, 0.5};
  if (p.contains("alphas")) alphas = p.at("alphas").get<std::vector<double>>();

  Rng rng(cfg.seed);
  std::vector<Sample> samples;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd c(deg + 1, deg + 1);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; b <= deg; ++b) c(a, b) = rng.uniform(0.0, 0.1);
    samples.push_back(bivariate_sample(c));
  }

  Descriptor d = operator_algebra(order);
  ScalarKernel kb{ScalarKernel::Base::Gaussian, jget(p, "gamma", 1.0)};
  FunctionalMeasureSet fm = functional_measure_gram(samples, kb, d);

  Eigen::VectorXd qn, qw;
  gauss_legendre_01(32, qn, qw);
  Eigen::VectorXd rn, rw;
  gauss_legendre_01(64, rn, rw);

  PcaConfig pc;
  pc.lambda = lambda;
  pc.eta = jget(p, "eta", 0.0); // 0 = automatic step from the Gram scale
  pc.max_iters = jget(p, "max_iters", 200);
  pc.epsilon = jget(p, "epsilon", 1e-6);

  ExperimentReport rep;
  std::vector<double> mean_abs(alphas.size(), 0.0);
  bool bounds_ok = true;
  for (size_t ai = 0; ai < alphas.size(); ++ai) {
    const double alpha = alphas[ai];
    std::vector<AlgebraElement> y;
    json yvals = json::array();
    for (int i = 0; i < n; ++i) {
      double yi = interaction_target(samples[i], alpha, qn, qw);
      yvals.push_back(yi);
      y.push_back(from_scalar(d, yi));
    }

    InteractionEstimator est = interaction_fit(fm, y, r, pc);
    AlgebraElement u2 = quad_form(est.u_coeffs, fm.gram, est.u_coeffs);

    // the maximizer bound is scale covariant, and for steep targets the raw
    // estimator norm reaches ~1e4, where double precision cannot resolve the
    // eps^2-scale spectral margin; the bound is therefore checked on the
    // unit-normalized estimator while the heat map below keeps the raw scale
    InteractionEstimator unit = est;
    unit.u_coeffs = mv_scale(est.u_coeffs, 1.0 / std::sqrt(std::max(norm(u2), 1e-300)));
    AlgebraElement au_unit = sqrt_positive(quad_form(unit.u_coeffs, fm.gram, unit.u_coeffs));
    json bound = json::array();
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      InteractionMax mx = interaction_max(unit, eps);
      double gap = norm(sub(au_unit, mx.impact));
      bound.push_back({{"epsilon", eps}, {"gap", gap}});
      bounds_ok = bounds_ok && gap <= eps;
    }
    InteractionMax last = interaction_max(est, 1e-3);

    // nu(E) kernel: sum_i int chi_E(x_i(r, s)) d_i(r, t) dr, symmetrized.
    // hrow(i*nq + q, l) = w_q sum_j Re H_i(j, l) r_q^j, so the value at (s, t)
    // is a sum of precomputed rows gated by the indicator.
    CsvTable heat;
    heat.headers = {"s", "t", "value"};
    const int nq = static_cast<int>(rn.size());
    const int nc = d->coeff_count();
    Eigen::MatrixXd hrow = Eigen::MatrixXd::Zero(n * nq, nc);
    for (int i = 0; i < n; ++i) {
      const Eigen::MatrixXcd& h = last.v.entries[i].m;
      for (int qq = 0; qq < nq; ++qq) {
        double rp = 1.0;
        for (int jj = 0; jj < nc; ++jj) {
          for (int ll = 0; ll < nc; ++ll) hrow(i * nq + qq, ll) += std::real(h(jj, ll)) * rp;
          rp *= rn(qq);
        }
        hrow.row(i * nq + qq) *= rw(qq);
      }
    }
    Eigen::MatrixXd kmap = Eigen::MatrixXd::Zero(hm, hm);
    for (int a = 0; a < hm; ++a) {
      double s = double(a) / (hm - 1);
      Eigen::RowVectorXd gated = Eigen::RowVectorXd::Zero(nc);
      for (int i = 0; i < n; ++i)
        for (int qq = 0; qq < nq; ++qq) {
          double xv = eval_bivariate(samples[i], rn(qq), s);
          if (xv >= 0.0 && xv <= emax) gated += hrow.row(i * nq + qq);
        }
      for (int b = 0; b < hm; ++b) {
        double t = double(b) / (hm - 1), tp = 1.0, acc = 0.0;
        for (int ll = 0; ll < nc; ++ll) {
          acc += gated(ll) * tp;
          tp *= t;
        }
        kmap(a, b) = acc;
      }
    }
    double msum = 0.0;
    for (int a = 0; a < hm; ++a)
      for (int b = 0; b < hm; ++b) {
        double v = kmap(a, b) + kmap(b, a);
        heat.rows.push_back({double(a) / (hm - 1), double(b) / (hm - 1), v});
        msum += std::abs(v);
      }
    mean_abs[ai] = msum / (hm * hm);

    char stem[64];
    std::snprintf(stem, sizeof(stem), "heatmap_alpha_%g", alpha);
    std::string name(stem);
    for (auto& ch : name)
      if (ch == '.') ch = 'p';
    rep.tables.push_back({name, heat});

    json ja;
    ja["alpha"] = alpha;
    ja["targets"] = yvals;
    ja["impact_bound"] = bound;
    ja["mean_abs_kernel"] = mean_abs[ai];
    ja["u_norm"] = std::sqrt(norm(u2));
    rep.summary["runs"].push_back(ja);
  }

  bool ordered = true;
  for (size_t ai = 0; ai + 1 < alphas.size(); ++ai)
    ordered = ordered && mean_abs[ai] > mean_abs[ai + 1];
  rep.summary["impact_bounds_hold"] = bounds_ok;
  rep.summary["alpha_ordering"] = ordered;
  rep.ok = bounds_ok && ordered;
  rep.summary["pass"] = rep.ok;
  return rep;
}

// ---------------------------------------------------------------- mmd

ExperimentReport run_mmd(const ExperimentConfig& cfg) {
  const int trials = jget(cfg.params, "trials", 20);
  Rng rng(cfg.seed);
  ExperimentReport rep;

  Descriptor ds = scalar_algebra();
  KernelSpec ks;
  ks.variant = KernelSpec::Variant::ScalarTimesIdentity;
  ks.target = ds;
  ks.base = {ScalarKernel::Base::Gaussian, 1.0};

  Eigen::VectorXd x0(1), x1(1);
  x0 << 0.0;
  x1 << 1.0;
  AlgebraElement m01 = mmd(ks, dirac(ds, point_sample(x0)), dirac(ds, point_sample(x1)));
  double closed_form = std::sqrt(2.0 - 2.0 * std::exp(-1.0));
  rep.summary["two_point_gap"] = std::abs(norm(m01) - closed_form);

  Descriptor dm = matrix_algebra(2);
  KernelSpec km;
  km.variant = KernelSpec::Variant::DiagonalMatrix;
  km.target = dm;
  km.diag = {{ScalarKernel::Base::Gaussian, 1.0}, {ScalarKernel::Base::Gaussian, 2.0}};

  double self_max = 0.0, linear_max = 0.0, symm_max = 0.0, distinct_min = 1e300;
  for (int t = 0; t < trials; ++t) {
    auto rnd_measure = [&](const Descriptor& d, const KernelSpec&) {
      DiscreteMeasure mu;
      mu.desc = d;
      const int atoms = 2 + int(rng.next() % 4);
      for (int i = 0; i < atoms; ++i) {
        Eigen::VectorXd x(2);
        x << rng.normal(), rng.normal();
        mu.atoms.push_back({point_sample(x), from_scalar(d, cplx(rng.normal(), rng.normal()))});
      }
      return mu;
    };
    const std::pair<const Descriptor*, const KernelSpec*> combos[] = {{&ds, &ks}, {&dm, &km}};
    for (const auto& pr : combos) {
      const Descriptor& d = *pr.first;
      const KernelSpec& spec = *pr.second;
      DiscreteMeasure mu = rnd_measure(d, spec);
      DiscreteMeasure nu = rnd_measure(d, spec);
      DiscreteMeasure rho = rnd_measure(d, spec);
      // vanishing on equal measures, checked on the quadratic form of the
      // difference measure (the discrepancy itself is a square root and would
      // surface rounding noise at its square root)
      DiscreteMeasure diff;
      diff.desc = d;
      for (const auto& a : mu.atoms) diff.atoms.push_back(a);
      for (const auto& a : mu.atoms) diff.atoms.push_back({a.point, scale(a.weight, -1.0)});
      self_max = std::max(self_max, norm(embed_inner(spec, diff, diff)));
      symm_max = std::max(
          symm_max, norm(sub(embed_inner(spec, mu, nu), adjoint(embed_inner(spec, nu, mu)))));
      AlgebraElement c = random_element(d, rng, true);
      DiscreteMeasure muc_nu;
      muc_nu.desc = d;
      for (const auto& a : mu.atoms) muc_nu.atoms.push_back({a.point, multiply(a.weight, c)});
      for (const auto& a : nu.atoms) muc_nu.atoms.push_back(a);
      AlgebraElement lhs = embed_inner(spec, muc_nu, rho);
      AlgebraElement rhs = add(multiply(adjoint(c), embed_inner(spec, mu, rho)),
                               embed_inner(spec, nu, rho));
      linear_max = std::max(linear_max, norm(sub(lhs, rhs)) / std::max(1.0, norm(rhs)));
    }
    Eigen::VectorXd pa(2), pb(2);
    pa << rng.normal(), rng.normal();
    pb << rng.normal(), rng.normal();
    if ((pa - pb).norm() > 1e-3)
      distinct_min = std::min(distinct_min, norm(mmd(km, dirac(dm, point_sample(pa)),
                                                     dirac(dm, point_sample(pb)))));
  }
  rep.summary["self_mmd_squared_max"] = self_max;
  rep.summary["linearity_max"] = linear_max;
  rep.summary["hermitian_symmetry_max"] = symm_max;
  rep.summary["distinct_pair_min"] = distinct_min;
  rep.ok = rep.summary["two_point_gap"].get<double>() <= 1e-12 && self_max <= 1e-10 &&
           linear_max <= 1e-9 && symm_max <= 1e-10 && distinct_min > 0;
  rep.summary["pass"] = rep.ok;
  return rep;
}

// ---------------------------------------------------------------- quantum

ExperimentReport run_quantum(const ExperimentConfig& cfg) {
  const int trials = jget(cfg.params, "trials", 100);
  std::vector<int> dims = {2, 3, 4};
  if (cfg.params.contains("dims")) dims = cfg.params.at("dims").get<std::vector<int>>();

  Rng rng(cfg.seed);
  ExperimentReport rep;
  double worst = 0.0;
  for (int m : dims) {
    auto ginibre = [&]() {
      Eigen::MatrixXcd a(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = cplx(rng.normal(), rng.normal());
      return a;
    };
    double local = 0.0;
    for (int t = 0; t < trials; ++t) {
      Eigen::MatrixXcd a1 = ginibre(), a2 = ginibre();
      Eigen::MatrixXcd rho1 = a1 * a1.adjoint();
      rho1 /= rho1.trace().real();
      Eigen::MatrixXcd rho2 = a2 * a2.adjoint();
      rho2 /= rho2.trace().real();
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(ginibre());
      Eigen::MatrixXcd onb = qr.householderQ() * Eigen::MatrixXcd::Identity(m, m);
      auto [lhs, rhs] = quantum_inner(rho1, rho2, onb);
      local = std::max(local, std::abs(lhs - rhs));
    }
    rep.summary["max_gap_by_dim"][std::to_string(m)] = local;
    worst = std::max(worst, local);
  }
  rep.summary["trials_per_dim"] = trials;
  rep.summary["max_gap"] = worst;
  rep.ok = worst <= 1e-10;
  rep.summary["pass"] = rep.ok;
  return rep;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  if (cfg.command == "selftest")
    rep = run_selftest(cfg);
  else if (cfg.command == "pca-functional")
    rep = run_pca_functional(cfg);
  else if (cfg.command == "pca-trace")
    rep = run_pca_trace(cfg);
  else if (cfg.command == "koopman")
    rep = run_koopman(cfg);
  else if (cfg.command == "interaction")
    rep = run_interaction(cfg);
  else if (cfg.command == "mmd")
    rep = run_mmd(cfg);
  else if (cfg.command == "quantum-check")
    rep = run_quantum(cfg);
  else
    throw std::invalid_argument("unknown command: " + cfg.command);
  rep.summary["command"] = cfg.command;
  rep.summary["seed"] = cfg.seed;
  return rep;
}

json emit_outputs(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::pair<std::string, std::string>> files;

  std::string summary = report.summary.dump(2);
  summary += '\n';
  write_file((fs::path(dir) / "summary.json").string(), summary);
  files.push_back({"summary.json", summary});

  for (const auto& [stem, table] : report.tables) {
    std::string name = stem + ".csv";
    write_csv((fs::path(dir) / name).string(), table.headers, table.rows);
    files.push_back({name, read_file((fs::path(dir) / name).string())});
  }

  json manifest;
  manifest["ok"] = report.ok;
  json list = json::array();
  for (const auto& [name, content] : files) {
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    list.push_back({{"name", name}, {"hash", hex}});
  }
  manifest["files"] = list;
  write_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  return manifest;
}

} // namespace rkhm
