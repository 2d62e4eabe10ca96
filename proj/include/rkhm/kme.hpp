#pragma once

#include "rkhm/pca.hpp"

namespace rkhm {

struct MeasureAtom {
  Sample point;
  AlgebraElement weight;
};

// mu = sum_i delta_{x_i} . c_i ; empty atom list is the zero measure
struct DiscreteMeasure {
  Descriptor desc;
  std::vector<MeasureAtom> atoms;
};

DiscreteMeasure dirac(const Descriptor& d, const Sample& x);

// <Phi(mu), Phi(nu)> = sum_{ij} c_i* k(x_i, y_j) d_j
AlgebraElement embed_inner(const KernelSpec& spec, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu);
// |Phi(mu) - Phi(nu)|, the algebra-valued discrepancy
AlgebraElement mmd(const KernelSpec& spec, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Gram of function-pushforward measures: entry (i,j) is the integral operator
// with kernel g_ij(s,t) = int_0^1 kb(x_i(r,s), x_j(r,t)) dr
struct FunctionalMeasureSet {
  std::vector<Sample> samples; // bivariate coefficient form on [0,1]^2
  ScalarKernel base_kernel;
  OperatorMatrix gram;
};

FunctionalMeasureSet functional_measure_gram(const std::vector<Sample>& samples,
                                             const ScalarKernel& base_kernel,
                                             const Descriptor& d);

// cross column of a new sample against the training measures
ModuleVector fm_cross_column(const FunctionalMeasureSet& fm, const Sample& x_new);

struct InteractionEstimator {
  FunctionalMeasureSet fm;
  OperatorMatrix C;                // n x r principal coefficients
  std::vector<AlgebraElement> Y;   // targets
  std::vector<AlgebraElement> YC;  // (YC)_j = sum_i y_i C_ij
  ModuleVector u_coeffs;           // representer coefficients of u = Q C* Y^T
};

InteractionEstimator interaction_fit(const FunctionalMeasureSet& fm,
                                     const std::vector<AlgebraElement>& y, int r,
                                     const PcaConfig& pca_config);

AlgebraElement interaction_estimate(const InteractionEstimator& est, const Sample& x_new);
// prediction at training sample i, using the stored Gram column
AlgebraElement interaction_estimate_at(const InteractionEstimator& est, int i);

struct InteractionMax {
  ModuleVector v;          // coefficients of v_eps = u (|u| + eps)^{-1}
  AlgebraElement impact;   // <u, v_eps>, within eps of |u|
  ModuleVector v_exact;    // matrix algebras: pseudo-inverse-sqrt maximizer
  AlgebraElement impact_exact;
  bool has_exact = false;
};

InteractionMax interaction_max(const InteractionEstimator& est, double epsilon);

// trace identity for density matrices: lhs = tr<Phi(mu_rho1), Phi(mu_rho2)>
// with the rank-one state kernel, rhs = tr(rho2 rho1*)
std::pair<double, double> quantum_inner(const Eigen::MatrixXcd& rho1,
                                        const Eigen::MatrixXcd& rho2,
                                        const Eigen::MatrixXcd& onb);

} // namespace rkhm
