#pragma once

#include "rkhm/kernels.hpp"

namespace rkhm {

// Transfer-operator estimate from a length-(T+1) functional time series.
// gram_full covers x_0..x_T; qr factors the leading T x T block.
struct PfModel {
  OperatorMatrix K_T;
  QrResult qr;
  OperatorMatrix gram_full;
  std::vector<Sample> samples;
  double epsilon = 0.0;

  int horizon() const { return K_T.rows; }
};

PfModel estimate_pf(const KernelSpec& spec, const std::vector<Sample>& series, double epsilon);

// penalty descent for eigenvectors at eigenvalue 1; returns every run whose
// residual ||K v - v|| / ||v|| lands below 10 sqrt(lambda), possibly none
std::vector<ModuleVector> pf_eig1(const PfModel& model, double lambda, double eta, int iters);

struct ModeDecomposition {
  ModuleVector v;                // coefficients of the invariant part over x_0..x_{T-1}
  AlgebraElement invariant_term; // <v, v>
  OperatorMatrix gram_full;

  // k(x_alpha, x_beta) - invariant_term for alpha, beta <= T
  AlgebraElement residual(int alpha, int beta) const;
};

ModeDecomposition mode_decompose(const PfModel& model, const std::vector<ModuleVector>& eig_vecs);

// projected-subspace estimate of k(x_alpha, x_beta) through powers of K_T
AlgebraElement predict_similarity(const PfModel& model, int alpha, int beta);

} // namespace rkhm
