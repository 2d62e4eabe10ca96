#pragma once

#include "rkhm/kernels.hpp"

namespace rkhm {

struct PcaConfig {
  int rank = 1;
  double lambda = 0.1;
  double eta = 0.01;       // <= 0 picks an automatic step for the HS solver
  int max_iters = 100;
  double epsilon = 1e-6;   // Gram-Schmidt threshold for deflation / final QR
  ModuleVector init;       // empty -> all-ones start
};

struct PcaModel {
  std::vector<ModuleVector> coeffs;                        // principal axes c_j
  OperatorMatrix gram;
  std::vector<std::vector<AlgebraElement>> objective_trace; // per axis, per iteration
  std::vector<Sample> samples;                             // optional, for out-of-sample weights
  Eigen::VectorXd eigenvalues;                             // trace solver only
};

// f(c) = -c*G^2 c + lambda |c*Gc - 1|^2, commutative algebras only
AlgebraElement pca_objective(const OperatorMatrix& g, const ModuleVector& c, double lambda);
// d = -2 G^2 c - 4 lambda G c + 4 lambda (G c)(c*G c)
ModuleVector pca_gradient(const OperatorMatrix& g, const ModuleVector& c, double lambda);

// constant-step descent with per-step deflation against earlier axes
PcaModel fit_pca_gd(const OperatorMatrix& g, const PcaConfig& config);

// matrix algebras: top-r eigenpairs of the flattened Gram
PcaModel fit_pca_trace(const OperatorMatrix& g, int r);

// operator algebras with zero identity channel: descent in the
// Hilbert-Schmidt metric, then module orthonormalization of the axes
PcaModel fit_pca_hs_gd(const OperatorMatrix& g, int r, const PcaConfig& config);

// sum_i [ G_ii - sum_j (Gc_j)_i (Gc_j)_i* ]
AlgebraElement reconstruction_error(const OperatorMatrix& g, const PcaModel& model);

// <p_j, phi(x)> = sum_i adjoint(c_{j,i}) k(x_i, x) for j = 1..r
std::vector<AlgebraElement> principal_weights(const KernelSpec& spec, const PcaModel& model,
                                              const Sample& x);
// weights of every training sample, entry (j,i) = <p_j, phi(x_i)>
OperatorMatrix training_weights(const PcaModel& model);

} // namespace rkhm
