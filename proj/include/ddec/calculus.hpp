#pragma once

#include "ddec/complex.hpp"

#include <Eigen/Dense>

namespace ddec {

/// Trainable metric: positive diagonals B_k, D_k stored as log-parameters
/// so gradient descent cannot leave the positive cone. logB/logD = 0 gives
/// the purely topological graph calculus.
struct Metric {
  std::vector<Eigen::VectorXd> logB; // one vector per level 0..dim
  std::vector<Eigen::VectorXd> logD;

  static Metric identity(const ChainComplex& c);

  Eigen::ArrayXd B(int k) const { return logB.at(static_cast<size_t>(k)).array().exp(); }
  Eigen::ArrayXd D(int k) const { return logD.at(static_cast<size_t>(k)).array().exp(); }
  /// Diagonal of the level-k inner product (.,.)_k = (.,.)_{D_k B_k^{-1}}.
  Eigen::ArrayXd weight(int k) const { return D(k) / B(k); }

  void check_shapes(const ChainComplex& c) const;
};

/// d_k u = B_{k+1} delta_k B_k^{-1} u, a (k+1)-cochain.
Cochain apply_d(const Metric& m, const ChainComplex& c, int k, const Cochain& u);

/// d_k^* v = D_k^{-1} delta_k^T D_{k+1} v, a k-cochain.
Cochain apply_dstar(const Metric& m, const ChainComplex& c, int k, const Cochain& v);

/// (a, b)_k = sum_i a_i b_i D_k[i] / B_k[i].
double inner_product(const Metric& m, int k, const Cochain& a, const Cochain& b);

inline double norm_k(const Metric& m, int k, const Cochain& a) {
  return std::sqrt(inner_product(m, k, a, a));
}

/// Dense matrix of d_k acting on level-k cochains.
Eigen::MatrixXd d_matrix(const Metric& m, const ChainComplex& c, int k);
/// Dense matrix of d_k^* acting on level-(k+1) cochains.
Eigen::MatrixXd dstar_matrix(const Metric& m, const ChainComplex& c, int k);

/// Delta_k = d_{k-1} d_{k-1}^* + d_k^* d_k (terms outside 0..dim dropped).
Eigen::MatrixXd hodge_laplacian_matrix(const Metric& m, const ChainComplex& c, int k);

struct HodgeParts {
  Cochain exact;    // in im(d_{k-1})
  Cochain harmonic; // in ker(Delta_k)
  Cochain coexact;  // in im(d_k^*)
};

/// Orthogonal splitting of u in the (.,.)_k inner product, computed by two
/// weighted least-squares projections; the remainder is harmonic.
HodgeParts hodge_decompose(const Metric& m, const ChainComplex& c, int k, const Cochain& u);

/// Dimension of ker(Delta_k) (eigenvalues below 1e-10 x largest).
int harmonic_dimension(const Metric& m, const ChainComplex& c, int k);

/// c_{P,k} = lambda_min_nontrivial(d_k^* d_k)^{-1/2} in the weighted inner
/// product; "nontrivial" means above 1e-10 x the largest eigenvalue.
double poincare_constant(const Metric& m, const ChainComplex& c, int k);

} // namespace ddec
