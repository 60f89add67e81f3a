#pragma once

#include "ddec/calculus.hpp"
#include "ddec/net.hpp"

#include <optional>
#include <vector>

namespace ddec {

/// Row-replacement boundary condition: the residual row of the cochain
/// entry (level, index) becomes (value_at_index - value).
struct BoundaryCondition {
  int level = 0;
  Eigen::Index index = 0;
  double value = 0.0;
};

/// The trainable surrogate: perturbed mixed Hodge-Laplacian system
///   w = d*_{k-1} u + eps NN(d*_{k-1} u)
///   d_{k-1} w + d_k* d_k u = f      (d_k term absent when k == dim)
/// with boundary conditions and an optional nullspace pin imposed by row
/// replacement.
struct SurrogateModel {
  ChainComplex complex;
  Metric metric;
  Mlp net;
  int k = 2;
  double epsilon = 0.0;
  std::vector<BoundaryCondition> bcs; // on w (level k-1) or u (level k)
  Cochain source;                     // f at level k
  std::optional<BoundaryCondition> pin; // level-k pin removing ker(Delta_k)

  Eigen::Index n_w() const { return complex.count(k - 1); }
  Eigen::Index n_u() const { return complex.count(k); }
  Eigen::Index state_size() const { return n_w() + n_u(); }

  /// Rows of the concatenated residual replaced by BC/pin rows.
  std::vector<Eigen::Index> replaced_rows() const;

  /// Flat trainable vector xi = [logB_0..dim ; logD_0..dim ; net params].
  Eigen::Index param_count() const;
  Eigen::VectorXd get_params() const;
  void set_params(const Eigen::VectorXd& p);
};

/// Mixed state (w at level k-1, u at level k), packed as [w; u].
struct State {
  Cochain w;
  Cochain u;

  Eigen::VectorXd pack() const;
  static State unpack(const SurrogateModel& mo, const Eigen::VectorXd& v);
  static State zero(const SurrogateModel& mo);
};

/// Concatenated block residual with BC/pin rows replaced.
Eigen::VectorXd residual(const SurrogateModel& mo, const State& s);

/// Exact Jacobian of residual with respect to the packed state; BC/pin
/// rows become unit rows.
Eigen::MatrixXd jacobian_state(const SurrogateModel& mo, const State& s);

/// Reverse-mode gradient of lam^T residual(mo, s) with respect to the flat
/// parameter vector. BC/pin rows contribute zero.
Eigen::VectorXd param_vjp(const SurrogateModel& mo, const State& s, const Eigen::VectorXd& lam);

/// Admissible perturbation bound 1/L_N (+inf for a zero network).
double epsilon_max(const SurrogateModel& mo);

/// |sum_i (delta_{k-1} B_{k-1}^{-1} w - B_k^{-1} f)_i| for k == dim: the
/// telescoped discrete conservation defect (signed boundary flux sum minus
/// total source).
double conservation_defect(const SurrogateModel& mo, const State& s);

/// Graph-norm ||u||_a = sqrt(||d*_{k-1}u||^2_{k-1} + ||d_k u||^2_{k+1});
/// terms outside 0..dim are dropped.
double energy_norm(const SurrogateModel& mo, const Cochain& u);

} // namespace ddec
