#pragma once

#include "ddec/model.hpp"

namespace ddec {

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_norms; // includes the initial residual
  bool converged = false;
  bool epsilon_warning = false; // eps >= 0.95 * epsilon_max at entry
};

/// Default Newton tolerance 1e-12 * (1 + ||f||).
double default_tolerance(const SurrogateModel& mo);

/// Newton with full steps and simple halving backtracking (max 20) when
/// the residual norm increases. Reports non-convergence instead of
/// throwing on singular Jacobians or NaNs.
std::pair<State, SolveReport> newton_solve(const SurrogateModel& mo, const State& s0, double tol,
                                           int maxit = 50);

/// Adjoint solve J^T lam = -2 P^T (P s - data) for the masked quadratic
/// mismatch; mask lists observed entries of the packed state.
Eigen::VectorXd adjoint_solve(const SurrogateModel& mo, const State& s,
                              const Eigen::VectorXd& data,
                              const std::vector<Eigen::Index>& mask);

} // namespace ddec
