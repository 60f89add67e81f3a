#include "ddec/solve.hpp"

#include <Eigen/LU>
#include <cmath>
#include <iostream>
#include <limits>

namespace ddec {

double default_tolerance(const SurrogateModel& mo) {
  return 1e-12 * (1.0 + mo.source.values.norm());
}

std::pair<State, SolveReport> newton_solve(const SurrogateModel& mo, const State& s0, double tol,
                                           int maxit) {
  SolveReport rep;
  if (mo.epsilon > 0.0 && mo.epsilon >= 0.95 * epsilon_max(mo)) {
    rep.epsilon_warning = true;
    std::cerr << "warning: epsilon = " << mo.epsilon << " close to 1/L_N = " << epsilon_max(mo)
              << "; well-posedness margin thin\n";
  }

  State s = s0;
  Eigen::VectorXd r = residual(mo, s);
  double rnorm = r.norm();
  rep.residual_norms.push_back(rnorm);
  if (!std::isfinite(rnorm)) return {s, rep};
  if (rnorm <= tol) {
    rep.converged = true;
    return {s, rep};
  }

  for (int it = 0; it < maxit; ++it) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian_state(mo, s));
    const Eigen::VectorXd step = lu.solve(-r);
    if (!step.allFinite()) return {s, rep}; // singular Jacobian
    const Eigen::VectorXd base = s.pack();

    double alpha = 1.0;
    State trial = s;
    Eigen::VectorXd rt;
    double rtnorm = std::numeric_limits<double>::infinity();
    for (int h = 0; h <= 20; ++h) {
      trial = State::unpack(mo, base + alpha * step);
      rt = residual(mo, trial);
      rtnorm = rt.norm();
      if (std::isfinite(rtnorm) && (rtnorm < rnorm || rtnorm <= tol)) break;
      alpha *= 0.5;
    }
    s = trial;
    r = rt;
    rnorm = rtnorm;
    rep.residual_norms.push_back(rnorm);
    ++rep.iterations;
    if (!std::isfinite(rnorm)) return {s, rep};
    if (rnorm <= tol) {
      rep.converged = true;
      return {s, rep};
    }
  }
  return {s, rep};
}

Eigen::VectorXd adjoint_solve(const SurrogateModel& mo, const State& s,
                              const Eigen::VectorXd& data,
                              const std::vector<Eigen::Index>& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != data.size())
    throw std::invalid_argument("mask/data size mismatch");
  const Eigen::VectorXd packed = s.pack();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mo.state_size());
  for (size_t i = 0; i < mask.size(); ++i) {
    const Eigen::Index j = mask[i];
    if (j < 0 || j >= mo.state_size()) throw std::out_of_range("mask index out of range");
    rhs[j] -= 2.0 * (packed[j] - data[static_cast<Eigen::Index>(i)]);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian_state(mo, s));
  return lu.transpose().solve(rhs);
}

} // namespace ddec
