#pragma once

#include "ddec/model.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ddec {

/// Measured structure defects for a model (randomized probes, fixed seed).
struct VerifyReport {
  double exactness_d = 0.0;      // max |d_{k+1} d_k x|
  double exactness_dstar = 0.0;  // max |d*_{k-1} d*_k y|
  double adjointness = 0.0;
  double hodge_orthogonality = 0.0;
  double hodge_reconstruction = 0.0;
  double min_eigenvalue = 0.0;   // of the symmetrized Hodge Laplacian at level k
  double eps_lipschitz = 0.0;    // epsilon * L_N
  bool pass = false;
};

VerifyReport verify_model(const SurrogateModel& mo);

/// Nearest-centroid 1D profile along the horizontal line y: one row per
/// subdomain that is the nearest centroid to (its own x, y), sorted by x.
std::vector<std::pair<double, double>> centroid_profile(
    const std::vector<Eigen::Vector2d>& centroids, const Eigen::VectorXd& values, double y);

/// Entry point used by the ddec binary; exit codes: 0 success,
/// 1 verification failure, 2 usage/IO error, 3 training target missed.
int run_cli(int argc, const char* const* argv);

} // namespace ddec
