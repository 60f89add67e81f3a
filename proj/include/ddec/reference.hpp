#pragma once

#include "ddec/coarsen.hpp"
#include "ddec/train.hpp"

namespace ddec {

/// Cylindrical inclusion material: mu = alpha inside radius a, 1 outside.
struct MaterialSpec {
  double a = 0.25;
  double alpha = 1.0;
  Eigen::Vector2d center{0.5, 0.5};
};

double mu_alpha(const Eigen::Vector2d& x, const MaterialSpec& mat);

enum class CaseTag { D1, D2, Magneto };

CaseTag case_from_string(const std::string& name);
std::string case_to_string(CaseTag tag);

struct CaseSpec {
  CaseTag tag = CaseTag::D1;
  std::vector<double> alphas{10.0}; // D2 default {1,2,4}, magneto {1,2,4}
  int fine_n = 20;                  // fine cells per direction (unit square)
  int px = 3, py = 3;               // partition blocks
  MaterialSpec mat;                 // alpha overridden per sample
};

/// Default alpha set per case: D1 {10}, D2 and magnetostatics {1,2,4}.
std::vector<double> default_alphas(CaseTag tag);

struct FineDarcy {
  Cochain phi;    // level-2 cell potentials (pinned at cell 0)
  Cochain flux;   // level-1 edge fluxes, integral of F . n_hat over the edge
  Cochain source; // level-2 integrated source
  Eigen::VectorXd g; // per-edge prescribed boundary flux (0 on interior edges)
};

/// Staggered mixed finite differences: cell potentials, edge fluxes with
/// harmonic-mean interface coefficients; flux BC from the uniform field
/// fbar (g_e = fbar . n_hat_e * |e|); discrete divergence exact.
FineDarcy solve_darcy_fine(int nx, int ny, const MaterialSpec& mat, const Eigen::Vector2d& fbar,
                           const Eigen::VectorXd& f_cells);

struct FineMagneto {
  Cochain B; // level-0 nodal magnetic field
  Cochain A; // level-1 edge potential, 0 on boundary edges
};

/// 2D magnetostatics with out-of-plane scalar current: curl J = 0 with
/// J = g/mu on the boundary via a graph-Laplacian solve, then B = mu J and
/// a minimum-norm gauged potential A.
FineMagneto solve_magnetostatics_fine(int nx, int ny, const MaterialSpec& mat, double g);

struct Dataset {
  ChainComplex fine;
  CoarseComplex cc;
  int k = 2; // problem index: 2 for Darcy, 1 for magnetostatics
  std::vector<double> alphas;
  std::vector<Sample> samples;
};

/// Fine solve per alpha, restriction through the coarse map, and assembly
/// of training samples (coarse BC rows, source, masked data). Darcy
/// observes the full (w, u) state and pins u at cell 0 to its coarsened
/// value; magnetostatics observes w only.
Dataset generate_dataset(const CaseSpec& spec);

/// Initial surrogate for a dataset: identity metric, He-initialized net
/// sized to the level k-1 dimension.
SurrogateModel initial_model(const Dataset& ds, Activation act,
                             const std::vector<Eigen::Index>& hidden, double epsilon,
                             std::uint64_t seed);

} // namespace ddec
