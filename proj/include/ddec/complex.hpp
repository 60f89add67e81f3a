#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <string>
#include <vector>

namespace ddec {

/// Signed incidence matrix with integer entries. Kept integer so that
/// exactness checks (delta[k+1]*delta[k] == 0) can be verified without
/// floating point.
using IncidenceMatrix = Eigen::SparseMatrix<int>;

/// A real-valued field attached to the oriented k-cells of a complex.
struct Cochain {
  int level = 0;
  Eigen::VectorXd values;
};

/// Cochain complex on a 2D cell structure: nodes, edges, cells, with
/// coboundary matrices delta[k] mapping level-k cochains to level-(k+1)
/// cochains. delta[k] has shape counts[k+1] x counts[k] and entries in
/// {-1,0,+1}.
struct ChainComplex {
  int dim = 2;
  std::vector<Eigen::Index> counts;       // size dim+1
  std::vector<IncidenceMatrix> delta;     // size dim
  std::vector<Eigen::Vector2d> positions; // one per 0-cell

  Eigen::Index count(int k) const { return counts.at(static_cast<size_t>(k)); }
};

/// Cartesian quadrilateral complex over [0,lx] x [0,ly] with nx x ny cells.
/// Edges are oriented +x / +y, cells counterclockwise. x-edges come first
/// in the level-1 numbering, then y-edges.
ChainComplex build_cartesian_complex(int nx, int ny, double lx, double ly);

/// Number of x-edges in a Cartesian complex; y-edges follow at this offset.
inline Eigen::Index cartesian_x_edge_count(int nx, int ny) {
  return static_cast<Eigen::Index>(nx) * (ny + 1);
}

/// Accessor with level bounds check (throws std::out_of_range).
const IncidenceMatrix& coboundary(const ChainComplex& c, int k);

struct ExactnessReport {
  std::vector<int> max_abs; // max |delta[k+1]*delta[k]| per k
  bool pass = false;
};

/// Verifies delta[k+1]*delta[k] == 0 in integer arithmetic.
ExactnessReport verify_exact(const ChainComplex& c);

/// Structural validation of shapes and entry ranges; throws on violation.
void validate(const ChainComplex& c);

/// Removes the given 2-cells (rows of delta[dim-1]). Used to build
/// complexes with nontrivial topology (holes). Lower-level cells are kept.
ChainComplex remove_cells(const ChainComplex& c, const std::vector<Eigen::Index>& cells);

/// Connected components of the node graph induced by the 1-cells.
int connected_components(const ChainComplex& c);

} // namespace ddec
