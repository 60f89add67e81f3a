#pragma once

#include "ddec/complex.hpp"

#include <cstdint>
#include <vector>

namespace ddec {

/// Links a fine complex to the coarse complex built on top of a partition
/// of its d-cells. iota[k] includes coarse k-cells into fine k-cells as
/// signed sums; restriction uses pi_k = iota_k^T so that restricted data
/// stays integer-exact (normalization is absorbed by the metric).
struct CoarseMap {
  std::vector<int> labels;            // per fine d-cell, partition index
  std::vector<IncidenceMatrix> iota;  // iota[k]: fine k-cells x coarse k-cells
  std::vector<Eigen::Vector2d> centroids; // per partition, mean fine-cell centroid
};

/// px x py rectangular blocks over an nx x ny Cartesian cell grid; the last
/// block in each direction absorbs any remainder.
std::vector<int> block_partition(const ChainComplex& c, int nx, int ny, int px, int py);

/// Connected partitions grown by breadth-first accretion from randomly
/// seeded cells, balanced by round-robin growth.
std::vector<int> greedy_partition(const ChainComplex& c, int n_parts, std::uint64_t seed);

struct CoarseComplex {
  ChainComplex coarse;
  CoarseMap map;
  // index ranges in the coarse level-1 numbering
  Eigen::Index n_interface_edges = 0; // interior interfaces come first
  Eigen::Index n_boundary_edges = 0;  // then per-partition-side boundary cells
};

/// Builds the coarse chain complex induced by a partition of the fine
/// 2-cells: coarse 2-cells are partitions, coarse 1-cells are connected
/// components of inter-partition interfaces (plus per-partition-side groups
/// of domain-boundary edges), coarse 0-cells are junction nodes.
CoarseComplex build_coarse(const ChainComplex& fine, const std::vector<int>& labels);

/// pi applied to a fine cochain: coarse values = iota_k^T * fine values.
Cochain restrict_cochain(const CoarseMap& map, const Cochain& fine);

struct CoarseReport {
  int coarse_exactness = 0;          // max |delta1*delta0| on the coarse complex
  double pi_iota_defect = 0.0;       // max |iota^T iota scaled to I - I|... see impl
  double commute_defect = 0.0;       // restriction compatibility on partition-constant cochains
  bool pass = false;
};

/// Checks coarse exactness, pi_k iota_k = I, and commutativity of
/// coarsening with the coboundary on partition-constant cochains.
CoarseReport verify_coarse(const CoarseComplex& cc, const ChainComplex& fine);

} // namespace ddec
