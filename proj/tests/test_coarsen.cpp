#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddec/coarsen.hpp"

#include <algorithm>
#include <map>

using namespace ddec;

namespace {

std::map<int, int> partition_sizes(const std::vector<int>& labels) {
  std::map<int, int> sizes;
  for (int l : labels) ++sizes[l];
  return sizes;
}

} // namespace

TEST_CASE("block partition tiling") {
  const ChainComplex c6 = build_cartesian_complex(6, 6, 1.0, 1.0);
  const auto l6 = block_partition(c6, 6, 6, 3, 3);
  const auto s6 = partition_sizes(l6);
  CHECK(s6.size() == 9);
  for (const auto& [part, n] : s6) CHECK(n == 4);

  const ChainComplex c2 = build_cartesian_complex(2, 2, 1.0, 1.0);
  const auto l2 = block_partition(c2, 2, 2, 2, 2);
  CHECK(partition_sizes(l2).size() == 4); // identity coarsening

  const ChainComplex c50 = build_cartesian_complex(50, 50, 1.0, 1.0);
  const auto s50 = partition_sizes(block_partition(c50, 50, 50, 3, 3));
  CHECK(s50.size() == 9);
  // last block absorbs the remainder: sizes are products of {16,16,18}
  std::vector<int> sizes;
  for (const auto& [part, n] : s50) sizes.push_back(n);
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes.front() == 16 * 16);
  CHECK(sizes.back() == 18 * 18);
}

TEST_CASE("greedy partition") {
  const ChainComplex c = build_cartesian_complex(10, 10, 1.0, 1.0);
  const auto l1 = greedy_partition(c, 1, 0);
  CHECK(partition_sizes(l1).size() == 1);

  const auto lid = greedy_partition(c, 100, 0);
  CHECK(partition_sizes(lid).size() == 100);

  const auto l4 = greedy_partition(c, 4, 0);
  const auto s4 = partition_sizes(l4);
  CHECK(s4.size() == 4);
  for (const auto& [part, n] : s4) {
    CHECK(n >= 24);
    CHECK(n <= 26);
  }
  // partitions must be connected: build_coarse throws otherwise
  CHECK_NOTHROW(build_coarse(c, l4));
}

TEST_CASE("identity partition is an isomorphism") {
  const ChainComplex c = build_cartesian_complex(3, 2, 1.0, 1.0);
  std::vector<int> labels(static_cast<size_t>(c.count(2)));
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i);
  const CoarseComplex cc = build_coarse(c, labels);
  CHECK(cc.coarse.counts == c.counts);
  for (int k = 0; k < 3; ++k) {
    // iota_k is a signed permutation: one entry per column, square
    CHECK(cc.map.iota[static_cast<size_t>(k)].rows() == c.count(k));
    CHECK(cc.map.iota[static_cast<size_t>(k)].cols() == c.count(k));
    CHECK(cc.map.iota[static_cast<size_t>(k)].nonZeros() == c.count(k));
  }
  CHECK(verify_coarse(cc, c).pass);
}

TEST_CASE("2x1 grid, two partitions") {
  const ChainComplex c = build_cartesian_complex(2, 1, 1.0, 1.0);
  const CoarseComplex cc = build_coarse(c, {0, 1});
  CHECK(cc.coarse.count(2) == 2);
  CHECK(cc.n_interface_edges == 1);
  int interior_nodes = 0;
  for (const auto& p : cc.coarse.positions)
    if (p.x() > 1e-12 && p.x() < 1.0 - 1e-12 && p.y() > 1e-12 && p.y() < 1.0 - 1e-12)
      ++interior_nodes;
  CHECK(interior_nodes == 0);
  CHECK(verify_exact(cc.coarse).pass);
}

TEST_CASE("6x6 grid with 3x3 blocks") {
  const ChainComplex c = build_cartesian_complex(6, 6, 1.0, 1.0);
  const CoarseComplex cc = build_coarse(c, block_partition(c, 6, 6, 3, 3));
  CHECK(cc.coarse.count(2) == 9);
  CHECK(cc.n_interface_edges == 12);
  int interior_nodes = 0;
  for (const auto& p : cc.coarse.positions)
    if (p.x() > 1e-12 && p.x() < 1.0 - 1e-12 && p.y() > 1e-12 && p.y() < 1.0 - 1e-12)
      ++interior_nodes;
  CHECK(interior_nodes == 4);
  CHECK(verify_exact(cc.coarse).pass);

  const CoarseReport rep = verify_coarse(cc, c);
  CHECK(rep.pass);
  CHECK(rep.coarse_exactness == 0);
  CHECK(rep.pi_iota_defect < 1e-12);
  CHECK(rep.commute_defect < 1e-12);
}

TEST_CASE("iota^T iota is diagonal with constituent counts") {
  const ChainComplex c = build_cartesian_complex(6, 6, 1.0, 1.0);
  const CoarseComplex cc = build_coarse(c, block_partition(c, 6, 6, 3, 3));
  const IncidenceMatrix g = (cc.map.iota[2].transpose() * cc.map.iota[2]).pruned();
  for (int j = 0; j < g.outerSize(); ++j)
    for (IncidenceMatrix::InnerIterator it(g, j); it; ++it) {
      CHECK(it.row() == it.col());
      CHECK(it.value() == 4); // 2x2 cells per partition
    }
}

TEST_CASE("restriction") {
  const ChainComplex c = build_cartesian_complex(6, 6, 1.0, 1.0);
  const CoarseComplex cc = build_coarse(c, block_partition(c, 6, 6, 3, 3));

  Cochain ones{2, Eigen::VectorXd::Ones(c.count(2))};
  const Cochain r2 = restrict_cochain(cc.map, ones);
  for (Eigen::Index i = 0; i < r2.values.size(); ++i) CHECK(r2.values[i] == 4.0);

  Cochain zeros{1, Eigen::VectorXd::Zero(c.count(1))};
  CHECK(restrict_cochain(cc.map, zeros).values.cwiseAbs().maxCoeff() == 0.0);

  // unit x-directed flux: w_e = h_y on +y edges (n_hat = +x), 0 on x-edges
  Cochain flux{1, Eigen::VectorXd::Zero(c.count(1))};
  const Eigen::Index nEx = cartesian_x_edge_count(6, 6);
  for (Eigen::Index e = nEx; e < c.count(1); ++e) flux.values[e] = 1.0 / 6.0;
  const Cochain rf = restrict_cochain(cc.map, flux);
  // every vertical coarse interface has length 1/3 and carries that flux
  int vertical = 0;
  for (Eigen::Index g = 0; g < cc.n_interface_edges; ++g)
    if (std::abs(rf.values[g]) > 1e-12) {
      ++vertical;
      CHECK(std::abs(rf.values[g]) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
  CHECK(vertical == 6);
}

TEST_CASE("disconnected partition rejected") {
  const ChainComplex c = build_cartesian_complex(3, 1, 1.0, 1.0);
  CHECK_THROWS(build_coarse(c, {0, 1, 0})); // partition 0 in two pieces
}
