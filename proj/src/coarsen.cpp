#include "ddec/coarsen.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>

namespace ddec {

namespace {

using Triplet = Eigen::Triplet<int>;

// (tail, head) fine node pair per fine edge, and cell lists per edge
struct FineTopology {
  std::vector<std::array<Eigen::Index, 2>> edge_nodes; // [tail, head]
  std::vector<std::vector<std::pair<Eigen::Index, int>>> edge_cells; // (cell, sign)
};

FineTopology fine_topology(const ChainComplex& fine) {
  FineTopology t;
  t.edge_nodes.assign(static_cast<size_t>(fine.count(1)), {-1, -1});
  t.edge_cells.resize(static_cast<size_t>(fine.count(1)));
  const auto& d0 = fine.delta[0];
  for (int j = 0; j < d0.outerSize(); ++j)
    for (IncidenceMatrix::InnerIterator it(d0, j); it; ++it) {
      auto& en = t.edge_nodes[static_cast<size_t>(it.row())];
      if (it.value() < 0) en[0] = it.col();
      else en[1] = it.col();
    }
  const auto& d1 = fine.delta[1];
  for (int j = 0; j < d1.outerSize(); ++j)
    for (IncidenceMatrix::InnerIterator it(d1, j); it; ++it)
      t.edge_cells[static_cast<size_t>(j)].emplace_back(it.row(), it.value());
  return t;
}

std::vector<std::vector<Eigen::Index>> dual_adjacency(const ChainComplex& fine) {
  std::vector<std::vector<Eigen::Index>> adj(static_cast<size_t>(fine.count(2)));
  const auto& d1 = fine.delta[1];
  for (int e = 0; e < d1.outerSize(); ++e) {
    std::vector<Eigen::Index> cells;
    for (IncidenceMatrix::InnerIterator it(d1, e); it; ++it) cells.push_back(it.row());
    if (cells.size() == 2) {
      adj[static_cast<size_t>(cells[0])].push_back(cells[1]);
      adj[static_cast<size_t>(cells[1])].push_back(cells[0]);
    }
  }
  return adj;
}

void check_partitions_connected(const ChainComplex& fine, const std::vector<int>& labels,
                                int n_parts) {
  auto adj = dual_adjacency(fine);
  std::vector<bool> seen(labels.size(), false);
  std::vector<bool> started(static_cast<size_t>(n_parts), false);
  for (size_t s = 0; s < labels.size(); ++s) {
    if (seen[s]) continue;
    const int p = labels[s];
    if (started[static_cast<size_t>(p)])
      throw std::runtime_error("partition " + std::to_string(p) + " is disconnected");
    started[static_cast<size_t>(p)] = true;
    std::queue<Eigen::Index> q;
    q.push(static_cast<Eigen::Index>(s));
    seen[s] = true;
    while (!q.empty()) {
      Eigen::Index v = q.front();
      q.pop();
      for (Eigen::Index w : adj[static_cast<size_t>(v)])
        if (!seen[static_cast<size_t>(w)] && labels[static_cast<size_t>(w)] == p) {
          seen[static_cast<size_t>(w)] = true;
          q.push(w);
        }
    }
  }
}

// Domain side of a boundary edge: nearest bounding-box side of its midpoint
// (0 left, 1 right, 2 bottom, 3 top). Boundary coarse 1-cells are grouped
// per partition and per side so flux BCs can be imposed per interface.
int boundary_side(const ChainComplex& fine, const FineTopology& topo, Eigen::Index e,
                  const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
  const auto& en = topo.edge_nodes[static_cast<size_t>(e)];
  Eigen::Vector2d mid = 0.5 * (fine.positions[static_cast<size_t>(en[0])] +
                               fine.positions[static_cast<size_t>(en[1])]);
  const double d[4] = {mid.x() - lo.x(), hi.x() - mid.x(), mid.y() - lo.y(), hi.y() - mid.y()};
  return static_cast<int>(std::min_element(d, d + 4) - d);
}

} // namespace

std::vector<int> block_partition(const ChainComplex& c, int nx, int ny, int px, int py) {
  if (static_cast<Eigen::Index>(nx) * ny != c.count(2))
    throw std::invalid_argument("grid size does not match cell count");
  if (px < 1 || py < 1 || px > nx || py > ny)
    throw std::invalid_argument("block counts must be in [1, grid size]");
  const int bw = nx / px, bh = ny / py; // last block absorbs the remainder
  std::vector<int> labels(static_cast<size_t>(c.count(2)));
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const int bx = std::min(ix / bw, px - 1);
      const int by = std::min(iy / bh, py - 1);
      labels[static_cast<size_t>(iy) * nx + ix] = by * px + bx;
    }
  return labels;
}

std::vector<int> greedy_partition(const ChainComplex& c, int n_parts, std::uint64_t seed) {
  const Eigen::Index n2 = c.count(2);
  if (n_parts < 1 || n_parts > n2)
    throw std::invalid_argument("n_parts must be in [1, cell count]");
  auto adj = dual_adjacency(c);

  std::vector<Eigen::Index> order(static_cast<size_t>(n2));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (size_t i = order.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  std::vector<int> labels(static_cast<size_t>(n2), -1);
  std::vector<std::queue<Eigen::Index>> frontier(static_cast<size_t>(n_parts));
  for (int p = 0; p < n_parts; ++p) {
    labels[static_cast<size_t>(order[static_cast<size_t>(p)])] = p;
    frontier[static_cast<size_t>(p)].push(order[static_cast<size_t>(p)]);
  }

  Eigen::Index assigned = n_parts;
  while (assigned < n2) {
    bool grew = false;
    for (int p = 0; p < n_parts && assigned < n2; ++p) {
      auto& q = frontier[static_cast<size_t>(p)];
      while (!q.empty()) {
        Eigen::Index v = q.front();
        Eigen::Index pick = -1;
        for (Eigen::Index w : adj[static_cast<size_t>(v)])
          if (labels[static_cast<size_t>(w)] < 0) {
            pick = w;
            break;
          }
        if (pick < 0) {
          q.pop();
          continue;
        }
        labels[static_cast<size_t>(pick)] = p;
        q.push(pick);
        ++assigned;
        grew = true;
        break;
      }
    }
    if (!grew)
      throw std::runtime_error("greedy_partition stalled: fine complex disconnected");
  }
  return labels;
}

CoarseComplex build_coarse(const ChainComplex& fine, const std::vector<int>& labels) {
  validate(fine);
  if (labels.size() != static_cast<size_t>(fine.count(2)))
    throw std::invalid_argument("labels size mismatch");
  const int n_parts = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  for (int l : labels)
    if (l < 0 || l >= n_parts) throw std::invalid_argument("label out of range");
  check_partitions_connected(fine, labels, n_parts);

  const FineTopology topo = fine_topology(fine);

  Eigen::Vector2d lo = fine.positions.front(), hi = fine.positions.front();
  for (const auto& p : fine.positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }

  // Skeleton: fine edges lying on inter-partition interfaces or the domain
  // boundary, grouped by (partition pair) or (partition, side).
  struct GroupKey {
    int a, b, side; // side = -1 for interfaces
    bool operator<(const GroupKey& o) const {
      return std::tie(a, b, side) < std::tie(o.a, o.b, o.side);
    }
  };
  std::map<GroupKey, std::vector<Eigen::Index>> groups;
  std::vector<int> edge_sign(static_cast<size_t>(fine.count(1)), 0);

  for (Eigen::Index e = 0; e < fine.count(1); ++e) {
    const auto& cells = topo.edge_cells[static_cast<size_t>(e)];
    if (cells.size() == 2) {
      const int la = labels[static_cast<size_t>(cells[0].first)];
      const int lb = labels[static_cast<size_t>(cells[1].first)];
      if (la == lb) continue;
      // orient so the lower-labeled partition gets the +1 coboundary entry
      const auto& hi_cell = (la > lb) ? cells[0] : cells[1];
      edge_sign[static_cast<size_t>(e)] = -hi_cell.second;
      groups[{std::min(la, lb), std::max(la, lb), -1}].push_back(e);
    } else if (cells.size() == 1) {
      const int l = labels[static_cast<size_t>(cells[0].first)];
      const int side = boundary_side(fine, topo, e, lo, hi);
      edge_sign[static_cast<size_t>(e)] = cells[0].second; // CCW traversal of the partition
      groups[{l, l, side}].push_back(e);
    }
  }

  // Junction detection on the skeleton graph.
  std::vector<int> node_degree(static_cast<size_t>(fine.count(0)), 0);
  std::vector<std::vector<const GroupKey*>> node_groups(static_cast<size_t>(fine.count(0)));
  for (const auto& [key, edges] : groups)
    for (Eigen::Index e : edges)
      for (Eigen::Index n : topo.edge_nodes[static_cast<size_t>(e)]) {
        ++node_degree[static_cast<size_t>(n)];
        node_groups[static_cast<size_t>(n)].push_back(&key);
      }
  std::vector<bool> is_junction(static_cast<size_t>(fine.count(0)), false);
  for (Eigen::Index n = 0; n < fine.count(0); ++n) {
    const auto& gs = node_groups[static_cast<size_t>(n)];
    if (node_degree[static_cast<size_t>(n)] >= 3)
      is_junction[static_cast<size_t>(n)] = true;
    else if (node_degree[static_cast<size_t>(n)] == 2 && gs[0] != gs[1])
      is_junction[static_cast<size_t>(n)] = true;
  }

  // Coarse 1-cells: connected components of each group, where connectivity
  // never passes through a junction node.
  std::vector<std::vector<Eigen::Index>> coarse_edges; // fine-edge members
  Eigen::Index n_interface = 0;
  auto split_group = [&](const std::vector<Eigen::Index>& edges) {
    std::map<Eigen::Index, std::vector<Eigen::Index>> at_node; // non-junction node -> edges
    for (Eigen::Index e : edges)
      for (Eigen::Index n : topo.edge_nodes[static_cast<size_t>(e)])
        if (!is_junction[static_cast<size_t>(n)]) at_node[n].push_back(e);
    std::map<Eigen::Index, bool> used;
    for (Eigen::Index e : edges) used[e] = false;
    for (Eigen::Index e0 : edges) {
      if (used[e0]) continue;
      std::vector<Eigen::Index> comp;
      std::queue<Eigen::Index> q;
      q.push(e0);
      used[e0] = true;
      while (!q.empty()) {
        Eigen::Index e = q.front();
        q.pop();
        comp.push_back(e);
        for (Eigen::Index n : topo.edge_nodes[static_cast<size_t>(e)]) {
          if (is_junction[static_cast<size_t>(n)]) continue;
          for (Eigen::Index w : at_node[n])
            if (!used[w]) {
              used[w] = true;
              q.push(w);
            }
        }
      }
      std::sort(comp.begin(), comp.end());
      coarse_edges.push_back(std::move(comp));
    }
  };
  for (const auto& [key, edges] : groups)
    if (key.side < 0) split_group(edges);
  n_interface = static_cast<Eigen::Index>(coarse_edges.size());
  for (const auto& [key, edges] : groups)
    if (key.side >= 0) split_group(edges);
  const Eigen::Index nE = static_cast<Eigen::Index>(coarse_edges.size());

  // Coarse 0-cells in fine-node order.
  std::vector<Eigen::Index> junction_nodes;
  for (Eigen::Index n = 0; n < fine.count(0); ++n)
    if (is_junction[static_cast<size_t>(n)]) junction_nodes.push_back(n);
  const Eigen::Index nN = static_cast<Eigen::Index>(junction_nodes.size());

  CoarseComplex cc;
  cc.n_interface_edges = n_interface;
  cc.n_boundary_edges = nE - n_interface;

  // Inclusions.
  std::vector<Triplet> ti0, ti1, ti2;
  for (Eigen::Index j = 0; j < nN; ++j) ti0.emplace_back(junction_nodes[static_cast<size_t>(j)], j, 1);
  for (Eigen::Index j = 0; j < nE; ++j)
    for (Eigen::Index e : coarse_edges[static_cast<size_t>(j)])
      ti1.emplace_back(e, j, edge_sign[static_cast<size_t>(e)]);
  for (Eigen::Index f = 0; f < fine.count(2); ++f)
    ti2.emplace_back(f, labels[static_cast<size_t>(f)], 1);

  cc.map.labels = labels;
  cc.map.iota.resize(3);
  cc.map.iota[0] = IncidenceMatrix(fine.count(0), nN);
  cc.map.iota[0].setFromTriplets(ti0.begin(), ti0.end());
  cc.map.iota[1] = IncidenceMatrix(fine.count(1), nE);
  cc.map.iota[1].setFromTriplets(ti1.begin(), ti1.end());
  cc.map.iota[2] = IncidenceMatrix(fine.count(2), n_parts);
  cc.map.iota[2].setFromTriplets(ti2.begin(), ti2.end());
  for (auto& m : cc.map.iota) m.makeCompressed();

  // Coarse coboundaries from iota^T delta iota, with the iota^T iota
  // column normalization folded out so entries stay in {-1,0,+1}.
  IncidenceMatrix d1raw = (cc.map.iota[2].transpose() * fine.delta[1] * cc.map.iota[1]).pruned();
  std::vector<Triplet> td1;
  for (int j = 0; j < d1raw.outerSize(); ++j) {
    const int ne = static_cast<int>(coarse_edges[static_cast<size_t>(j)].size());
    for (IncidenceMatrix::InnerIterator it(d1raw, j); it; ++it) {
      if (std::abs(it.value()) != ne)
        throw std::runtime_error("interface component with inconsistent orientation");
      td1.emplace_back(it.row(), it.col(), it.value() / ne);
    }
  }
  IncidenceMatrix d1c(n_parts, nE);
  d1c.setFromTriplets(td1.begin(), td1.end());
  d1c.makeCompressed();

  IncidenceMatrix d0c = (cc.map.iota[1].transpose() * fine.delta[0] * cc.map.iota[0]).pruned();
  for (int j = 0; j < d0c.outerSize(); ++j)
    for (IncidenceMatrix::InnerIterator it(d0c, j); it; ++it)
      if (std::abs(it.value()) > 1)
        throw std::runtime_error("interface endpoint with inconsistent orientation");
  d0c.makeCompressed();

  cc.coarse.dim = 2;
  cc.coarse.counts = {nN, nE, n_parts};
  cc.coarse.delta = {d0c, d1c};
  cc.coarse.positions.resize(static_cast<size_t>(nN));
  for (Eigen::Index j = 0; j < nN; ++j)
    cc.coarse.positions[static_cast<size_t>(j)] =
        fine.positions[static_cast<size_t>(junction_nodes[static_cast<size_t>(j)])];

  // Partition centroids (mean of constituent fine-cell vertex centroids).
  cc.map.centroids.assign(static_cast<size_t>(n_parts), Eigen::Vector2d::Zero());
  std::vector<int> part_count(static_cast<size_t>(n_parts), 0);
  const auto& d1f = fine.delta[1];
  std::vector<Eigen::Vector2d> cell_centroid(static_cast<size_t>(fine.count(2)),
                                             Eigen::Vector2d::Zero());
  std::vector<int> cell_nodes(static_cast<size_t>(fine.count(2)), 0);
  for (int e = 0; e < d1f.outerSize(); ++e)
    for (IncidenceMatrix::InnerIterator it(d1f, e); it; ++it)
      for (Eigen::Index n : topo.edge_nodes[static_cast<size_t>(e)]) {
        cell_centroid[static_cast<size_t>(it.row())] += fine.positions[static_cast<size_t>(n)];
        ++cell_nodes[static_cast<size_t>(it.row())];
      }
  for (Eigen::Index f = 0; f < fine.count(2); ++f) {
    cell_centroid[static_cast<size_t>(f)] /= std::max(1, cell_nodes[static_cast<size_t>(f)]);
    cc.map.centroids[static_cast<size_t>(labels[static_cast<size_t>(f)])] +=
        cell_centroid[static_cast<size_t>(f)];
    ++part_count[static_cast<size_t>(labels[static_cast<size_t>(f)])];
  }
  for (int p = 0; p < n_parts; ++p)
    cc.map.centroids[static_cast<size_t>(p)] /= std::max(1, part_count[static_cast<size_t>(p)]);

  validate(cc.coarse);
  return cc;
}

Cochain restrict_cochain(const CoarseMap& map, const Cochain& fine) {
  if (fine.level < 0 || fine.level >= static_cast<int>(map.iota.size()))
    throw std::invalid_argument("no inclusion for this level");
  const auto& io = map.iota[static_cast<size_t>(fine.level)];
  if (io.rows() != fine.values.size())
    throw std::invalid_argument("fine cochain length mismatch");
  Cochain out;
  out.level = fine.level;
  out.values = io.cast<double>().transpose() * fine.values;
  return out;
}

CoarseReport verify_coarse(const CoarseComplex& cc, const ChainComplex& fine) {
  CoarseReport rep;
  auto ex = verify_exact(cc.coarse);
  rep.coarse_exactness = *std::max_element(ex.max_abs.begin(), ex.max_abs.end());

  // pi_k iota_k = I holds iff iota^T iota is diagonal (columns have
  // pairwise disjoint support).
  rep.pi_iota_defect = 0.0;
  for (const auto& io : cc.map.iota) {
    IncidenceMatrix gram = (IncidenceMatrix(io.transpose()) * io).pruned();
    for (int j = 0; j < gram.outerSize(); ++j)
      for (IncidenceMatrix::InnerIterator it(gram, j); it; ++it)
        if (it.row() != it.col())
          rep.pi_iota_defect = std::max(rep.pi_iota_defect, double(std::abs(it.value())));
  }

  // delta_k^coarse (iota^T phi) = iota^T delta_k^fine phi for phi in the
  // range of iota_k (cochains constant on coarse cells), up to the
  // metric-absorbed diagonal normalization.
  rep.commute_defect = 0.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 2; ++k) {
    const auto io_k = cc.map.iota[static_cast<size_t>(k)].cast<double>();
    const auto io_k1 = cc.map.iota[static_cast<size_t>(k + 1)].cast<double>();
    Eigen::VectorXd y(cc.coarse.count(k));
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = u(rng);
    Eigen::VectorXd phi = io_k * y;
    Eigen::VectorXd lhs = cc.coarse.delta[static_cast<size_t>(k)].cast<double>() *
                          (io_k.transpose() * phi);
    Eigen::VectorXd rhs = io_k1.transpose() *
                          (fine.delta[static_cast<size_t>(k)].cast<double>() * phi);
    rep.commute_defect = std::max(rep.commute_defect, (lhs - rhs).cwiseAbs().maxCoeff());
  }

  rep.pass = rep.coarse_exactness == 0 && rep.pi_iota_defect == 0.0 &&
             rep.commute_defect < 1e-12;
  return rep;
}

} // namespace ddec
