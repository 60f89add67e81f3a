#include "ddec/complex.hpp"

#include <Eigen/Sparse>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace ddec {

namespace {

using Triplet = Eigen::Triplet<int>;

IncidenceMatrix from_triplets(Eigen::Index rows, Eigen::Index cols,
                              std::vector<Triplet>& trips) {
  IncidenceMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

} // namespace

ChainComplex build_cartesian_complex(int nx, int ny, double lx, double ly) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("cell counts must be >= 1");
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("domain lengths must be > 0");

  ChainComplex c;
  c.dim = 2;
  const Eigen::Index n0 = static_cast<Eigen::Index>(nx + 1) * (ny + 1);
  const Eigen::Index nEx = cartesian_x_edge_count(nx, ny);
  const Eigen::Index nEy = static_cast<Eigen::Index>(ny) * (nx + 1);
  const Eigen::Index n1 = nEx + nEy;
  const Eigen::Index n2 = static_cast<Eigen::Index>(nx) * ny;
  c.counts = {n0, n1, n2};

  auto node = [nx](int ix, int iy) { return static_cast<Eigen::Index>(iy) * (nx + 1) + ix; };
  auto xedge = [nx](int ix, int iy) { return static_cast<Eigen::Index>(iy) * nx + ix; };
  auto yedge = [nx, nEx](int ix, int iy) {
    return nEx + static_cast<Eigen::Index>(iy) * (nx + 1) + ix;
  };
  auto cell = [nx](int ix, int iy) { return static_cast<Eigen::Index>(iy) * nx + ix; };

  c.positions.resize(static_cast<size_t>(n0));
  const double hx = lx / nx, hy = ly / ny;
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix)
      c.positions[static_cast<size_t>(node(ix, iy))] = {ix * hx, iy * hy};

  // delta0: per edge, -1 at tail, +1 at head
  std::vector<Triplet> t0;
  t0.reserve(static_cast<size_t>(2 * n1));
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const Eigen::Index e = xedge(ix, iy);
      t0.emplace_back(e, node(ix, iy), -1);
      t0.emplace_back(e, node(ix + 1, iy), 1);
    }
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix) {
      const Eigen::Index e = yedge(ix, iy);
      t0.emplace_back(e, node(ix, iy), -1);
      t0.emplace_back(e, node(ix, iy + 1), 1);
    }

  // delta1: counterclockwise cell boundary: +bottom +right -top -left
  std::vector<Triplet> t1;
  t1.reserve(static_cast<size_t>(4 * n2));
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const Eigen::Index q = cell(ix, iy);
      t1.emplace_back(q, xedge(ix, iy), 1);
      t1.emplace_back(q, yedge(ix + 1, iy), 1);
      t1.emplace_back(q, xedge(ix, iy + 1), -1);
      t1.emplace_back(q, yedge(ix, iy), -1);
    }

  c.delta.resize(2);
  c.delta[0] = from_triplets(n1, n0, t0);
  c.delta[1] = from_triplets(n2, n1, t1);
  return c;
}

const IncidenceMatrix& coboundary(const ChainComplex& c, int k) {
  if (k < 0 || k >= c.dim) throw std::out_of_range("coboundary level out of range");
  return c.delta[static_cast<size_t>(k)];
}

ExactnessReport verify_exact(const ChainComplex& c) {
  ExactnessReport rep;
  for (size_t k = 0; k + 1 < c.delta.size(); ++k) {
    IncidenceMatrix prod = (c.delta[k + 1] * c.delta[k]).pruned();
    int maxabs = 0;
    for (int j = 0; j < prod.outerSize(); ++j)
      for (IncidenceMatrix::InnerIterator it(prod, j); it; ++it)
        maxabs = std::max(maxabs, std::abs(it.value()));
    rep.max_abs.push_back(maxabs);
  }
  rep.pass = std::all_of(rep.max_abs.begin(), rep.max_abs.end(),
                         [](int v) { return v == 0; });
  return rep;
}

void validate(const ChainComplex& c) {
  if (c.counts.size() != static_cast<size_t>(c.dim) + 1)
    throw std::invalid_argument("counts size mismatch");
  if (c.delta.size() != static_cast<size_t>(c.dim))
    throw std::invalid_argument("delta size mismatch");
  for (int k = 0; k < c.dim; ++k) {
    const auto& d = c.delta[static_cast<size_t>(k)];
    if (d.rows() != c.count(k + 1) || d.cols() != c.count(k))
      throw std::invalid_argument("delta shape mismatch at level " + std::to_string(k));
    for (int j = 0; j < d.outerSize(); ++j)
      for (IncidenceMatrix::InnerIterator it(d, j); it; ++it)
        if (it.value() < -1 || it.value() > 1)
          throw std::invalid_argument("incidence entry outside {-1,0,1}");
  }
  if (c.positions.size() != static_cast<size_t>(c.count(0)))
    throw std::invalid_argument("positions size mismatch");
}

ChainComplex remove_cells(const ChainComplex& c, const std::vector<Eigen::Index>& cells) {
  ChainComplex out = c;
  std::vector<bool> drop(static_cast<size_t>(c.count(c.dim)), false);
  for (Eigen::Index i : cells) {
    if (i < 0 || i >= c.count(c.dim)) throw std::out_of_range("cell index out of range");
    drop[static_cast<size_t>(i)] = true;
  }
  const auto& dtop = c.delta.back();
  std::vector<Eigen::Triplet<int>> trips;
  Eigen::Index row = 0;
  std::vector<Eigen::Index> newrow(static_cast<size_t>(dtop.rows()), -1);
  for (Eigen::Index r = 0; r < dtop.rows(); ++r)
    if (!drop[static_cast<size_t>(r)]) newrow[static_cast<size_t>(r)] = row++;
  for (int j = 0; j < dtop.outerSize(); ++j)
    for (IncidenceMatrix::InnerIterator it(dtop, j); it; ++it)
      if (newrow[static_cast<size_t>(it.row())] >= 0)
        trips.emplace_back(newrow[static_cast<size_t>(it.row())], it.col(), it.value());
  IncidenceMatrix d(row, dtop.cols());
  d.setFromTriplets(trips.begin(), trips.end());
  d.makeCompressed();
  out.delta.back() = std::move(d);
  out.counts.back() = row;
  return out;
}

int connected_components(const ChainComplex& c) {
  const Eigen::Index n = c.count(0);
  std::vector<std::vector<Eigen::Index>> edge_nodes(static_cast<size_t>(c.count(1)));
  const auto& d0 = c.delta[0];
  for (int j = 0; j < d0.outerSize(); ++j)
    for (IncidenceMatrix::InnerIterator it(d0, j); it; ++it)
      edge_nodes[static_cast<size_t>(it.row())].push_back(it.col());
  std::vector<std::vector<Eigen::Index>> adj(static_cast<size_t>(n));
  for (const auto& nodes : edge_nodes)
    for (size_t a = 0; a < nodes.size(); ++a)
      for (size_t b = 0; b < nodes.size(); ++b)
        if (a != b) adj[static_cast<size_t>(nodes[a])].push_back(nodes[b]);
  std::vector<bool> seen(static_cast<size_t>(n), false);
  int comps = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (seen[static_cast<size_t>(s)]) continue;
    ++comps;
    std::queue<Eigen::Index> q;
    q.push(s);
    seen[static_cast<size_t>(s)] = true;
    while (!q.empty()) {
      Eigen::Index v = q.front();
      q.pop();
      for (Eigen::Index w : adj[static_cast<size_t>(v)])
        if (!seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = true;
          q.push(w);
        }
    }
  }
  return comps;
}

} // namespace ddec
