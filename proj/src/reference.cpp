#include "ddec/reference.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddec {

double mu_alpha(const Eigen::Vector2d& x, const MaterialSpec& mat) {
  if (!(mat.a > 0.0) || !(mat.alpha > 0.0))
    throw std::invalid_argument("material requires a > 0 and alpha > 0");
  return (x - mat.center).norm() < mat.a ? mat.alpha : 1.0;
}

CaseTag case_from_string(const std::string& name) {
  if (name == "d1") return CaseTag::D1;
  if (name == "d2") return CaseTag::D2;
  if (name == "magneto") return CaseTag::Magneto;
  throw std::invalid_argument("unknown case: " + name);
}

std::string case_to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::D1: return "d1";
    case CaseTag::D2: return "d2";
    case CaseTag::Magneto: return "magneto";
  }
  throw std::logic_error("bad case tag");
}

std::vector<double> default_alphas(CaseTag tag) {
  if (tag == CaseTag::D1) return {10.0};
  return {1.0, 2.0, 4.0};
}

namespace {

double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

// Replaces the listed rows of a sparse matrix with unit rows.
Eigen::SparseMatrix<double> with_unit_rows(const Eigen::SparseMatrix<double>& A,
                                           const std::vector<char>& replace) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(A.nonZeros()));
  for (int j = 0; j < A.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, j); it; ++it)
      if (!replace[static_cast<size_t>(it.row())])
        trips.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    if (replace[static_cast<size_t>(r)]) trips.emplace_back(r, r, 1.0);
  Eigen::SparseMatrix<double> out(A.rows(), A.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

} // namespace

FineDarcy solve_darcy_fine(int nx, int ny, const MaterialSpec& mat, const Eigen::Vector2d& fbar,
                           const Eigen::VectorXd& f_cells) {
  const ChainComplex c = build_cartesian_complex(nx, ny, 1.0, 1.0);
  const Eigen::Index n1 = c.count(1), n2 = c.count(2);
  if (f_cells.size() != n2) throw std::invalid_argument("source length mismatch");
  const double hx = 1.0 / nx, hy = 1.0 / ny;
  const Eigen::Index nEx = cartesian_x_edge_count(nx, ny);

  Eigen::VectorXd mu(n2);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      mu[static_cast<Eigen::Index>(iy) * nx + ix] =
          mu_alpha({(ix + 0.5) * hx, (iy + 0.5) * hy}, mat);

  // edge transmissibilities (0 at boundary edges) and prescribed fluxes
  Eigen::VectorXd T = Eigen::VectorXd::Zero(n1);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n1);
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const Eigen::Index e = static_cast<Eigen::Index>(iy) * nx + ix;
      if (iy == 0 || iy == ny)
        g[e] = -fbar.y() * hx; // n_hat of an x-edge is (0,-1)
      else
        T[e] = harmonic_mean(mu[static_cast<Eigen::Index>(iy - 1) * nx + ix],
                             mu[static_cast<Eigen::Index>(iy) * nx + ix]) *
               hx / hy;
    }
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix) {
      const Eigen::Index e = nEx + static_cast<Eigen::Index>(iy) * (nx + 1) + ix;
      if (ix == 0 || ix == nx)
        g[e] = fbar.x() * hy; // n_hat of a y-edge is (+1,0)
      else
        T[e] = harmonic_mean(mu[static_cast<Eigen::Index>(iy) * nx + ix - 1],
                             mu[static_cast<Eigen::Index>(iy) * nx + ix]) *
               hy / hx;
    }

  const Eigen::SparseMatrix<double> d1 = c.delta[1].cast<double>();
  Eigen::SparseMatrix<double> A = d1 * T.asDiagonal() * Eigen::SparseMatrix<double>(d1.transpose());
  Eigen::VectorXd rhs = f_cells - d1 * g;
  std::vector<char> pinrow(static_cast<size_t>(n2), 0);
  pinrow[0] = 1; // potential defined up to a constant: pin cell 0 at zero
  A = with_unit_rows(A, pinrow);
  rhs[0] = 0.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("darcy fine system singular");
  Eigen::VectorXd phi = lu.solve(rhs);
  // iterative refinement: the per-cell balance must hold to near round-off
  for (int pass = 0; pass < 2; ++pass) phi += lu.solve(rhs - A * phi);

  FineDarcy out;
  out.phi = {2, phi};
  Eigen::VectorXd w = (d1.transpose() * phi).cwiseProduct(T);
  for (Eigen::Index e = 0; e < n1; ++e)
    if (T[e] == 0.0) w[e] = g[e];
  out.flux = {1, w};
  out.source = {2, f_cells};
  out.g = g;
  return out;
}

FineMagneto solve_magnetostatics_fine(int nx, int ny, const MaterialSpec& mat, double g) {
  const ChainComplex c = build_cartesian_complex(nx, ny, 1.0, 1.0);
  const Eigen::Index n0 = c.count(0), n1 = c.count(1);
  const Eigen::SparseMatrix<double> d0 = c.delta[0].cast<double>();

  std::vector<char> bnode(static_cast<size_t>(n0), 0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n0);
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix)
      if (ix == 0 || ix == nx || iy == 0 || iy == ny) {
        const Eigen::Index i = static_cast<Eigen::Index>(iy) * (nx + 1) + ix;
        bnode[static_cast<size_t>(i)] = 1;
        rhs[i] = g / mu_alpha(c.positions[static_cast<size_t>(i)], mat); // J = B/mu = g on the boundary
      }

  // curl-free scalar current: Laplacian rows interior, J prescribed on the boundary
  Eigen::SparseMatrix<double> L = Eigen::SparseMatrix<double>(d0.transpose()) * d0;
  L = with_unit_rows(L, bnode);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(L);
  if (lu.info() != Eigen::Success) throw std::runtime_error("magnetostatics system singular");
  const Eigen::VectorXd J = lu.solve(rhs);

  Eigen::VectorXd B(n0);
  for (Eigen::Index i = 0; i < n0; ++i)
    B[i] = mu_alpha(c.positions[static_cast<size_t>(i)], mat) * J[i];

  // gauged potential: delta0^T A = B at interior nodes, A = 0 on boundary
  // edges, minimum norm
  const Eigen::Index nEx = cartesian_x_edge_count(nx, ny);
  std::vector<Eigen::Index> bedges;
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      if (iy == 0 || iy == ny) bedges.push_back(static_cast<Eigen::Index>(iy) * nx + ix);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix)
      if (ix == 0 || ix == nx)
        bedges.push_back(nEx + static_cast<Eigen::Index>(iy) * (nx + 1) + ix);

  const Eigen::Index n_int =
      n0 - static_cast<Eigen::Index>(std::count(bnode.begin(), bnode.end(), 1));
  Eigen::MatrixXd C(n_int + static_cast<Eigen::Index>(bedges.size()), n1);
  Eigen::VectorXd b(C.rows());
  const Eigen::MatrixXd d0T = Eigen::MatrixXd(d0).transpose();
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n0; ++i)
    if (!bnode[static_cast<size_t>(i)]) {
      C.row(row) = d0T.row(i);
      b[row++] = B[i];
    }
  for (Eigen::Index e : bedges) {
    C.row(row).setZero();
    C(row, e) = 1.0;
    b[row++] = 0.0;
  }
  const Eigen::VectorXd A = C.completeOrthogonalDecomposition().solve(b);

  FineMagneto out;
  out.B = {0, B};
  out.A = {1, A};
  return out;
}

namespace {

std::vector<Eigen::Index> coarse_boundary_nodes(const CoarseComplex& cc,
                                                const ChainComplex& fine) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : fine.positions) {
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
  }
  const double tol = 1e-9 * std::max(x1 - x0, y1 - y0);
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < cc.coarse.count(0); ++i) {
    const auto& p = cc.coarse.positions[static_cast<size_t>(i)];
    if (std::abs(p.x() - x0) < tol || std::abs(p.x() - x1) < tol ||
        std::abs(p.y() - y0) < tol || std::abs(p.y() - y1) < tol)
      out.push_back(i);
  }
  return out;
}

} // namespace

Dataset generate_dataset(const CaseSpec& spec) {
  if (spec.alphas.empty()) throw std::invalid_argument("alpha list must be nonempty");
  Dataset ds;
  ds.fine = build_cartesian_complex(spec.fine_n, spec.fine_n, 1.0, 1.0);
  const std::vector<int> labels =
      block_partition(ds.fine, spec.fine_n, spec.fine_n, spec.px, spec.py);
  ds.cc = build_coarse(ds.fine, labels);
  ds.alphas = spec.alphas;
  ds.k = spec.tag == CaseTag::Magneto ? 1 : 2;

  const Eigen::Index nw = ds.cc.coarse.count(ds.k - 1);
  const Eigen::Index nu = ds.cc.coarse.count(ds.k);

  for (double alpha : spec.alphas) {
    MaterialSpec mat = spec.mat;
    mat.alpha = alpha;
    Sample s;
    if (spec.tag == CaseTag::Magneto) {
      const FineMagneto fm = solve_magnetostatics_fine(spec.fine_n, spec.fine_n, mat, alpha);
      const Cochain wc = restrict_cochain(ds.cc.map, fm.B);
      for (Eigen::Index i : coarse_boundary_nodes(ds.cc, ds.fine))
        s.bcs.push_back({0, i, wc.values[i]});
      for (Eigen::Index e = ds.cc.n_interface_edges;
           e < ds.cc.n_interface_edges + ds.cc.n_boundary_edges; ++e)
        s.bcs.push_back({1, e, 0.0}); // boundary edge potential gauged to zero
      s.f = {1, Eigen::VectorXd::Zero(nu)};
      s.data = wc.values;
      s.mask.resize(static_cast<size_t>(nw));
      for (Eigen::Index i = 0; i < nw; ++i) s.mask[static_cast<size_t>(i)] = i;
    } else {
      const Eigen::Vector2d fbar(spec.tag == CaseTag::D1 ? 1.0 : alpha, 0.0);
      const FineDarcy fd = solve_darcy_fine(spec.fine_n, spec.fine_n, mat, fbar,
                                            Eigen::VectorXd::Zero(ds.fine.count(2)));
      const Cochain wc = restrict_cochain(ds.cc.map, fd.flux);
      const Cochain uc = restrict_cochain(ds.cc.map, fd.phi);
      for (Eigen::Index e = ds.cc.n_interface_edges;
           e < ds.cc.n_interface_edges + ds.cc.n_boundary_edges; ++e)
        s.bcs.push_back({1, e, wc.values[e]});
      s.pin = BoundaryCondition{2, 0, uc.values[0]};
      s.f = restrict_cochain(ds.cc.map, fd.source);
      s.data.resize(nw + nu);
      s.data << wc.values, uc.values;
      s.mask.resize(static_cast<size_t>(nw + nu));
      for (Eigen::Index i = 0; i < nw + nu; ++i) s.mask[static_cast<size_t>(i)] = i;
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

SurrogateModel initial_model(const Dataset& ds, Activation act,
                             const std::vector<Eigen::Index>& hidden, double epsilon,
                             std::uint64_t seed) {
  SurrogateModel mo;
  mo.complex = ds.cc.coarse;
  mo.metric = Metric::identity(mo.complex);
  mo.k = ds.k;
  mo.epsilon = epsilon;
  const Eigen::Index nw = mo.n_w();
  std::vector<Eigen::Index> widths;
  widths.push_back(nw);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(nw);
  mo.net = mlp_init_he(widths, act, seed);
  if (!ds.samples.empty()) {
    mo.bcs = ds.samples.front().bcs;
    mo.pin = ds.samples.front().pin;
    mo.source = ds.samples.front().f;
  } else {
    mo.source = {mo.k, Eigen::VectorXd::Zero(mo.n_u())};
  }
  return mo;
}

} // namespace ddec
