#include "ddec/calculus.hpp"

#include <stdexcept>

namespace ddec {

namespace {

void require_level(const ChainComplex& c, const Cochain& u, int k) {
  if (u.level != k) throw std::invalid_argument("cochain level mismatch");
  if (u.values.size() != c.count(k)) throw std::invalid_argument("cochain length mismatch");
}

} // namespace

Metric Metric::identity(const ChainComplex& c) {
  Metric m;
  for (int k = 0; k <= c.dim; ++k) {
    m.logB.push_back(Eigen::VectorXd::Zero(c.count(k)));
    m.logD.push_back(Eigen::VectorXd::Zero(c.count(k)));
  }
  return m;
}

void Metric::check_shapes(const ChainComplex& c) const {
  if (logB.size() != static_cast<size_t>(c.dim) + 1 || logD.size() != logB.size())
    throw std::invalid_argument("metric level count mismatch");
  for (int k = 0; k <= c.dim; ++k)
    if (logB[static_cast<size_t>(k)].size() != c.count(k) ||
        logD[static_cast<size_t>(k)].size() != c.count(k))
      throw std::invalid_argument("metric shape mismatch at level " + std::to_string(k));
}

Cochain apply_d(const Metric& m, const ChainComplex& c, int k, const Cochain& u) {
  if (k < 0 || k >= c.dim) throw std::out_of_range("apply_d level out of range");
  require_level(c, u, k);
  Cochain out;
  out.level = k + 1;
  Eigen::VectorXd scaled = (u.values.array() / m.B(k)).matrix();
  out.values = (m.B(k + 1) *
                (c.delta[static_cast<size_t>(k)].cast<double>() * scaled).array())
                   .matrix();
  return out;
}

Cochain apply_dstar(const Metric& m, const ChainComplex& c, int k, const Cochain& v) {
  if (k < 0 || k >= c.dim) throw std::out_of_range("apply_dstar level out of range");
  require_level(c, v, k + 1);
  Cochain out;
  out.level = k;
  Eigen::VectorXd scaled = (v.values.array() * m.D(k + 1)).matrix();
  out.values =
      ((c.delta[static_cast<size_t>(k)].cast<double>().transpose() * scaled).array() / m.D(k))
          .matrix();
  return out;
}

double inner_product(const Metric& m, int k, const Cochain& a, const Cochain& b) {
  if (a.level != k || b.level != k) throw std::invalid_argument("inner_product level mismatch");
  if (a.values.size() != b.values.size())
    throw std::invalid_argument("inner_product length mismatch");
  return (a.values.array() * b.values.array() * m.weight(k)).sum();
}

Eigen::MatrixXd d_matrix(const Metric& m, const ChainComplex& c, int k) {
  Eigen::MatrixXd delta = c.delta.at(static_cast<size_t>(k)).cast<double>().toDense();
  return m.B(k + 1).matrix().asDiagonal() * delta * m.B(k).inverse().matrix().asDiagonal();
}

Eigen::MatrixXd dstar_matrix(const Metric& m, const ChainComplex& c, int k) {
  Eigen::MatrixXd deltaT = c.delta.at(static_cast<size_t>(k)).cast<double>().toDense().transpose();
  return m.D(k).inverse().matrix().asDiagonal() * deltaT * m.D(k + 1).matrix().asDiagonal();
}

Eigen::MatrixXd hodge_laplacian_matrix(const Metric& m, const ChainComplex& c, int k) {
  if (k < 0 || k > c.dim) throw std::out_of_range("hodge_laplacian level out of range");
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(c.count(k), c.count(k));
  if (k > 0) L += d_matrix(m, c, k - 1) * dstar_matrix(m, c, k - 1);
  if (k < c.dim) L += dstar_matrix(m, c, k) * d_matrix(m, c, k);
  return L;
}

namespace {

// Weighted least-squares projection of u onto the column span of A in the
// diag(w) inner product.
Eigen::VectorXd project_onto(const Eigen::MatrixXd& A, const Eigen::ArrayXd& w,
                             const Eigen::VectorXd& u) {
  if (A.cols() == 0) return Eigen::VectorXd::Zero(u.size());
  Eigen::ArrayXd sw = w.sqrt();
  Eigen::MatrixXd As = sw.matrix().asDiagonal() * A;
  Eigen::VectorXd us = (u.array() * sw).matrix();
  Eigen::VectorXd x = As.completeOrthogonalDecomposition().solve(us);
  return A * x;
}

// Symmetrization of a (.,.)_k-self-adjoint operator: W^{1/2} M W^{-1/2}.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M, const Eigen::ArrayXd& w) {
  Eigen::ArrayXd sw = w.sqrt();
  Eigen::MatrixXd S = sw.matrix().asDiagonal() * M * sw.inverse().matrix().asDiagonal();
  return 0.5 * (S + S.transpose());
}

} // namespace

HodgeParts hodge_decompose(const Metric& m, const ChainComplex& c, int k, const Cochain& u) {
  require_level(c, u, k);
  const Eigen::ArrayXd w = m.weight(k);
  HodgeParts parts;
  parts.exact.level = parts.harmonic.level = parts.coexact.level = k;

  Eigen::MatrixXd Dm(c.count(k), 0), Ds(c.count(k), 0);
  if (k > 0) Dm = d_matrix(m, c, k - 1);
  if (k < c.dim) Ds = dstar_matrix(m, c, k);

  parts.exact.values = project_onto(Dm, w, u.values);
  parts.coexact.values = project_onto(Ds, w, u.values);
  parts.harmonic.values = u.values - parts.exact.values - parts.coexact.values;
  return parts;
}

int harmonic_dimension(const Metric& m, const ChainComplex& c, int k) {
  Eigen::MatrixXd S = symmetrize(hodge_laplacian_matrix(m, c, k), m.weight(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double cutoff = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  return static_cast<int>((ev.array() < cutoff).count());
}

double poincare_constant(const Metric& m, const ChainComplex& c, int k) {
  if (k < 0 || k >= c.dim) throw std::out_of_range("poincare level out of range");
  // d_k^* d_k is self-adjoint in (.,.)_k; its symmetrization is
  // X^T diag(D_{k+1} B_{k+1}) X with X = delta_k B_k^{-1/2} D_k^{-1/2}.
  Eigen::MatrixXd M = dstar_matrix(m, c, k) * d_matrix(m, c, k);
  Eigen::MatrixXd S = symmetrize(M, m.weight(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double maxev = ev.cwiseAbs().maxCoeff();
  if (maxev <= 0.0) throw std::runtime_error("poincare_constant: zero operator");
  const double cutoff = 1e-10 * maxev;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > cutoff) return 1.0 / std::sqrt(ev[i]);
  throw std::runtime_error("poincare_constant: no nontrivial eigenvalue");
}

} // namespace ddec
