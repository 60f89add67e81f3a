#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddec/calculus.hpp"

#include <random>

using namespace ddec;

namespace {

ChainComplex two_node_path() {
  ChainComplex c;
  c.dim = 1;
  c.counts = {2, 1};
  c.delta.resize(1);
  std::vector<Eigen::Triplet<int>> t{{0, 0, -1}, {0, 1, 1}};
  c.delta[0] = IncidenceMatrix(1, 2);
  c.delta[0].setFromTriplets(t.begin(), t.end());
  c.positions = {{0.0, 0.0}, {1.0, 0.0}};
  return c;
}

Eigen::VectorXd randvec(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1p-53);
  return v;
}

Metric random_metric(std::mt19937_64& rng, const ChainComplex& c) {
  Metric m = Metric::identity(c);
  for (int k = 0; k <= c.dim; ++k) {
    m.logB[static_cast<size_t>(k)] = randvec(rng, c.count(k));
    m.logD[static_cast<size_t>(k)] = randvec(rng, c.count(k));
  }
  return m;
}

} // namespace

TEST_CASE("unit metric reduces to the graph calculus") {
  const ChainComplex c = build_cartesian_complex(3, 3, 1.0, 1.0);
  const Metric m = Metric::identity(c);
  std::mt19937_64 rng(1);
  const Cochain u{0, randvec(rng, c.count(0))};
  const Cochain du = apply_d(m, c, 0, u);
  const Eigen::VectorXd ref = c.delta[0].cast<double>() * u.values;
  CHECK((du.values - ref).cwiseAbs().maxCoeff() == 0.0);

  const Cochain v{1, randvec(rng, c.count(1))};
  const Cochain dv = apply_dstar(m, c, 0, v);
  const Eigen::VectorXd ref2 = c.delta[0].cast<double>().transpose() * v.values;
  CHECK((dv.values - ref2).cwiseAbs().maxCoeff() == 0.0);

  CHECK(inner_product(m, 1, v, v) == doctest::Approx(v.values.squaredNorm()).epsilon(1e-15));
}

TEST_CASE("inner product weighted sum") {
  ChainComplex c = two_node_path();
  Metric m = Metric::identity(c);
  m.logD[0] << std::log(2.0), std::log(2.0);
  m.logB[0] << 0.0, std::log(4.0);
  Cochain a{0, Eigen::VectorXd::Ones(2)};
  CHECK(inner_product(m, 0, a, a) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(inner_product(m, 0, Cochain{0, Eigen::VectorXd::Zero(2)}, a) == 0.0);
}

TEST_CASE("exactness and adjointness under random metrics") {
  const ChainComplex c = build_cartesian_complex(4, 3, 1.0, 1.0);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Metric m = random_metric(rng, c);
    const Cochain x{0, randvec(rng, c.count(0))};
    CHECK(apply_d(m, c, 1, apply_d(m, c, 0, x)).values.cwiseAbs().maxCoeff() < 1e-12);
    const Cochain y{2, randvec(rng, c.count(2))};
    CHECK(apply_dstar(m, c, 0, apply_dstar(m, c, 1, y)).values.cwiseAbs().maxCoeff() < 1e-12);
    for (int k = 0; k < 2; ++k) {
      const Cochain u{k, randvec(rng, c.count(k))};
      const Cochain v{k + 1, randvec(rng, c.count(k + 1))};
      const double lhs = inner_product(m, k + 1, apply_d(m, c, k, u), v);
      const double rhs = inner_product(m, k, u, apply_dstar(m, c, k, v));
      CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("commutative diagram identities") {
  const ChainComplex c = build_cartesian_complex(3, 2, 1.0, 1.0);
  std::mt19937_64 rng(3);
  const Metric m = random_metric(rng, c);
  for (int k = 0; k < 2; ++k) {
    const Eigen::MatrixXd delta = c.delta[static_cast<size_t>(k)].cast<double>().toDense();
    const Eigen::MatrixXd lhs = m.B(k + 1).matrix().asDiagonal() * delta;
    const Eigen::MatrixXd rhs = d_matrix(m, c, k) * m.B(k).matrix().asDiagonal();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + lhs.cwiseAbs().maxCoeff()));
    const Eigen::MatrixXd lhs2 = m.D(k).inverse().matrix().asDiagonal() * delta.transpose();
    const Eigen::MatrixXd rhs2 = dstar_matrix(m, c, k) * m.D(k + 1).inverse().matrix().asDiagonal();
    CHECK((lhs2 - rhs2).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + lhs2.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("hodge laplacian") {
  const ChainComplex p = two_node_path();
  const Metric mi = Metric::identity(p);
  const Eigen::MatrixXd L = hodge_laplacian_matrix(mi, p, 0);
  CHECK(L(0, 0) == 1.0);
  CHECK(L(0, 1) == -1.0);
  CHECK(L(1, 0) == -1.0);
  CHECK(L(1, 1) == 1.0);

  const ChainComplex c = build_cartesian_complex(3, 3, 1.0, 1.0);
  const Metric m0 = Metric::identity(c);
  const Eigen::MatrixXd L0 = hodge_laplacian_matrix(m0, c, 0);
  const Eigen::MatrixXd ref = (c.delta[0].transpose() * c.delta[0]).cast<double>().toDense();
  CHECK((L0 - ref).cwiseAbs().maxCoeff() < 1e-14);

  // PSD in the weighted inner product after symmetrization
  std::mt19937_64 rng(11);
  for (int k = 0; k <= 2; ++k) {
    const Metric m = random_metric(rng, c);
    const Eigen::ArrayXd sw = m.weight(k).sqrt();
    Eigen::MatrixXd S = sw.matrix().asDiagonal() * hodge_laplacian_matrix(m, c, k) *
                        sw.inverse().matrix().asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    CHECK(es.eigenvalues().minCoeff() > -1e-10 * es.eigenvalues().cwiseAbs().maxCoeff());
  }
  CHECK_THROWS(hodge_laplacian_matrix(m0, c, 3));
}

TEST_CASE("hodge decomposition") {
  const ChainComplex c = build_cartesian_complex(4, 4, 1.0, 1.0);
  std::mt19937_64 rng(5);
  const Metric m = random_metric(rng, c);

  // pure exact input
  const Cochain x{0, randvec(rng, c.count(0))};
  const Cochain u = apply_d(m, c, 0, x);
  const HodgeParts pe = hodge_decompose(m, c, 1, u);
  CHECK(pe.harmonic.values.cwiseAbs().maxCoeff() < 1e-10 * (1.0 + u.values.cwiseAbs().maxCoeff()));
  CHECK(pe.coexact.values.cwiseAbs().maxCoeff() < 1e-10 * (1.0 + u.values.cwiseAbs().maxCoeff()));

  const HodgeParts pz = hodge_decompose(m, c, 1, Cochain{1, Eigen::VectorXd::Zero(c.count(1))});
  CHECK(pz.exact.values.cwiseAbs().maxCoeff() == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    const Cochain r{1, randvec(rng, c.count(1))};
    const HodgeParts p = hodge_decompose(m, c, 1, r);
    const double scale = 1.0 + norm_k(m, 1, r);
    CHECK((r.values - p.exact.values - p.harmonic.values - p.coexact.values).cwiseAbs().maxCoeff() <
          1e-10 * scale);
    CHECK(std::abs(inner_product(m, 1, p.exact, p.harmonic)) < 1e-10 * scale * scale);
    CHECK(std::abs(inner_product(m, 1, p.exact, p.coexact)) < 1e-10 * scale * scale);
    CHECK(std::abs(inner_product(m, 1, p.harmonic, p.coexact)) < 1e-10 * scale * scale);
  }
}

TEST_CASE("harmonic dimension counts holes") {
  const ChainComplex c = build_cartesian_complex(6, 6, 1.0, 1.0);
  std::mt19937_64 rng(13);
  const Metric m = random_metric(rng, c);
  CHECK(harmonic_dimension(m, c, 1) == 0);

  const ChainComplex holed = remove_cells(c, {14}); // one interior cell
  Metric mh = Metric::identity(holed);
  CHECK(harmonic_dimension(mh, holed, 1) == 1);
}

TEST_CASE("poincare constant") {
  const ChainComplex p = two_node_path();
  const Metric mi = Metric::identity(p);
  CHECK(poincare_constant(mi, p, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  // uniform scaling of D1*B1 scales c by s^{-1/2}
  Metric ms = Metric::identity(p);
  const double s = 3.7;
  ms.logD[1] = Eigen::VectorXd::Constant(1, std::log(s));
  CHECK(poincare_constant(ms, p, 0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * s)).epsilon(1e-12));

  // inequality ||z|| <= c ||d z|| for z in im(d*)
  const ChainComplex c = build_cartesian_complex(4, 3, 1.0, 1.0);
  std::mt19937_64 rng(17);
  const Metric m = random_metric(rng, c);
  const double cp = poincare_constant(m, c, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const Cochain v{1, randvec(rng, c.count(1))};
    const Cochain z = apply_dstar(m, c, 0, v);
    const double lhs = norm_k(m, 0, z);
    const double rhs = cp * norm_k(m, 1, apply_d(m, c, 0, z));
    CHECK(lhs <= rhs * (1.0 + 1e-10));
  }

  // Fiedler sandwich: min(D1 B1) lam_min <= cp^-2 <= max(D1 B1) lam_min.
  // Stated for the level-0 identity metric (c^-2 = lam_min(delta0^T D1 B1 delta0)).
  Metric mf = random_metric(rng, c);
  mf.logB[0].setZero();
  mf.logD[0].setZero();
  const double cpf = poincare_constant(mf, c, 0);
  const Eigen::MatrixXd L = (c.delta[0].transpose() * c.delta[0]).cast<double>().toDense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  double fiedler = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 1e-10 * es.eigenvalues().maxCoeff()) {
      fiedler = es.eigenvalues()[i];
      break;
    }
  const Eigen::ArrayXd db = mf.D(1) * mf.B(1);
  const double inv2 = 1.0 / (cpf * cpf);
  CHECK(inv2 >= db.minCoeff() * fiedler * (1.0 - 1e-10));
  CHECK(inv2 <= db.maxCoeff() * fiedler * (1.0 + 1e-10));
}
