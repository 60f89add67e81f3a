#include "ddec/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddec {

namespace {

Eigen::Index row_of(const SurrogateModel& mo, const BoundaryCondition& bc) {
  if (bc.level == mo.k - 1) {
    if (bc.index < 0 || bc.index >= mo.n_w()) throw std::out_of_range("bc index out of range");
    return bc.index;
  }
  if (bc.level == mo.k) {
    if (bc.index < 0 || bc.index >= mo.n_u()) throw std::out_of_range("bc index out of range");
    return mo.n_w() + bc.index;
  }
  throw std::invalid_argument("bc level must be k-1 or k");
}

void check_model(const SurrogateModel& mo) {
  if (mo.k < 1 || mo.k > mo.complex.dim) throw std::invalid_argument("problem index k out of range");
  mo.metric.check_shapes(mo.complex);
  if (mo.source.level != mo.k || mo.source.values.size() != mo.n_u())
    throw std::invalid_argument("source cochain shape mismatch");
  if (mo.net.input_width() != mo.n_w() || mo.net.output_width() != mo.n_w())
    throw std::invalid_argument("net width must equal level k-1 dimension");
}

} // namespace

std::vector<Eigen::Index> SurrogateModel::replaced_rows() const {
  std::vector<Eigen::Index> rows;
  rows.reserve(bcs.size() + 1);
  for (const auto& bc : bcs) rows.push_back(row_of(*this, bc));
  if (pin) rows.push_back(row_of(*this, *pin));
  return rows;
}

Eigen::Index SurrogateModel::param_count() const {
  Eigen::Index n = 0;
  for (int k2 = 0; k2 <= complex.dim; ++k2) n += 2 * complex.count(k2);
  return n + net.param_count();
}

Eigen::VectorXd SurrogateModel::get_params() const {
  Eigen::VectorXd p(param_count());
  Eigen::Index off = 0;
  for (int k2 = 0; k2 <= complex.dim; ++k2) {
    p.segment(off, complex.count(k2)) = metric.logB[static_cast<size_t>(k2)];
    off += complex.count(k2);
  }
  for (int k2 = 0; k2 <= complex.dim; ++k2) {
    p.segment(off, complex.count(k2)) = metric.logD[static_cast<size_t>(k2)];
    off += complex.count(k2);
  }
  p.segment(off, net.param_count()) = net.get_params();
  return p;
}

void SurrogateModel::set_params(const Eigen::VectorXd& p) {
  if (p.size() != param_count()) throw std::invalid_argument("model parameter size mismatch");
  Eigen::Index off = 0;
  for (int k2 = 0; k2 <= complex.dim; ++k2) {
    metric.logB[static_cast<size_t>(k2)] = p.segment(off, complex.count(k2));
    off += complex.count(k2);
  }
  for (int k2 = 0; k2 <= complex.dim; ++k2) {
    metric.logD[static_cast<size_t>(k2)] = p.segment(off, complex.count(k2));
    off += complex.count(k2);
  }
  net.set_params(p.segment(off, net.param_count()));
}

Eigen::VectorXd State::pack() const {
  Eigen::VectorXd v(w.values.size() + u.values.size());
  v << w.values, u.values;
  return v;
}

State State::unpack(const SurrogateModel& mo, const Eigen::VectorXd& v) {
  if (v.size() != mo.state_size()) throw std::invalid_argument("state vector size mismatch");
  State s;
  s.w.level = mo.k - 1;
  s.w.values = v.head(mo.n_w());
  s.u.level = mo.k;
  s.u.values = v.tail(mo.n_u());
  return s;
}

State State::zero(const SurrogateModel& mo) {
  State s;
  s.w.level = mo.k - 1;
  s.w.values = Eigen::VectorXd::Zero(mo.n_w());
  s.u.level = mo.k;
  s.u.values = Eigen::VectorXd::Zero(mo.n_u());
  return s;
}

Eigen::VectorXd residual(const SurrogateModel& mo, const State& s) {
  check_model(mo);
  if (s.w.level != mo.k - 1 || s.u.level != mo.k || s.w.values.size() != mo.n_w() ||
      s.u.values.size() != mo.n_u())
    throw std::invalid_argument("state shape mismatch");

  const Eigen::VectorXd q = apply_dstar(mo.metric, mo.complex, mo.k - 1, s.u).values;
  Eigen::VectorXd r1 = s.w.values - q;
  if (mo.epsilon != 0.0) r1 -= mo.epsilon * mlp_forward(mo.net, q);

  Eigen::VectorXd r2 = apply_d(mo.metric, mo.complex, mo.k - 1, s.w).values;
  if (mo.k < mo.complex.dim) {
    const Cochain du = apply_d(mo.metric, mo.complex, mo.k, s.u);
    r2 += apply_dstar(mo.metric, mo.complex, mo.k, du).values;
  }
  r2 -= mo.source.values;

  Eigen::VectorXd r(mo.state_size());
  r << r1, r2;

  const Eigen::VectorXd packed = s.pack();
  for (const auto& bc : mo.bcs) {
    const Eigen::Index row = row_of(mo, bc);
    r[row] = packed[row] - bc.value;
  }
  if (mo.pin) {
    const Eigen::Index row = row_of(mo, *mo.pin);
    r[row] = packed[row] - mo.pin->value;
  }
  return r;
}

Eigen::MatrixXd jacobian_state(const SurrogateModel& mo, const State& s) {
  check_model(mo);
  const Eigen::Index nw = mo.n_w(), nu = mo.n_u();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nw + nu, nw + nu);

  const Eigen::MatrixXd Dstar = dstar_matrix(mo.metric, mo.complex, mo.k - 1);
  J.topLeftCorner(nw, nw).setIdentity();
  if (mo.epsilon != 0.0) {
    const Eigen::VectorXd q = Dstar * s.u.values;
    const Eigen::MatrixXd Jnn = mlp_jacobian(mo.net, q);
    J.topRightCorner(nw, nu) =
        -(Eigen::MatrixXd::Identity(nw, nw) + mo.epsilon * Jnn) * Dstar;
  } else {
    J.topRightCorner(nw, nu) = -Dstar;
  }

  J.bottomLeftCorner(nu, nw) = d_matrix(mo.metric, mo.complex, mo.k - 1);
  if (mo.k < mo.complex.dim)
    J.bottomRightCorner(nu, nu) =
        dstar_matrix(mo.metric, mo.complex, mo.k) * d_matrix(mo.metric, mo.complex, mo.k);

  for (Eigen::Index row : mo.replaced_rows()) {
    J.row(row).setZero();
    J(row, row) = 1.0;
  }
  return J;
}

Eigen::VectorXd param_vjp(const SurrogateModel& mo, const State& s, const Eigen::VectorXd& lam) {
  check_model(mo);
  if (lam.size() != mo.state_size()) throw std::invalid_argument("multiplier size mismatch");

  // BC/pin rows are parameter-independent: mask their multipliers.
  Eigen::VectorXd l = lam;
  for (Eigen::Index row : mo.replaced_rows()) l[row] = 0.0;
  const Eigen::VectorXd l1 = l.head(mo.n_w());
  const Eigen::VectorXd l2 = l.tail(mo.n_u());

  const int dim = mo.complex.dim;
  std::vector<Eigen::VectorXd> gB(static_cast<size_t>(dim) + 1), gD(static_cast<size_t>(dim) + 1);
  for (int k2 = 0; k2 <= dim; ++k2) {
    gB[static_cast<size_t>(k2)] = Eigen::VectorXd::Zero(mo.complex.count(k2));
    gD[static_cast<size_t>(k2)] = Eigen::VectorXd::Zero(mo.complex.count(k2));
  }
  const int k = mo.k;
  const Eigen::MatrixXd deltaKm1 =
      mo.complex.delta[static_cast<size_t>(k - 1)].cast<double>().toDense();

  // --- R1 = w - q - eps NN(q),  q = D_{k-1}^{-1} delta^T D_k u ---
  const Eigen::ArrayXd Dkm1 = mo.metric.D(k - 1), Dk = mo.metric.D(k);
  const Eigen::VectorXd su = (s.u.values.array() * Dk).matrix(); // D_k u
  const Eigen::VectorXd q = ((deltaKm1.transpose() * su).array() / Dkm1).matrix();

  Eigen::VectorXd mu = -l1; // cotangent on q
  Eigen::VectorXd gnet = Eigen::VectorXd::Zero(mo.net.param_count());
  if (mo.epsilon != 0.0) {
    mu -= mo.epsilon * (mlp_jacobian(mo.net, q).transpose() * l1);
    gnet = -mo.epsilon * mlp_param_vjp(mo.net, q, l1);
  }
  gD[static_cast<size_t>(k - 1)] -= (mu.array() * q.array()).matrix(); // through D_{k-1}^{-1}
  {
    const Eigen::VectorXd nu = (mu.array() / Dkm1).matrix();
    const Eigen::VectorXd cot_su = deltaKm1 * nu;
    gD[static_cast<size_t>(k)] += (cot_su.array() * su.array()).matrix(); // through D_k
  }

  // --- R2 term A = B_k delta B_{k-1}^{-1} w ---
  const Eigen::ArrayXd Bkm1 = mo.metric.B(k - 1), Bk = mo.metric.B(k);
  {
    const Eigen::VectorXd s1 = (s.w.values.array() / Bkm1).matrix();
    const Eigen::VectorXd t1 = deltaKm1 * s1;
    const Eigen::VectorXd A = (t1.array() * Bk).matrix();
    gB[static_cast<size_t>(k)] += (l2.array() * A.array()).matrix();
    const Eigen::VectorXd cot_s1 = deltaKm1.transpose() * (l2.array() * Bk).matrix();
    gB[static_cast<size_t>(k - 1)] -= (cot_s1.array() * s1.array()).matrix();
  }

  // --- R2 term C = D_k^{-1} delta_k^T D_{k+1} B_{k+1} delta_k B_k^{-1} u ---
  if (k < dim) {
    const Eigen::MatrixXd deltaK = mo.complex.delta[static_cast<size_t>(k)].cast<double>().toDense();
    const Eigen::ArrayXd Bkp1 = mo.metric.B(k + 1), Dkp1 = mo.metric.D(k + 1);
    const Eigen::VectorXd a = (s.u.values.array() / Bk).matrix();
    const Eigen::VectorXd b = deltaK * a;
    const Eigen::VectorXd c = (b.array() * Bkp1).matrix();
    const Eigen::VectorXd d = (c.array() * Dkp1).matrix();
    const Eigen::VectorXd C = ((deltaK.transpose() * d).array() / Dk).matrix();
    gD[static_cast<size_t>(k)] -= (l2.array() * C.array()).matrix();
    const Eigen::VectorXd cot_e = (l2.array() / Dk).matrix();
    const Eigen::VectorXd cot_d = deltaK * cot_e;
    gD[static_cast<size_t>(k + 1)] += (cot_d.array() * d.array()).matrix();
    const Eigen::VectorXd cot_c = (cot_d.array() * Dkp1).matrix();
    gB[static_cast<size_t>(k + 1)] += (cot_c.array() * c.array()).matrix();
    const Eigen::VectorXd cot_a = deltaK.transpose() * (cot_c.array() * Bkp1).matrix();
    gB[static_cast<size_t>(k)] -= (cot_a.array() * a.array()).matrix();
  }

  Eigen::VectorXd g(mo.param_count());
  Eigen::Index off = 0;
  for (int k2 = 0; k2 <= dim; ++k2) {
    g.segment(off, mo.complex.count(k2)) = gB[static_cast<size_t>(k2)];
    off += mo.complex.count(k2);
  }
  for (int k2 = 0; k2 <= dim; ++k2) {
    g.segment(off, mo.complex.count(k2)) = gD[static_cast<size_t>(k2)];
    off += mo.complex.count(k2);
  }
  g.segment(off, mo.net.param_count()) = gnet;
  return g;
}

double epsilon_max(const SurrogateModel& mo) {
  const double L = lipschitz_bound(mo.net, mo.metric, mo.k);
  if (L == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / L;
}

double conservation_defect(const SurrogateModel& mo, const State& s) {
  const Eigen::VectorXd flux = (s.w.values.array() / mo.metric.B(mo.k - 1)).matrix();
  const Eigen::VectorXd div =
      mo.complex.delta[static_cast<size_t>(mo.k - 1)].cast<double>() * flux;
  const Eigen::VectorXd src = (mo.source.values.array() / mo.metric.B(mo.k)).matrix();
  return std::abs((div - src).sum());
}

double energy_norm(const SurrogateModel& mo, const Cochain& u) {
  double sq = 0.0;
  if (u.level > 0) {
    const Cochain du = apply_dstar(mo.metric, mo.complex, u.level - 1, u);
    sq += inner_product(mo.metric, u.level - 1, du, du);
  }
  if (u.level < mo.complex.dim) {
    const Cochain du = apply_d(mo.metric, mo.complex, u.level, u);
    sq += inner_product(mo.metric, u.level + 1, du, du);
  }
  return std::sqrt(sq);
}

} // namespace ddec
