#include "ddec/net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ddec {

Activation activation_from_string(const std::string& name) {
  if (name == "elu") return Activation::Elu;
  if (name == "prelu") return Activation::Prelu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string activation_to_string(Activation a) {
  switch (a) {
    case Activation::Elu: return "elu";
    case Activation::Prelu: return "prelu";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
  }
  throw std::logic_error("bad activation tag");
}

namespace {

double act(Activation a, double alpha, double t) {
  switch (a) {
    case Activation::Elu: return t > 0.0 ? t : std::expm1(t);
    case Activation::Prelu: return t > 0.0 ? t : alpha * t;
    case Activation::Tanh: return std::tanh(t);
    case Activation::Relu: return t > 0.0 ? t : 0.0;
  }
  throw std::logic_error("bad activation tag");
}

// Left derivative at kinks (t = 0 uses the negative-side slope).
double act_deriv(Activation a, double alpha, double t) {
  switch (a) {
    case Activation::Elu: return t > 0.0 ? 1.0 : std::exp(t);
    case Activation::Prelu: return t > 0.0 ? 1.0 : alpha;
    case Activation::Tanh: {
      const double th = std::tanh(t);
      return 1.0 - th * th;
    }
    case Activation::Relu: return t > 0.0 ? 1.0 : 0.0;
  }
  throw std::logic_error("bad activation tag");
}

// d act / d alpha (nonzero only for prelu on the negative side).
double act_alpha_deriv(Activation a, double t) {
  if (a == Activation::Prelu && t <= 0.0) return t;
  return 0.0;
}

struct Trace {
  std::vector<Eigen::VectorXd> inputs; // input to each layer's affine map
  std::vector<Eigen::VectorXd> pre;    // pre-activation per layer
  Eigen::VectorXd out;
};

Trace forward_trace(const Mlp& n, const Eigen::VectorXd& x) {
  if (x.size() != n.input_width()) throw std::invalid_argument("mlp input width mismatch");
  Trace t;
  Eigen::VectorXd h = x;
  for (const auto& layer : n.layers) {
    t.inputs.push_back(h);
    Eigen::VectorXd z = layer.W * h + layer.b;
    t.pre.push_back(z);
    for (Eigen::Index i = 0; i < z.size(); ++i)
      z[i] = act(n.activation, n.prelu_alpha, z[i]);
    h = std::move(z);
  }
  t.out = h;
  return t;
}

// Accumulates d(cot^T raw(x))/d params into grad; returns nothing else.
void backprop_params(const Mlp& n, const Trace& t, const Eigen::VectorXd& cot, double sign,
                     Eigen::VectorXd& grad) {
  const size_t L = n.layers.size();
  Eigen::VectorXd bar = sign * cot; // adjoint of the layer output
  // parameter offsets per layer
  std::vector<Eigen::Index> offset(L);
  Eigen::Index off = 0;
  for (size_t l = 0; l < L; ++l) {
    offset[l] = off;
    off += n.layers[l].W.size() + n.layers[l].b.size();
  }
  double alpha_grad = 0.0;
  for (size_t l = L; l-- > 0;) {
    const auto& layer = n.layers[l];
    const Eigen::VectorXd& z = t.pre[l];
    Eigen::VectorXd zbar(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      alpha_grad += bar[i] * act_alpha_deriv(n.activation, z[i]);
      zbar[i] = bar[i] * act_deriv(n.activation, n.prelu_alpha, z[i]);
    }
    // W is stored row-major in the flat vector
    const Eigen::VectorXd& in = t.inputs[l];
    Eigen::Index p = offset[l];
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c) grad[p++] += zbar[r] * in[c];
    for (Eigen::Index r = 0; r < layer.b.size(); ++r) grad[p++] += zbar[r];
    bar = layer.W.transpose() * zbar;
  }
  if (n.activation == Activation::Prelu) grad[grad.size() - 1] += alpha_grad;
}

} // namespace

Eigen::Index Mlp::param_count() const {
  Eigen::Index n = 0;
  for (const auto& l : layers) n += l.W.size() + l.b.size();
  if (activation == Activation::Prelu) ++n;
  return n;
}

Eigen::VectorXd Mlp::get_params() const {
  Eigen::VectorXd p(param_count());
  Eigen::Index off = 0;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.W.rows(); ++r)
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) p[off++] = l.W(r, c);
    for (Eigen::Index r = 0; r < l.b.size(); ++r) p[off++] = l.b[r];
  }
  if (activation == Activation::Prelu) p[off++] = prelu_alpha;
  return p;
}

void Mlp::set_params(const Eigen::VectorXd& p) {
  if (p.size() != param_count()) throw std::invalid_argument("mlp parameter size mismatch");
  Eigen::Index off = 0;
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.W.rows(); ++r)
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) l.W(r, c) = p[off++];
    for (Eigen::Index r = 0; r < l.b.size(); ++r) l.b[r] = p[off++];
  }
  if (activation == Activation::Prelu)
    prelu_alpha = std::clamp(p[off], 0.0, 1.0); // keep the 1-Lipschitz invariant
}

Mlp mlp_init_he(const std::vector<Eigen::Index>& widths, Activation act, std::uint64_t seed) {
  if (widths.size() < 2) throw std::invalid_argument("mlp needs at least two widths");
  for (Eigen::Index w : widths)
    if (w < 1) throw std::invalid_argument("mlp widths must be positive");
  Mlp n;
  n.activation = act;
  std::mt19937_64 rng(seed);
  // hand-rolled Box-Muller: bit-reproducible across standard libraries
  auto normal = [&rng]() {
    const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
    const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    Mlp::Layer layer;
    layer.W.resize(widths[l + 1], widths[l]);
    const double sd = std::sqrt(2.0 / static_cast<double>(widths[l]));
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c) layer.W(r, c) = sd * normal();
    layer.b = Eigen::VectorXd::Zero(widths[l + 1]);
    n.layers.push_back(std::move(layer));
  }
  return n;
}

Eigen::VectorXd mlp_forward_raw(const Mlp& n, const Eigen::VectorXd& x) {
  return forward_trace(n, x).out;
}

Eigen::VectorXd mlp_forward(const Mlp& n, const Eigen::VectorXd& x) {
  return mlp_forward_raw(n, x) - mlp_forward_raw(n, Eigen::VectorXd::Zero(n.input_width()));
}

Eigen::MatrixXd mlp_jacobian(const Mlp& n, const Eigen::VectorXd& x) {
  const Trace t = forward_trace(n, x);
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n.input_width(), n.input_width());
  for (size_t l = 0; l < n.layers.size(); ++l) {
    Eigen::MatrixXd A = n.layers[l].W * J;
    for (Eigen::Index r = 0; r < A.rows(); ++r)
      A.row(r) *= act_deriv(n.activation, n.prelu_alpha, t.pre[l][r]);
    J = std::move(A);
  }
  return J;
}

Eigen::VectorXd mlp_param_vjp(const Mlp& n, const Eigen::VectorXd& x, const Eigen::VectorXd& cot) {
  if (cot.size() != n.output_width()) throw std::invalid_argument("mlp cotangent width mismatch");
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n.param_count());
  backprop_params(n, forward_trace(n, x), cot, 1.0, grad);
  backprop_params(n, forward_trace(n, Eigen::VectorXd::Zero(n.input_width())), cot, -1.0, grad);
  return grad;
}

double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  // power iteration on M^T M with a fixed pseudo-random start
  std::mt19937_64 rng(0x5eed5eedULL);
  Eigen::VectorXd v(M.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = 0.5 + static_cast<double>(rng() >> 11) * 0x1p-53;
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd w = M.transpose() * (M * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    const double next = nw; // Rayleigh quotient of the normalized iterate
    if (std::abs(next - lambda) <= 1e-8 * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
    v = std::move(w);
  }
  return std::sqrt(lambda);
}

double lipschitz_bound(const Mlp& n, const Metric& m, int k) {
  double prod = 1.0;
  for (const auto& l : n.layers) prod *= spectral_norm(l.W);
  return m.weight(k - 1).maxCoeff() * prod;
}

} // namespace ddec
