#pragma once

#include "ddec/calculus.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ddec {

enum class Activation { Elu, Prelu, Tanh, Relu };

Activation activation_from_string(const std::string& name);
std::string activation_to_string(Activation a);

/// Dense feed-forward net psi_L . T_L . ... . psi_1 . T_1 with a single
/// 1-Lipschitz activation tag. The model-facing forward is the zero-flux
/// wrapper raw(x) - raw(0), so NN(0) = 0 holds structurally for any
/// weights. prelu has one global learnable slope clamped to [0,1].
struct Mlp {
  struct Layer {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
  };
  std::vector<Layer> layers;
  Activation activation = Activation::Elu;
  double prelu_alpha = 0.25; // used only when activation == Prelu

  Eigen::Index input_width() const { return layers.front().W.cols(); }
  Eigen::Index output_width() const { return layers.back().W.rows(); }

  /// Total parameter count: all weights + biases (+ prelu slope).
  Eigen::Index param_count() const;
  /// Flat parameter vector, per layer row-major W then b, prelu slope last.
  Eigen::VectorXd get_params() const;
  void set_params(const Eigen::VectorXd& p);
};

/// He-initialized net: W ~ N(0, 2/fan_in), b = 0, deterministic in seed.
Mlp mlp_init_he(const std::vector<Eigen::Index>& widths, Activation act, std::uint64_t seed);

/// Unwrapped composition psi_L(T_L(...)).
Eigen::VectorXd mlp_forward_raw(const Mlp& n, const Eigen::VectorXd& x);

/// Zero-flux forward: raw(x) - raw(0).
Eigen::VectorXd mlp_forward(const Mlp& n, const Eigen::VectorXd& x);

/// Exact input Jacobian of mlp_forward at x (raw(0) is constant in x, so
/// this equals the raw Jacobian).
Eigen::MatrixXd mlp_jacobian(const Mlp& n, const Eigen::VectorXd& x);

/// Gradient of cot^T mlp_forward(x) with respect to the flat parameter
/// vector (includes the -raw(0) branch).
Eigen::VectorXd mlp_param_vjp(const Mlp& n, const Eigen::VectorXd& x, const Eigen::VectorXd& cot);

/// Spectral norm by power iteration (tol 1e-8, <= 500 iterations).
double spectral_norm(const Eigen::MatrixXd& M);

/// L_N <= max_i (D_{k-1}/B_{k-1})_i * prod_l sigma_max(M_l); Lipschitz
/// upper bound of the wrapped net in the level-(k-1) weighted norm.
double lipschitz_bound(const Mlp& n, const Metric& m, int k);

} // namespace ddec
