#include "ddec/train.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <ostream>
#include <stdexcept>

namespace ddec {

double loss(const State& s, const Sample& sample) {
  const Eigen::VectorXd packed = s.pack();
  double l = 0.0;
  for (size_t i = 0; i < sample.mask.size(); ++i) {
    const double m = packed[sample.mask[i]] - sample.data[static_cast<Eigen::Index>(i)];
    l += m * m;
  }
  return l;
}

Eigen::VectorXd lagrangian_grad(const SurrogateModel& mo, const State& s,
                                const Eigen::VectorXd& lam) {
  return param_vjp(mo, s, lam);
}

Eigen::VectorXd adam_step(AdamState& opt, const Eigen::VectorXd& params,
                          const Eigen::VectorXd& grads, double lr, const TrainConfig& cfg) {
  if (opt.t == 0) {
    opt.m = Eigen::VectorXd::Zero(params.size());
    opt.v = Eigen::VectorXd::Zero(params.size());
  }
  ++opt.t;
  opt.m = cfg.beta1 * opt.m + (1.0 - cfg.beta1) * grads;
  opt.v = cfg.beta2 * opt.v + (1.0 - cfg.beta2) * grads.cwiseProduct(grads).eval();
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.t));
  const Eigen::ArrayXd mhat = opt.m.array() / bc1;
  const Eigen::ArrayXd vhat = opt.v.array() / bc2;
  return params.array() - lr * mhat / (vhat.sqrt() + cfg.adam_eps);
}

std::vector<bool> trainable_mask(const SurrogateModel& mo) {
  const int dim = mo.complex.dim;
  const int k = mo.k;
  std::vector<bool> mask(static_cast<size_t>(mo.param_count()), false);
  Eigen::Index off = 0;
  auto set_level = [&](int level, bool on) {
    const Eigen::Index n = mo.complex.count(level);
    if (on)
      for (Eigen::Index i = 0; i < n; ++i) mask[static_cast<size_t>(off + i)] = true;
    off += n;
  };
  for (int k2 = 0; k2 <= dim; ++k2) {
    // freezing all logB for k == dim keeps the conservation rows
    // parameter-independent (the pinned cell's balance stays exact)
    const bool used = k < dim && (k2 == k - 1 || k2 == k || k2 == k + 1);
    set_level(k2, used);
  }
  for (int k2 = 0; k2 <= dim; ++k2) {
    const bool used = k2 == k - 1 || k2 == k || (k < dim && k2 == k + 1);
    set_level(k2, used);
  }
  const bool net_on = mo.epsilon > 0.0;
  for (Eigen::Index i = 0; i < mo.net.param_count(); ++i)
    mask[static_cast<size_t>(off + i)] = net_on;
  return mask;
}

namespace {

void apply_sample(SurrogateModel& mo, const Sample& sample) {
  mo.bcs = sample.bcs;
  mo.pin = sample.pin;
  mo.source = sample.f;
}

} // namespace

TrainResult train(const SurrogateModel& mo0, const std::vector<Sample>& dataset,
                  const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");

  TrainResult res;
  res.model = mo0;
  SurrogateModel& mo = res.model;
  const std::vector<bool> mask = trainable_mask(mo);
  AdamState opt;
  std::vector<State> states(dataset.size(), State::zero(mo));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (!cfg.warm_start)
      for (auto& s : states) s = State::zero(mo);
    Eigen::VectorXd batch_grad;
    double max_loss = 0.0;
    for (size_t i = 0; i < dataset.size(); ++i) {
      apply_sample(mo, dataset[i]);
      const double tol = cfg.newton_tol > 0.0 ? cfg.newton_tol : default_tolerance(mo);
      auto [s, rep] = newton_solve(mo, states[i], tol, cfg.newton_maxit);
      if (!rep.converged)
        throw std::runtime_error("forward solve failed at epoch " + std::to_string(epoch) +
                                 ", sample " + std::to_string(i) + " (residual " +
                                 std::to_string(rep.residual_norms.back()) + ")");
      states[i] = s;

      const Eigen::VectorXd lam = adjoint_solve(mo, s, dataset[i].data, dataset[i].mask);
      Eigen::VectorXd g = lagrangian_grad(mo, s, lam);
      for (Eigen::Index j = 0; j < g.size(); ++j)
        if (!mask[static_cast<size_t>(j)]) g[j] = 0.0;
      const double gn = g.norm();
      if (cfg.clip_norm > 0.0 && gn > cfg.clip_norm) g *= cfg.clip_norm / gn;

      const double l = loss(s, dataset[i]);
      max_loss = std::max(max_loss, l);
      HistoryRow row;
      row.epoch = epoch;
      row.sample = static_cast<int>(i);
      row.loss = l;
      row.forward_residual = rep.residual_norms.back();
      row.eps_lipschitz = mo.epsilon * lipschitz_bound(mo.net, mo.metric, mo.k);
      row.grad_norm = gn;
      res.history.push_back(row);

      if (cfg.batch_average) {
        if (batch_grad.size() == 0) batch_grad = g;
        else batch_grad += g;
      } else {
        mo.set_params(adam_step(opt, mo.get_params(), g, cfg.learning_rate, cfg));
      }
      if (mo.epsilon > 0.0 && mo.epsilon >= 0.95 * epsilon_max(mo)) {
        mo.epsilon *= 0.5;
        std::cerr << "epoch " << epoch << ": epsilon halved to " << mo.epsilon
                  << " (well-posedness margin)\n";
      }
    }
    if (cfg.batch_average) {
      batch_grad /= static_cast<double>(dataset.size());
      mo.set_params(adam_step(opt, mo.get_params(), batch_grad, cfg.learning_rate, cfg));
    }
    res.final_max_loss = max_loss;
    if (cfg.loss_target > 0.0 && max_loss < cfg.loss_target) {
      res.reached_target = true;
      break;
    }
  }
  if (cfg.loss_target > 0.0 && res.final_max_loss < cfg.loss_target) res.reached_target = true;
  res.states = std::move(states);
  return res;
}

void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& history) {
  os << "epoch,sample,loss,forward_residual,eps_lipschitz,grad_norm\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g", r.epoch, r.sample, r.loss,
                  r.forward_residual, r.eps_lipschitz, r.grad_norm);
    os << buf << "\n";
  }
}

} // namespace ddec
