#pragma once

#include "ddec/solve.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ddec {

/// One training instance: per-sample boundary data, source, and observed
/// entries of the packed (w, u) state.
struct Sample {
  std::vector<BoundaryCondition> bcs;
  std::optional<BoundaryCondition> pin;
  Cochain f;                        // level-k source
  std::vector<Eigen::Index> mask;   // observed packed-state indices
  Eigen::VectorXd data;             // one value per mask entry
};

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double newton_tol = -1.0; // <= 0: use default_tolerance(model)
  int newton_maxit = 50;
  std::uint64_t seed = 0;
  bool warm_start = false;     // Algorithm-1 verbatim resets states each epoch
  bool batch_average = false;  // one averaged update per epoch instead of per sample
  double clip_norm = 100.0;    // global gradient clip; <= 0 disables
  double loss_target = 0.0;    // stop once every per-sample loss is below; 0 disables
};

struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;
};

struct HistoryRow {
  int epoch = 0;
  int sample = 0;
  double loss = 0.0;
  double forward_residual = 0.0;
  double eps_lipschitz = 0.0; // epsilon * L_N at this iterate
  double grad_norm = 0.0;
};

struct TrainResult {
  SurrogateModel model;
  std::vector<HistoryRow> history;
  std::vector<State> states; // final per-sample forward solutions
  double final_max_loss = 0.0;
  bool reached_target = false;
};

/// Squared Euclidean norm of the masked mismatch.
double loss(const State& s, const Sample& sample);

/// Gradient of the Lagrangian in xi at a (forward, adjoint) pair; the
/// mismatch term carries no explicit xi-dependence, so this is param_vjp.
Eigen::VectorXd lagrangian_grad(const SurrogateModel& mo, const State& s,
                                const Eigen::VectorXd& lam);

/// Standard bias-corrected Adam update: returns the new parameter vector.
Eigen::VectorXd adam_step(AdamState& opt, const Eigen::VectorXd& params,
                          const Eigen::VectorXd& grads, double lr, const TrainConfig& cfg);

/// Boolean trainable mask over the flat parameter vector. logB is frozen
/// when k == dim so the conservation rows stay parameter-independent;
/// metric levels untouched by the level-k operators and (for epsilon == 0)
/// the net block are frozen too.
std::vector<bool> trainable_mask(const SurrogateModel& mo);

/// Batched equality-constrained training: per sample, Newton forward
/// solve, adjoint solve, one Adam step. Throws on a non-converged forward
/// solve. epsilon is halved whenever it reaches 0.95/L_N.
TrainResult train(const SurrogateModel& mo, const std::vector<Sample>& dataset,
                  const TrainConfig& cfg);

/// CSV with header epoch,sample,loss,forward_residual,eps_lipschitz,grad_norm;
/// doubles printed with %.17g so reruns are byte-identical.
void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& history);

} // namespace ddec
