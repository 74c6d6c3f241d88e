#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nestctl/dynamics.hpp"
#include "nestctl/loss.hpp"

namespace nestctl {

// Repeated m x n bimatrix games against an online-gradient-descent learner.
// The optimizer's reward x A_t y depends on the learner's strategy (rows of
// A_t stay near a row-identical matrix); the learner's update direction is
// steered through B_t, whose row hull contains the unit ball.
struct SteeringEnv {
  int m = 0;
  int n = 0;
  double L = 4.0;  // entry scale: |entries| <= L / (2 sqrt(n))
  int T = 0;
  double theta = 0.0;  // learner step sqrt(2 / (L^2 T))

  std::vector<Mat> A;  // per-round m x n (1-based access via A[t-1])
  std::vector<Mat> B;
  std::vector<double> delta_t;  // per-round distance of A_t from row-identical
  std::vector<double> eps_t;    // per-round row drift of B_t

  const Mat& A_at(int t) const { return A[t - 1]; }
  const Mat& B_at(int t) const { return B[t - 1]; }
  Vec row_average(const Mat& M) const;  // u_m * M
};

// Fixed game: identical-row A with a unique argmax column, cross-shaped B.
SteeringEnv make_fixed_game_env(int m, int n, int T, double L);
// Same A; B rotates by seeded increments with total row drift eps_total.
SteeringEnv make_drifting_game_env(int m, int n, int T, double L, double eps_total,
                                   std::uint64_t seed);

// x in Delta(m) minimizing || x B_prev - (target - y_now)/theta ||^2.
SolveResult steering_action(const SteeringEnv& env, const Vec& y_now, const Vec& target,
                            const Mat& B_prev);

struct SteeringRoundResult {
  Vec x;                 // optimizer's mixed strategy
  Vec y_next;            // learner's updated strategy
  double true_reward;    // x A_t y_t
  double surrogate_loss; // -(u_m A_{t-1}) . y_next
  Vec w;                 // declared-vs-true update gap, |w| <= theta * eps_t
  double residual;       // solver residual in learner-step units
};

// One environment round: solve the action against B_{t-1}, let the learner
// take its gradient step on the true B_t.
SteeringRoundResult steering_round(const SteeringEnv& env, int t, const Vec& y_now,
                                   const Vec& controller_target);

// Dynamics over Delta(n) recentered at the centroid: the declared transition
// uses B_{t-1}, the true one uses B_t; the gap is the round's disturbance.
DynamicsModel steering_dynamics_model(const SteeringEnv& env);
// Surrogate losses -(u_m A_{t-1}) . y (A_0 = 0), recentered.
LossStreamPtr steering_surrogate_loss(const SteeringEnv& env);

struct SteeringAudit {
  double optimizer_total_reward = 0.0;
  double optimizer_average_reward = 0.0;
  double best_profile_average = 0.0;
  double profile_regret = 0.0;        // vs best fixed profile
  double learner_regret = 0.0;        // OGD regret on realized loss sequence
  double learner_regret_bound = 0.0;  // 2 R_B G_B sqrt(T)
  double max_disturbance_ratio = 0.0; // max over rounds of |w_t| / (theta eps_t)
  double surrogate_gap = 0.0;         // |sum true - sum surrogate-implied|
};

// Replays a finished run (recentered states, actions, per-round disturbances)
// against the environment's game sequence.
SteeringAudit steering_audit(const SteeringEnv& env, const std::vector<Vec>& states,
                             const std::vector<Vec>& actions,
                             const std::vector<Vec>& disturbances);

}  // namespace nestctl
