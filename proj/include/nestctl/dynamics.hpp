#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nestctl/geometry.hpp"

namespace nestctl {

struct SolveResult {
  Vec x;
  double residual = 0.0;
};

// Local action-linear form D(x, y) ~ A x + b with superlinear remainder
// ||q(x)|| <= C * ||A (x - x*)||^(1+c) near stabilizing actions.
struct LocalForm {
  Mat A;
  Vec b;
  double C = 0.0;
  double c = 0.0;
  bool has_q = false;
};

// Evaluable transition with controllability metadata. Model coordinates are
// chosen so that runs start at the origin; environments that live elsewhere
// (simplex centroids, reserve bundles) translate before constructing a model.
struct DynamicsModel {
  enum class Mode { weak, strong };

  std::string name;
  ConvexBody state_space;   // Y
  ConvexBody action_space;  // X
  double rho = 1.0;
  Mode mode = Mode::weak;
  bool time_varying = false;
  std::function<Vec(const Vec& x, const Vec& y, int t)> evaluator;
  // Optional declared transition the controller plans against when the true
  // one is revealed only afterwards; the gap is logged as a disturbance.
  std::function<Vec(const Vec& x, const Vec& y, int t)> nominal_evaluator;
  std::function<LocalForm(const Vec& y)> local_form;  // optional
  // Optional exact per-round solver (environments with closed-form actions).
  std::function<SolveResult(const Vec& y_prev, const Vec& target, int t)> custom_solver;

  Vec eval(const Vec& x, const Vec& y, int t) const { return evaluator(x, y, t); }
  Vec eval_nominal(const Vec& x, const Vec& y, int t) const {
    return nominal_evaluator ? nominal_evaluator(x, y, t) : evaluator(x, y, t);
  }
};

// x minimizing ||A x + b - target||^2 over X. Exact fast paths for
// unconstrained-interior, ball and small-simplex domains; FISTA otherwise.
SolveResult solve_action_linear(const Mat& A, const Vec& b, const Vec& y_prev, const Vec& target,
                                const ConvexBody& X);

// min over the simplex of ||B^T x - g||^2 by face enumeration (exact for
// m <= 16); used by the steering environment and as a test oracle.
SolveResult simplex_least_squares(const Mat& B_rows, const Vec& g);

// Offline action oracle: delegates to the model's custom solver or local
// form when available, otherwise multistart projected gradient with a coarse
// grid fallback in dimension <= 3.
SolveResult nonconvex_oracle(const DynamicsModel& model, const Vec& y_prev, const Vec& target,
                             int t = 1);

// Appendix-style instance families. Construction samples the stated spectral
// conditions and rejects fields that fail them.
using MatrixField = std::function<Mat(const Vec& y)>;

DynamicsModel make_example1(int n, double rho, const MatrixField& A_field);
// Variant with an explicit superlinear remainder q(x) = C ||A x||^(1+c) e1.
DynamicsModel make_example1_with_q(int n, double rho, const MatrixField& A_field, double C,
                                   double c);
DynamicsModel make_example2(int n, double rho, const MatrixField& K_field,
                            const MatrixField& A_field, double c, double R = 1.0);
// Non-controllable instance: inside B_alpha(0) every action jumps the state
// by beta; controllable elsewhere. Requires alpha <= beta/2.
DynamicsModel make_prop1_instance(double alpha, double beta);
// Instances whose reachable set is exactly the controllability ball.
DynamicsModel make_exact_weak(const ConvexBody& Y, double rho);
DynamicsModel make_exact_strong(const ConvexBody& Y, double rho);
// Unit-ball instance D = proj(y + x) used by the policy-separation scenario.
DynamicsModel make_prop2_instance(int n);
// Time-invariant y-independent dynamics D(x, y) = proj_Y(A x + b).
DynamicsModel make_constant_affine(const Mat& A, const Vec& b, const ConvexBody& Y,
                                   double action_radius);

// Disturbance adversaries from the lower-bound constructions.
class DisturbanceAdversary {
 public:
  enum class Kind { none, radial_push, boundary_push, pin1d, script };

  static DisturbanceAdversary none();
  // w pushes radially outward with norm ((rho - alpha*rho)/(1+rho)) * pi(y).
  static DisturbanceAdversary radial_push(double alpha, double rho, double budget);
  // w moves toward the nearest boundary point, norm capped by
  // (rho/(1+beta*rho)) * pi(y).
  static DisturbanceAdversary boundary_push(double beta, double rho);
  // 1-D: w drives the state to `target` until the budget runs out.
  static DisturbanceAdversary pin1d(double target, double budget);
  static DisturbanceAdversary script(std::vector<Vec> ws);

  Vec next(const Vec& undisturbed, const ConvexBody& body);

  Kind kind() const { return kind_; }
  double spent() const { return spent_; }
  double budget() const { return budget_; }
  // Per-round cap fraction applied to pi(y); used for contract checks.
  double cap_fraction() const { return cap_fraction_; }

 private:
  Kind kind_ = Kind::none;
  double alpha_ = 0.0, rho_ = 0.0, beta_ = 0.0;
  double cap_fraction_ = 0.0;
  double budget_ = std::numeric_limits<double>::infinity();
  double spent_ = 0.0;
  double pin_target_ = 0.0;
  std::vector<Vec> script_;
  int round_ = 0;
};

}  // namespace nestctl
