#include "nestctl/dynamics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "nestctl/rng.hpp"

namespace nestctl {

namespace {

double linear_residual(const Mat& A, const Vec& b, const Vec& target, const Vec& x) {
  return (A * x + b - target).norm();
}

// min ||A u - g||^2 over ||u|| <= s via the SVD secular equation.
Vec ball_constrained_lsq(const Mat& A, const Vec& g, double s) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec sig = svd.singularValues();
  const Vec gt = svd.matrixU().transpose() * g;
  const int k = int(sig.size());
  Vec ut(k);
  for (int i = 0; i < k; ++i) ut[i] = sig[i] > 1e-13 ? gt[i] / sig[i] : 0.0;
  if (ut.norm() <= s) return svd.matrixV() * ut;

  auto norm_sq = [&](double lam) {
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
      const double num = sig[i] * gt[i];
      const double den = sig[i] * sig[i] + lam;
      acc += (num / den) * (num / den);
    }
    return acc;
  };
  double lo = 0.0, hi = 1.0;
  while (norm_sq(hi) > s * s) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm_sq(mid) > s * s ? lo : hi) = mid;
  }
  const double lam = 0.5 * (lo + hi);
  for (int i = 0; i < k; ++i) ut[i] = sig[i] * gt[i] / (sig[i] * sig[i] + lam);
  return svd.matrixV() * ut;
}

// FISTA with adaptive restart on 0.5*||A x + b - z||^2 over the body.
Vec fista_lsq(const Mat& A, const Vec& b, const Vec& z, const ConvexBody& X, Vec x0) {
  Eigen::JacobiSVD<Mat> svd(A);
  const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  const double step = smax > 1e-13 ? 1.0 / (smax * smax) : 1.0;
  Vec x = X.project(std::move(x0));
  Vec y = x;
  double momentum = 1.0;
  for (int it = 0; it < 4000; ++it) {
    const Vec grad = A.transpose() * (A * y + b - z);
    Vec x_new = X.project(y - step * grad);
    const double m_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    Vec y_new = x_new + ((momentum - 1.0) / m_new) * (x_new - x);
    if (grad.dot(x_new - x) > 0.0) {  // restart
      y_new = x_new;
      momentum = 1.0;
    } else {
      momentum = m_new;
    }
    const double moved = (x_new - x).norm();
    x = std::move(x_new);
    y = std::move(y_new);
    if (moved < 1e-14) break;
  }
  return x;
}

Vec numeric_grad(const std::function<double(const Vec&)>& f, const Vec& x) {
  const double h = 1e-6 * std::max(1.0, x.norm());
  Vec g(x.size());
  Vec probe = x;
  for (int i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vec projected_descent(const std::function<double(const Vec&)>& f, const ConvexBody& X, Vec x,
                      int iters) {
  double fx = f(x);
  for (int it = 0; it < iters; ++it) {
    const Vec g = numeric_grad(f, x);
    if (g.norm() < 1e-12) break;
    double step = 1.0;
    bool improved = false;
    for (int bt = 0; bt < 25; ++bt) {
      Vec cand = X.project(x - step * g);
      const double fc = f(cand);
      if (fc < fx - 1e-16) {
        x = std::move(cand);
        fx = fc;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return x;
}

}  // namespace

SolveResult solve_action_linear(const Mat& A, const Vec& b, const Vec& y_prev, const Vec& target,
                                const ConvexBody& X) {
  (void)y_prev;
  // Unconstrained least squares; accept when interior.
  Vec x_free = A.colPivHouseholderQr().solve(target - b);
  if (X.contains(x_free, kMembershipTol)) {
    Vec x = X.project(x_free);
    return {x, linear_residual(A, b, target, x)};
  }
  if (X.kind() == "ball" && std::abs(X.inradius() - X.circumradius()) < 1e-12) {
    // Origin-centered ball: exact trust-region solve.
    const Vec u = ball_constrained_lsq(A, target - b, X.circumradius());
    Vec x = X.project(u);
    return {x, linear_residual(A, b, target, x)};
  }
  if (X.kind() == "simplex" && X.dim() <= 16) {
    SolveResult r = simplex_least_squares(A.transpose(), target - b);
    r.residual = linear_residual(A, b, target, r.x);
    return r;
  }
  Vec x = fista_lsq(A, b, target, X, x_free);
  return {x, linear_residual(A, b, target, x)};
}

SolveResult simplex_least_squares(const Mat& B_rows, const Vec& g) {
  const int m = int(B_rows.rows());
  if (m > 16) throw std::invalid_argument("simplex_least_squares: too many rows for exact faces");
  const Mat M_full = B_rows.transpose();  // n x m, columns are rows of B
  SolveResult best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    const int k = int(idx.size());
    Mat M(M_full.rows(), k);
    for (int j = 0; j < k; ++j) M.col(j) = M_full.col(idx[j]);
    Mat kkt = Mat::Zero(k + 1, k + 1);
    kkt.topLeftCorner(k, k) = M.transpose() * M;
    kkt.topRightCorner(k, 1).setOnes();
    kkt.bottomLeftCorner(1, k).setOnes();
    Vec rhs(k + 1);
    rhs.head(k) = M.transpose() * g;
    rhs[k] = 1.0;
    Eigen::FullPivLU<Mat> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Vec sol = lu.solve(rhs);
    Vec xs = sol.head(k);
    if (xs.minCoeff() < -1e-10) continue;
    xs = xs.cwiseMax(0.0);
    xs /= xs.sum();
    Vec x = Vec::Zero(m);
    for (int j = 0; j < k; ++j) x[idx[j]] = xs[j];
    const double res = (M_full * x - g).norm();
    if (res < best.residual) best = {x, res};
  }
  return best;
}

SolveResult nonconvex_oracle(const DynamicsModel& model, const Vec& y_prev, const Vec& target,
                             int t) {
  if (model.custom_solver) {
    SolveResult r = model.custom_solver(y_prev, target, t);
    r.residual = (model.eval_nominal(r.x, y_prev, t) - target).norm();
    return r;
  }
  if (model.local_form) {
    const LocalForm lf = model.local_form(y_prev);
    SolveResult r = solve_action_linear(lf.A, lf.b, y_prev, target, model.action_space);
    r.residual = (model.eval_nominal(r.x, y_prev, t) - target).norm();
    return r;
  }

  const ConvexBody& X = model.action_space;
  const int n = X.dim();
  auto objective = [&](const Vec& x) { return (model.eval(x, y_prev, t) - target).squaredNorm(); };

  CounterRng rng(0x6f7261636c65ULL, 1);
  std::vector<Vec> starts;
  starts.push_back(X.project(Vec::Zero(n)));
  for (int i = 0; i < 15; ++i)
    starts.push_back(X.project(X.circumradius() * rng.unit_ball(n)));
  if (n <= 3) {  // coarse grid fallback
    const double R = X.circumradius();
    const int pts = 7;
    Vec g(n);
    std::function<void(int)> rec = [&](int d) {
      if (d == n) {
        starts.push_back(X.project(g));
        return;
      }
      for (int i = 0; i < pts; ++i) {
        g[d] = -R + 2.0 * R * double(i) / double(pts - 1);
        rec(d + 1);
      }
    };
    rec(0);
  }

  SolveResult best;
  best.residual = std::numeric_limits<double>::infinity();
  for (const Vec& s : starts) {
    Vec x = projected_descent(objective, X, s, 200);
    const double res = std::sqrt(objective(x));
    if (res < best.residual) best = {x, res};
  }
  return best;
}

namespace {

void certify_min_gain(const ConvexBody& Y, double rho, const MatrixField& A_field,
                      const MatrixField* K_field, double c_scale, double R_scale) {
  CounterRng rng(0x636572746966ULL, 2);
  const int n = Y.dim();
  for (int s = 0; s < 60; ++s) {
    const Vec y = Y.project(0.97 * Y.circumradius() * rng.unit_ball(n));
    const double pi = Y.boundary_distance(y);
    const Mat A = A_field(y);
    Eigen::JacobiSVD<Mat> svd(A);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    double need = pi * rho;
    if (K_field) {
      const Mat M = (*K_field)(y) - Mat::Identity(n, n);
      Eigen::JacobiSVD<Mat> svdM(M);
      const double mmax = svdM.singularValues().size() ? svdM.singularValues()(0) : 0.0;
      need += mmax * R_scale;
    }
    if (c_scale * R_scale * smin < need - 1e-9)
      throw std::invalid_argument("instance family: spectral condition failed on sampled state");
  }
}

}  // namespace

DynamicsModel make_example1(int n, double rho, const MatrixField& A_field) {
  DynamicsModel m;
  m.name = "example1";
  m.state_space = ConvexBody::ball(n, 1.0);
  m.action_space = ConvexBody::ball(n, 1.0);
  m.rho = rho;
  m.mode = DynamicsModel::Mode::weak;
  certify_min_gain(m.state_space, rho, A_field, nullptr, 1.0, 1.0);
  const ConvexBody Y = m.state_space;
  m.evaluator = [Y, A_field](const Vec& x, const Vec& y, int) {
    return Y.project(y + A_field(y) * x);
  };
  m.local_form = [A_field](const Vec& y) {
    LocalForm lf;
    lf.A = A_field(y);
    lf.b = y;
    return lf;
  };
  return m;
}

DynamicsModel make_example1_with_q(int n, double rho, const MatrixField& A_field, double C,
                                   double c) {
  DynamicsModel m = make_example1(n, rho, A_field);
  m.name = "example1_q";
  const ConvexBody Y = m.state_space;
  m.evaluator = [Y, A_field, C, c](const Vec& x, const Vec& y, int) {
    const Vec step = A_field(y) * x;
    Vec q = Vec::Zero(y.size());
    q[0] = C * std::pow(step.norm(), 1.0 + c);
    return Y.project(y + step + q);
  };
  m.local_form = [A_field, C, c](const Vec& y) {
    LocalForm lf;
    lf.A = A_field(y);
    lf.b = y;
    lf.C = C;
    lf.c = c;
    lf.has_q = true;
    return lf;
  };
  return m;
}

DynamicsModel make_example2(int n, double rho, const MatrixField& K_field,
                            const MatrixField& A_field, double c, double R) {
  DynamicsModel m;
  m.name = "example2";
  m.state_space = ConvexBody::ball(n, R);
  m.action_space = ConvexBody::ball(n, c * R);
  m.rho = rho;
  m.mode = DynamicsModel::Mode::weak;
  certify_min_gain(m.state_space, rho, A_field, &K_field, c, R);
  const ConvexBody Y = m.state_space;
  m.evaluator = [Y, K_field, A_field](const Vec& x, const Vec& y, int) {
    return Y.project(K_field(y) * y + A_field(y) * x);
  };
  m.local_form = [K_field, A_field](const Vec& y) {
    LocalForm lf;
    lf.A = A_field(y);
    lf.b = K_field(y) * y;
    return lf;
  };
  return m;
}

DynamicsModel make_prop1_instance(double alpha, double beta) {
  if (alpha > beta / 2.0) throw std::invalid_argument("prop1: requires alpha <= beta/2");
  DynamicsModel m;
  m.name = "prop1";
  const int n = 2;
  m.state_space = ConvexBody::ball(n, 1.0);
  m.action_space = ConvexBody::ball(n, 1.0);
  m.rho = 1.0;
  const ConvexBody Y = m.state_space;
  auto jump_dir = [n](const Vec& y) {
    if (y.norm() < 1e-14) return Vec(Vec::Unit(n, 0));
    return Vec(y / y.norm());
  };
  m.evaluator = [Y, alpha, beta, jump_dir](const Vec& x, const Vec& y, int) {
    if (y.norm() <= alpha) return Y.project(y + beta * jump_dir(y));
    const double pi = Y.boundary_distance(y);
    return Y.project(y + pi * x);
  };
  m.custom_solver = [Y, alpha, jump_dir, beta](const Vec& y, const Vec& target, int) -> SolveResult {
    if (y.norm() <= alpha) {
      const Vec landing = Y.project(y + beta * jump_dir(y));
      return {Vec::Zero(y.size()), (landing - target).norm()};
    }
    const double pi = Y.boundary_distance(y);
    Vec d = target - y;
    if (pi < 1e-14) return {Vec::Zero(y.size()), d.norm()};
    Vec x = d / pi;
    if (x.norm() > 1.0) x /= x.norm();
    return {x, (Y.project(y + pi * x) - target).norm()};
  };
  return m;
}

DynamicsModel make_exact_weak(const ConvexBody& Y, double rho) {
  DynamicsModel m;
  m.name = "exact_weak";
  m.state_space = Y;
  m.action_space = ConvexBody::ball(Y.dim(), 1.0);
  m.rho = rho;
  m.mode = DynamicsModel::Mode::weak;
  m.evaluator = [Y, rho](const Vec& x, const Vec& y, int) {
    Vec d = Y.hull_direction(x);
    if (d.norm() > 1.0) d /= d.norm();
    return Vec(y + rho * Y.boundary_distance(y) * d);
  };
  m.custom_solver = [Y, rho](const Vec& y, const Vec& target, int) -> SolveResult {
    const double reach = rho * Y.boundary_distance(y);
    Vec d = Y.hull_direction(target - y);
    const double dist = d.norm();
    if (dist <= reach || reach < 1e-15) {
      Vec x = reach > 1e-15 ? Vec(d / reach) : Vec(Vec::Zero(y.size()));
      return {x, std::max(0.0, dist - reach)};
    }
    return {Vec(d / dist), dist - reach};
  };
  return m;
}

DynamicsModel make_exact_strong(const ConvexBody& Y, double rho) {
  DynamicsModel m;
  m.name = "exact_strong";
  m.state_space = Y;
  m.action_space = ConvexBody::ball(Y.dim(), 1.0);
  m.rho = rho;
  m.mode = DynamicsModel::Mode::strong;
  m.evaluator = [Y, rho](const Vec& x, const Vec& y, int) {
    Vec d = x;
    if (d.norm() > 1.0) d /= d.norm();
    return Y.project(y + rho * d);
  };
  m.custom_solver = [Y, rho](const Vec& y, const Vec& target, int) -> SolveResult {
    const Vec d = target - y;
    const double dist = d.norm();
    if (dist <= rho) return {dist > 1e-15 ? Vec(d / rho) : Vec(Vec::Zero(y.size())), 0.0};
    return {Vec(d / dist), dist - rho};
  };
  return m;
}

DynamicsModel make_prop2_instance(int n) {
  return make_example1(n, 1.0, [n](const Vec&) { return Mat(Mat::Identity(n, n)); });
}

DynamicsModel make_constant_affine(const Mat& A, const Vec& b, const ConvexBody& Y,
                                   double action_radius) {
  DynamicsModel m;
  m.name = "constant_affine";
  m.state_space = Y;
  m.action_space = ConvexBody::ball(int(A.cols()), action_radius);
  m.rho = 1.0;
  m.mode = DynamicsModel::Mode::strong;
  m.evaluator = [Y, A, b](const Vec& x, const Vec&, int) { return Y.project(A * x + b); };
  m.local_form = [A, b](const Vec&) {
    LocalForm lf;
    lf.A = A;
    lf.b = b;
    return lf;
  };
  return m;
}

DisturbanceAdversary DisturbanceAdversary::none() { return DisturbanceAdversary(); }

DisturbanceAdversary DisturbanceAdversary::radial_push(double alpha, double rho, double budget) {
  DisturbanceAdversary a;
  a.kind_ = Kind::radial_push;
  a.alpha_ = alpha;
  a.rho_ = rho;
  a.cap_fraction_ = (rho - alpha * rho) / (1.0 + rho);
  a.budget_ = budget;
  return a;
}

DisturbanceAdversary DisturbanceAdversary::boundary_push(double beta, double rho) {
  DisturbanceAdversary a;
  a.kind_ = Kind::boundary_push;
  a.beta_ = beta;
  a.rho_ = rho;
  a.cap_fraction_ = rho / (1.0 + beta * rho);
  return a;
}

DisturbanceAdversary DisturbanceAdversary::pin1d(double target, double budget) {
  DisturbanceAdversary a;
  a.kind_ = Kind::pin1d;
  a.pin_target_ = target;
  a.budget_ = budget;
  return a;
}

DisturbanceAdversary DisturbanceAdversary::script(std::vector<Vec> ws) {
  DisturbanceAdversary a;
  a.kind_ = Kind::script;
  a.script_ = std::move(ws);
  return a;
}

Vec DisturbanceAdversary::next(const Vec& undisturbed, const ConvexBody& body) {
  round_ += 1;
  Vec w = Vec::Zero(undisturbed.size());
  switch (kind_) {
    case Kind::none:
      return w;
    case Kind::radial_push: {
      const double pi = body.boundary_distance(undisturbed);
      Vec dir = body.hull_direction(undisturbed);
      if (dir.norm() < 1e-12) dir = body.hull_direction(Vec::Unit(undisturbed.size(), 0));
      dir /= dir.norm();
      w = cap_fraction_ * pi * dir;
      const double remaining = budget_ - spent_;
      if (w.norm() > remaining) w *= std::max(0.0, remaining) / w.norm();
      break;
    }
    case Kind::boundary_push: {
      const double pi = body.boundary_distance(undisturbed);
      const Vec z = body.nearest_boundary_point(undisturbed);
      Vec d = z - undisturbed;
      const double dn = d.norm();
      if (dn < 1e-15) break;
      const double cap = cap_fraction_ * pi;
      w = d * std::min(1.0, cap / dn);
      break;
    }
    case Kind::pin1d: {
      const double needed = pin_target_ - undisturbed[0];
      const double remaining = budget_ - spent_;
      if (std::abs(needed) <= remaining) w[0] = needed;
      break;
    }
    case Kind::script: {
      if (round_ - 1 < int(script_.size())) w = script_[round_ - 1];
      break;
    }
  }
  spent_ += w.norm();
  return w;
}

}  // namespace nestctl
