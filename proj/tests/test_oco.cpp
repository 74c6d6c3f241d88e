#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nestctl/loss.hpp"
#include "nestctl/oco.hpp"
#include "nestctl/rng.hpp"

using namespace nestctl;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

// 1-D argmin oracle for eta*g*y + 0.5*y^2 over an interval, by golden section.
double interval_argmin_oracle(double lo, double hi, double eta, double g) {
  auto f = [&](double y) { return eta * g * y + 0.5 * y * y; };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  for (int i = 0; i < 200; ++i) {
    const double c = b - inv_phi * (b - a);
    const double d = a + inv_phi * (b - a);
    if (f(c) < f(d))
      b = d;
    else
      a = c;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("ftrl_next: regularizer minimizer, interval argmin, ball saturation") {
  auto box = ConvexBody::interval(-1.0, 1.0);
  FtrlState s = ftrl_init(box, 0.1, 1.0, 0.5);
  CHECK(ftrl_next(s)[0] == doctest::Approx(0.0));

  s = ftrl_update(std::move(s), vec1(2.0));
  const double got = ftrl_next(s)[0];
  CHECK(got == doctest::Approx(-0.2).epsilon(1e-9));
  CHECK(got == doctest::Approx(interval_argmin_oracle(-1.0, 1.0, 0.1, 2.0)).epsilon(1e-6));

  FtrlState b = ftrl_init(ConvexBody::ball(2, 1.0), 1.0, 1.0, 0.5);
  b = ftrl_update(std::move(b), vec2(3.0, 0.0));
  CHECK(ftrl_next(b).isApprox(vec2(-1.0, 0.0), 1e-9));
}

TEST_CASE("ftrl_update accumulates and ignores gradient order") {
  FtrlState s = ftrl_init(ConvexBody::ball(2, 1.0), 0.5, 1.0, 0.5);
  s = ftrl_update(std::move(s), vec2(1.0, 0.0));
  s = ftrl_update(std::move(s), vec2(0.0, 1.0));
  CHECK(s.grad_sum.isApprox(vec2(1.0, 1.0)));
  CHECK(s.round == 2);

  FtrlState other = ftrl_init(ConvexBody::ball(2, 1.0), 0.5, 1.0, 0.5);
  other = ftrl_update(std::move(other), vec2(0.0, 1.0));
  other = ftrl_update(std::move(other), vec2(1.0, 0.0));
  CHECK((ftrl_next(s) - ftrl_next(other)).norm() == doctest::Approx(0.0));

  // Zero gradient keeps the next point fixed.
  const Vec before = ftrl_next(s);
  s = ftrl_update(std::move(s), Vec::Zero(2));
  CHECK((ftrl_next(s) - before).norm() == doctest::Approx(0.0));

  CHECK_THROWS_AS(ftrl_update(std::move(other), Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("ftrl regret audit against the Prop-style bound and step-norm bound") {
  const int T = 512;
  const double L = 1.0, gamma = 1.0, G = 0.5;
  const double eta = std::sqrt(G * gamma / (double(T) * L * L));
  auto ball = ConvexBody::ball(2, 1.0);
  FtrlState s = ftrl_init(ball, eta, gamma, G);
  CounterRng rng(101);

  std::vector<Vec> grads;
  std::vector<Vec> points;
  for (int t = 0; t < T; ++t) {
    const Vec y = ftrl_next(s);
    points.push_back(y);
    const Vec g = rng.unit_sphere(2);  // linear losses <g, y>, L = 1
    grads.push_back(g);
    s = ftrl_update(std::move(s), g);
  }
  // Step-norm bound on every consecutive pair.
  for (size_t t = 0; t + 1 < points.size(); ++t)
    CHECK((points[t + 1] - points[t]).norm() <= eta * L / gamma + 1e-12);

  // Regret vs a comparator grid.
  double realized = 0.0;
  for (int t = 0; t < T; ++t) realized += grads[t].dot(points[t]);
  double best = 1e18;
  for (double x = -1.0; x <= 1.0; x += 0.02)
    for (double y = -1.0; y <= 1.0; y += 0.02) {
      Vec c = vec2(x, y);
      if (!ball.contains(c, 1e-9)) continue;
      double total = 0.0;
      for (const Vec& g : grads) total += g.dot(c);
      best = std::min(best, total);
    }
  CHECK(realized - best <= eta * T * L * L / gamma + G / eta + 1e-9);
}

TEST_CASE("fkm_step: gradient estimate formula and zero-loss fixpoint") {
  FkmState s = fkm_init(ConvexBody::ball(2, 1.0), 0.01, 0.1, 42);
  s.last_direction = vec2(0.0, 1.0);
  const Vec center_before = s.center;
  auto [s2, next] = fkm_step(std::move(s), 0.5);
  // g = (n/probe)*loss*u = (2/0.1)*0.5*(0,1) = (0,10).
  CHECK((center_before - 0.01 * vec2(0.0, 10.0) - s2.center).norm() <= 1e-12);
  (void)next;

  FkmState z = fkm_init(ConvexBody::ball(2, 1.0), 0.01, 0.1, 43);
  const Vec c0 = z.center;
  auto [z2, niu] = fkm_step(std::move(z), 0.0);
  CHECK((z2.center - c0).norm() == doctest::Approx(0.0));
  (void)niu;
}

TEST_CASE("fkm one-point estimator approximates the smoothed gradient") {
  // f(y) = ||y||^2 at a fixed center: E[(n/probe) f(v + probe*u) u] = grad f(v).
  const Vec v = vec2(0.3, 0.0);
  const double probe = 0.1;
  CounterRng rng(7);
  Vec acc = Vec::Zero(2);
  const int N = 10000;
  for (int i = 0; i < N; ++i) {
    const Vec u = rng.unit_sphere(2);
    const Vec y = v + probe * u;
    acc += (2.0 / probe) * y.squaredNorm() * u;
  }
  acc /= double(N);
  CHECK((acc - 2.0 * v).norm() < 0.05);
}

TEST_CASE("fkm played points stay inside the domain, centers inside the contraction") {
  auto domain = ConvexBody::ball(2, 1.0).contracted(0.3);  // inradius 0.7
  FkmState s = fkm_init(domain, 0.005, 0.05, 77);
  for (int t = 0; t < 2000; ++t) {
    CHECK(domain.contains(s.played_point(), 1e-9));
    CHECK(s.center_domain.contains(s.center, 1e-9));
    const double loss = 0.5 + 0.5 * s.played_point()[0];
    auto [ns, np] = fkm_step(std::move(s), loss);
    s = std::move(ns);
    (void)np;
  }
}

TEST_CASE("ogd_step: simplex example, fixpoint, regret audit") {
  auto simplex = ConvexBody::simplex(2);
  OgdState s = ogd_init(simplex, 0.1, Vec::Constant(2, 0.5));
  s = ogd_step(std::move(s), vec2(1.0, 0.0));
  CHECK(s.point.isApprox(vec2(0.45, 0.55), 1e-12));

  OgdState fixed = ogd_init(ConvexBody::ball(2, 1.0), 0.1, vec2(0.2, 0.2));
  const Vec before = fixed.point;
  fixed = ogd_step(std::move(fixed), Vec::Zero(2));
  CHECK((fixed.point - before).norm() == doctest::Approx(0.0));

  // Regret audit: theta = 2*R_B/(G_B*sqrt(T)) gives 2*R_B*G_B*sqrt(T).
  const int T = 400;
  const double R_B = 1.0, G_B = 1.0;
  const double theta = 2.0 * R_B / (G_B * std::sqrt(double(T)));
  OgdState o = ogd_init(ConvexBody::ball(2, 1.0), theta, Vec::Zero(2));
  CounterRng rng(13);
  double realized = 0.0;
  Vec grad_total = Vec::Zero(2);
  for (int t = 0; t < T; ++t) {
    const Vec g = rng.unit_sphere(2);
    realized += g.dot(o.point);
    grad_total += g;
    o = ogd_step(std::move(o), g);
  }
  const double best = -grad_total.norm();  // linear loss over the unit ball
  CHECK(realized - best <= 2.0 * R_B * G_B * std::sqrt(double(T)) + 1e-9);
}

TEST_CASE("holder_calibrate: Lipschitz shape, formula evaluation, step bound") {
  // beta = 1 collapses to the sqrt calibration shape.
  const auto lip = holder_calibrate(1.0, 1.0, 0.5, 1.0, 1.0, 0.5, 10000);
  const double K1 = 1.0 * (3.0 + std::pow(1.0 / 0.5, 1.0));
  CHECK(lip.eta == doctest::Approx(std::sqrt(0.5 / (K1 * 10000.0))).epsilon(1e-12));

  const auto c = holder_calibrate(1.0, 0.5, 0.5, 1.0, 1.0, 0.5, 10000);
  const double K = 1.0 * (3.0 + std::sqrt(2.0)) * 1.0;
  const double eta = std::pow(0.5 / (K * 10000.0), 0.75);
  CHECK(c.K == doctest::Approx(K).epsilon(1e-12));
  CHECK(c.eta == doctest::Approx(eta).epsilon(1e-12));
  CHECK(c.step_bound == doctest::Approx(std::pow(eta, 2.0 / 3.0)).epsilon(1e-12));
  CHECK(c.delta == doctest::Approx(c.step_bound / 0.5).epsilon(1e-12));

  CHECK_THROWS_AS(holder_calibrate(1.0, 1.5, 0.5, 1.0, 1.0, 0.5, 100), std::invalid_argument);

  // Empirical max step of an FTRL run under the calibrated eta stays within
  // the predicted bound.
  auto ball = ConvexBody::ball(2, 1.0);
  FtrlState s = ftrl_init(ball, c.eta, 1.0, 0.5);
  CounterRng rng(55);
  Vec prev = ftrl_next(s);
  double max_step = 0.0;
  for (int t = 0; t < 2000; ++t) {
    s = ftrl_update(std::move(s), rng.unit_sphere(2));
    const Vec now = ftrl_next(s);
    max_step = std::max(max_step, (now - prev).norm());
    prev = now;
  }
  CHECK(max_step <= c.step_bound + 1e-12);
}
