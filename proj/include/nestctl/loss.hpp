#pragma once

#include <functional>
#include <memory>

#include "nestctl/geometry.hpp"

namespace nestctl {

// Per-round convex loss with value and analytic (sub)gradient. Streams are
// oblivious: all round data is fixed up front, so value(t, y) is a pure
// function. Rounds are 1-based.
class LossStream {
 public:
  virtual ~LossStream() = default;
  virtual double value(int t, const Vec& y) const = 0;
  virtual Vec grad(int t, const Vec& y) const = 0;
  virtual double lipschitz() const = 0;
  // Hoelder data (lambda, beta); beta = 1 means plain Lipschitz.
  virtual double holder_lambda() const { return lipschitz(); }
  virtual double holder_beta() const { return 1.0; }
  virtual bool time_invariant() const { return false; }

  // Sum over rounds 1..T, with a fast path for fixed losses.
  double total(const Vec& y, int T) const {
    if (time_invariant()) return double(T) * value(1, y);
    double s = 0.0;
    for (int t = 1; t <= T; ++t) s += value(t, y);
    return s;
  }
};

using LossStreamPtr = std::shared_ptr<const LossStream>;

// f(y) = scale * ||y - p||^power for power in {1, 2}.
LossStreamPtr norm_loss(Vec p, int power = 1, double scale = 1.0);
// Fixed linear loss f(y) = <c, y>.
LossStreamPtr linear_loss(Vec c);
// 1-D loss f(y) = -L*y + L*R (minimized at y = R).
LossStreamPtr ramp_loss(double L, double R);
// Arbitrary callbacks (used by environments and tests).
LossStreamPtr functional_loss(std::function<double(int, const Vec&)> value,
                              std::function<Vec(int, const Vec&)> grad,
                              double lipschitz, double lambda, double beta,
                              bool time_invariant);

}  // namespace nestctl
