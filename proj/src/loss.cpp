#include "nestctl/loss.hpp"

#include <cmath>
#include <utility>

namespace nestctl {

namespace {

class NormLoss final : public LossStream {
 public:
  NormLoss(Vec p, int power, double scale) : p_(std::move(p)), power_(power), scale_(scale) {
    if (power_ != 1 && power_ != 2) throw std::invalid_argument("norm_loss: power must be 1 or 2");
  }
  double value(int, const Vec& y) const override {
    const double d = (y - p_).norm();
    return scale_ * (power_ == 1 ? d : d * d);
  }
  Vec grad(int, const Vec& y) const override {
    const Vec d = y - p_;
    if (power_ == 2) return 2.0 * scale_ * d;
    const double n = d.norm();
    if (n < 1e-14) return Vec::Zero(y.size());  // subgradient at the kink
    return (scale_ / n) * d;
  }
  double lipschitz() const override {
    // For power 2 the caller supplies the domain-dependent constant; this is
    // used only as a default.
    return power_ == 1 ? scale_ : 2.0 * scale_ * (1.0 + p_.norm());
  }
  bool time_invariant() const override { return true; }

 private:
  Vec p_;
  int power_;
  double scale_;
};

class LinearLoss final : public LossStream {
 public:
  explicit LinearLoss(Vec c) : c_(std::move(c)) {}
  double value(int, const Vec& y) const override { return c_.dot(y); }
  Vec grad(int, const Vec& y) const override {
    (void)y;
    return c_;
  }
  double lipschitz() const override { return c_.norm(); }
  bool time_invariant() const override { return true; }

 private:
  Vec c_;
};

class RampLoss final : public LossStream {
 public:
  RampLoss(double L, double R) : L_(L), R_(R) {}
  double value(int, const Vec& y) const override { return -L_ * y[0] + L_ * R_; }
  Vec grad(int, const Vec& y) const override {
    Vec g(y.size());
    g.setZero();
    g[0] = -L_;
    return g;
  }
  double lipschitz() const override { return L_; }
  bool time_invariant() const override { return true; }

 private:
  double L_, R_;
};

class FunctionalLoss final : public LossStream {
 public:
  FunctionalLoss(std::function<double(int, const Vec&)> value,
                 std::function<Vec(int, const Vec&)> grad, double lipschitz, double lambda,
                 double beta, bool invariant)
      : value_(std::move(value)),
        grad_(std::move(grad)),
        lipschitz_(lipschitz),
        lambda_(lambda),
        beta_(beta),
        invariant_(invariant) {}
  double value(int t, const Vec& y) const override { return value_(t, y); }
  Vec grad(int t, const Vec& y) const override { return grad_(t, y); }
  double lipschitz() const override { return lipschitz_; }
  double holder_lambda() const override { return lambda_; }
  double holder_beta() const override { return beta_; }
  bool time_invariant() const override { return invariant_; }

 private:
  std::function<double(int, const Vec&)> value_;
  std::function<Vec(int, const Vec&)> grad_;
  double lipschitz_, lambda_, beta_;
  bool invariant_;
};

}  // namespace

LossStreamPtr norm_loss(Vec p, int power, double scale) {
  return std::make_shared<NormLoss>(std::move(p), power, scale);
}
LossStreamPtr linear_loss(Vec c) { return std::make_shared<LinearLoss>(std::move(c)); }
LossStreamPtr ramp_loss(double L, double R) { return std::make_shared<RampLoss>(L, R); }
LossStreamPtr functional_loss(std::function<double(int, const Vec&)> value,
                              std::function<Vec(int, const Vec&)> grad, double lipschitz,
                              double lambda, double beta, bool time_invariant) {
  return std::make_shared<FunctionalLoss>(std::move(value), std::move(grad), lipschitz, lambda,
                                          beta, time_invariant);
}

}  // namespace nestctl
