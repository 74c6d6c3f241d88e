#include "nestctl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace nestctl {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double simplex_facet_scale(int n) { return std::sqrt(double(n) / double(n - 1)); }

// Direction inside the hull {sum = const} that moves coordinate i to its
// facet while spreading mass over the others.
Vec simplex_facet_direction(int n, int i) {
  Vec d = Vec::Constant(n, 1.0 / double(n - 1));
  d[i] = -1.0;
  return d;
}

class BallBody final : public BodyImpl {
 public:
  BallBody(Vec center, double radius) : center_(std::move(center)), radius_(radius) {
    require(radius_ > 0.0, "ball: radius must be positive");
  }
  int dim() const override { return int(center_.size()); }
  double inradius() const override { return std::max(0.0, radius_ - center_.norm()); }
  double circumradius() const override { return radius_ + center_.norm(); }
  Vec project(const Vec& z) const override {
    const Vec d = z - center_;
    const double n = d.norm();
    if (n <= radius_) return z;
    return center_ + (radius_ / n) * d;
  }
  double boundary_distance(const Vec& y) const override {
    const double margin = radius_ - (y - center_).norm();
    require(margin >= -kMembershipTol, "boundary_distance: point outside ball");
    return std::max(0.0, margin);
  }
  Vec nearest_boundary_point(const Vec& y) const override {
    Vec d = y - center_;
    const double n = d.norm();
    if (n < 1e-15) {
      d = Vec::Zero(dim());
      d[0] = 1.0;
      return center_ + radius_ * d;
    }
    return center_ + (radius_ / n) * d;
  }
  std::string kind() const override { return "ball"; }

  const Vec& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  Vec center_;
  double radius_;
};

class BoxBody final : public BodyImpl {
 public:
  BoxBody(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    require(lo_.size() == hi_.size(), "box: lo/hi dimension mismatch");
    require((hi_.array() > lo_.array()).all(), "box: hi must exceed lo");
  }
  int dim() const override { return int(lo_.size()); }
  double inradius() const override {
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim(); ++i) r = std::min({r, hi_[i], -lo_[i]});
    return std::max(0.0, r);
  }
  double circumradius() const override {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += std::max(lo_[i] * lo_[i], hi_[i] * hi_[i]);
    return std::sqrt(s);
  }
  Vec project(const Vec& z) const override {
    return z.cwiseMax(lo_).cwiseMin(hi_);
  }
  double boundary_distance(const Vec& y) const override {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim(); ++i) m = std::min({m, y[i] - lo_[i], hi_[i] - y[i]});
    require(m >= -kMembershipTol, "boundary_distance: point outside box");
    return std::max(0.0, m);
  }
  Vec nearest_boundary_point(const Vec& y) const override {
    int best_i = 0;
    double best = std::numeric_limits<double>::infinity();
    bool snap_lo = true;
    for (int i = 0; i < dim(); ++i) {
      if (y[i] - lo_[i] < best) { best = y[i] - lo_[i]; best_i = i; snap_lo = true; }
      if (hi_[i] - y[i] < best) { best = hi_[i] - y[i]; best_i = i; snap_lo = false; }
    }
    Vec z = y;
    z[best_i] = snap_lo ? lo_[best_i] : hi_[best_i];
    return z;
  }
  std::string kind() const override { return "box"; }

 private:
  Vec lo_, hi_;
};

class SimplexBody final : public BodyImpl {
 public:
  explicit SimplexBody(int n) : n_(n) { require(n >= 2, "simplex: n must be >= 2"); }
  int dim() const override { return n_; }
  // Radii are about the coordinate origin, which lies outside the simplex;
  // state-space runs recenter at the centroid first.
  double inradius() const override { return 0.0; }
  double circumradius() const override { return 1.0; }
  Vec project(const Vec& z) const override { return project_simplex(z); }
  double boundary_distance(const Vec& y) const override {
    require(std::abs(y.sum() - 1.0) <= 1e-7, "boundary_distance: point off simplex hull");
    require(y.minCoeff() >= -kMembershipTol, "boundary_distance: point outside simplex");
    return std::max(0.0, y.minCoeff()) * simplex_facet_scale(n_);
  }
  Vec nearest_boundary_point(const Vec& y) const override {
    int i;
    y.minCoeff(&i);
    return y + y[i] * simplex_facet_direction(n_, i);
  }
  Vec hull_direction(const Vec& u) const override {
    return u - Vec::Constant(n_, u.mean());
  }
  std::string kind() const override { return "simplex"; }

 private:
  int n_;
};

class SmoothedSimplexBody final : public BodyImpl {
 public:
  SmoothedSimplexBody(int n, double phi) : n_(n), phi_(phi) {
    require(n >= 2, "smoothed_simplex: n must be >= 2");
    require(phi >= 0.0 && phi <= 1.0, "smoothed_simplex: phi must lie in [0,1]");
  }
  int dim() const override { return n_; }
  double inradius() const override { return 0.0; }
  double circumradius() const override {
    const double a = 1.0 - phi_ + phi_ / double(n_);
    const double b = phi_ / double(n_);
    return std::sqrt(a * a + double(n_ - 1) * b * b);
  }
  Vec project(const Vec& z) const override {
    const Vec u = Vec::Constant(n_, 1.0 / double(n_));
    if (phi_ >= 1.0) return u;
    // Affine similarity onto the plain simplex and back.
    return (1.0 - phi_) * project_simplex((z - phi_ * u) / (1.0 - phi_)) + phi_ * u;
  }
  double boundary_distance(const Vec& y) const override {
    require(std::abs(y.sum() - 1.0) <= 1e-7, "boundary_distance: point off simplex hull");
    const double floor = phi_ / double(n_);
    require(y.minCoeff() >= floor - kMembershipTol, "boundary_distance: point outside smoothed simplex");
    return std::max(0.0, y.minCoeff() - floor) * simplex_facet_scale(n_);
  }
  Vec nearest_boundary_point(const Vec& y) const override {
    int i;
    y.minCoeff(&i);
    return y + (y[i] - phi_ / double(n_)) * simplex_facet_direction(n_, i);
  }
  Vec hull_direction(const Vec& u) const override {
    return u - Vec::Constant(n_, u.mean());
  }
  std::string kind() const override { return "smoothed_simplex"; }

 private:
  int n_;
  double phi_;
};

class HullBallBody final : public BodyImpl {
 public:
  HullBallBody(Vec center, double radius) : center_(std::move(center)), radius_(radius) {
    require(radius_ > 0.0, "hull_ball: radius must be positive");
    require(radius_ <= center_.minCoeff() + 1e-12, "hull_ball: radius exceeds simplex margin");
  }
  int dim() const override { return int(center_.size()); }
  double inradius() const override { return 0.0; }  // origin is off the hull
  double circumradius() const override { return center_.norm() + radius_; }
  Vec project(const Vec& z) const override {
    // Onto the hull {sum = sum(center)} first, then radially.
    Vec d = z - center_;
    d -= Vec::Constant(dim(), d.mean());
    const double n = d.norm();
    if (n > radius_) d *= radius_ / n;
    return center_ + d;
  }
  double boundary_distance(const Vec& y) const override {
    const Vec d = y - center_;
    require(std::abs(d.sum()) <= 1e-7, "boundary_distance: point off hull");
    const double margin = radius_ - d.norm();
    require(margin >= -kMembershipTol, "boundary_distance: point outside hull ball");
    return std::max(0.0, margin);
  }
  Vec nearest_boundary_point(const Vec& y) const override {
    Vec d = y - center_;
    d -= Vec::Constant(dim(), d.mean());
    const double n = d.norm();
    if (n < 1e-15) {
      d = hull_direction(Vec::Unit(dim(), 0));
      d /= d.norm();
      return center_ + radius_ * d;
    }
    return center_ + (radius_ / n) * d;
  }
  Vec hull_direction(const Vec& u) const override {
    return u - Vec::Constant(dim(), u.mean());
  }
  std::string kind() const override { return "hull_ball"; }

 private:
  Vec center_;
  double radius_;
};

class ContractedBody final : public BodyImpl {
 public:
  ContractedBody(std::shared_ptr<const BodyImpl> inner, double delta)
      : inner_(std::move(inner)), delta_(delta) {
    require(delta_ >= 0.0 && delta_ < 1.0, "contract: delta must lie in [0,1)");
  }
  int dim() const override { return inner_->dim(); }
  double inradius() const override { return (1.0 - delta_) * inner_->inradius(); }
  double circumradius() const override { return (1.0 - delta_) * inner_->circumradius(); }
  Vec project(const Vec& z) const override {
    const double s = 1.0 - delta_;
    return s * inner_->project(z / s);
  }
  double boundary_distance(const Vec& y) const override {
    const double s = 1.0 - delta_;
    return s * inner_->boundary_distance(y / s);
  }
  Vec nearest_boundary_point(const Vec& y) const override {
    const double s = 1.0 - delta_;
    return s * inner_->nearest_boundary_point(y / s);
  }
  Vec hull_direction(const Vec& u) const override { return inner_->hull_direction(u); }
  std::string kind() const override { return "contracted(" + inner_->kind() + ")"; }

 private:
  std::shared_ptr<const BodyImpl> inner_;
  double delta_;
};

class RecenteredBody final : public BodyImpl {
 public:
  RecenteredBody(std::shared_ptr<const BodyImpl> inner, Vec origin, double circumradius_hint)
      : inner_(std::move(inner)), origin_(std::move(origin)), circum_hint_(circumradius_hint) {
    require(int(origin_.size()) == inner_->dim(), "recentered: origin dimension mismatch");
  }
  int dim() const override { return inner_->dim(); }
  double inradius() const override { return inner_->boundary_distance(origin_); }
  double circumradius() const override {
    if (circum_hint_ > 0.0) return circum_hint_;
    return inner_->circumradius() + origin_.norm();
  }
  Vec project(const Vec& z) const override { return inner_->project(z + origin_) - origin_; }
  double boundary_distance(const Vec& y) const override {
    return inner_->boundary_distance(y + origin_);
  }
  Vec nearest_boundary_point(const Vec& y) const override {
    return inner_->nearest_boundary_point(y + origin_) - origin_;
  }
  Vec hull_direction(const Vec& u) const override { return inner_->hull_direction(u); }
  std::string kind() const override { return "recentered(" + inner_->kind() + ")"; }

 private:
  std::shared_ptr<const BodyImpl> inner_;
  Vec origin_;
  double circum_hint_;
};

}  // namespace

Vec project_simplex(const Vec& z) {
  const int n = int(z.size());
  std::vector<double> u(z.data(), z.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0;
  double tau = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / double(i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      tau = t;
    }
  }
  (void)rho;
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = std::max(z[i] - tau, 0.0);
  return y;
}

ConvexBody ConvexBody::ball(const Vec& center, double radius) {
  return ConvexBody(std::make_shared<BallBody>(center, radius));
}
ConvexBody ConvexBody::ball(int dim, double radius) {
  return ball(Vec::Zero(dim), radius);
}
ConvexBody ConvexBody::box(const Vec& lo, const Vec& hi) {
  return ConvexBody(std::make_shared<BoxBody>(lo, hi));
}
ConvexBody ConvexBody::interval(double lo, double hi) {
  Vec l(1), h(1);
  l[0] = lo;
  h[0] = hi;
  return box(l, h);
}
ConvexBody ConvexBody::simplex(int n) {
  return ConvexBody(std::make_shared<SimplexBody>(n));
}
ConvexBody ConvexBody::smoothed_simplex(int n, double phi) {
  return ConvexBody(std::make_shared<SmoothedSimplexBody>(n, phi));
}
ConvexBody ConvexBody::hull_ball(const Vec& center, double radius) {
  return ConvexBody(std::make_shared<HullBallBody>(center, radius));
}
ConvexBody ConvexBody::recentered(const Vec& new_origin, double circumradius_hint) const {
  return ConvexBody(std::make_shared<RecenteredBody>(impl_, new_origin, circumradius_hint));
}
ConvexBody ConvexBody::contracted(double delta) const {
  return ConvexBody(std::make_shared<ContractedBody>(impl_, delta));
}

}  // namespace nestctl
