#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace nestctl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Single feasibility tolerance shared by every membership assertion in the
// controllers and environments.
inline constexpr double kMembershipTol = 1e-9;

// Implementation interface behind ConvexBody. Radii are measured about the
// body's natural origin: the coordinate origin for balls and boxes, the
// centroid for simplex variants (which is where state-space runs recenter).
class BodyImpl {
 public:
  virtual ~BodyImpl() = default;
  virtual int dim() const = 0;
  virtual double inradius() const = 0;
  virtual double circumradius() const = 0;
  virtual Vec project(const Vec& z) const = 0;
  // Distance from a member y to the boundary, measured inside the affine
  // hull for flat bodies (simplexes and hull balls).
  virtual double boundary_distance(const Vec& y) const = 0;
  virtual Vec nearest_boundary_point(const Vec& y) const = 0;
  // Maps an ambient direction into the body's tangent (affine hull) subspace.
  virtual Vec hull_direction(const Vec& u) const { return u; }
  virtual std::string kind() const = 0;
};

// Convex state/action space with exact projection and boundary geometry.
// Values are immutable and cheap to copy; safe to share across runs.
class ConvexBody {
 public:
  ConvexBody() = default;
  explicit ConvexBody(std::shared_ptr<const BodyImpl> impl) : impl_(std::move(impl)) {}

  static ConvexBody ball(const Vec& center, double radius);
  static ConvexBody ball(int dim, double radius);  // centered at the origin
  static ConvexBody box(const Vec& lo, const Vec& hi);
  static ConvexBody interval(double lo, double hi);  // 1-D box
  static ConvexBody simplex(int n);
  static ConvexBody smoothed_simplex(int n, double phi);
  // Euclidean ball of the given radius around `center`, restricted to the
  // simplex hull {sum(y) = sum(center)}. Requires radius <= min_i center_i
  // so the disk stays inside the simplex.
  static ConvexBody hull_ball(const Vec& center, double radius);
  // Body translated so that `new_origin` becomes the coordinate origin. The
  // recentered inradius is exact (boundary distance of the new origin); the
  // circumradius uses the hint when given, else a triangle-inequality bound.
  ConvexBody recentered(const Vec& new_origin, double circumradius_hint = -1.0) const;

  bool valid() const { return impl_ != nullptr; }
  int dim() const { return impl_->dim(); }
  double inradius() const { return impl_->inradius(); }
  double circumradius() const { return impl_->circumradius(); }
  std::string kind() const { return impl_->kind(); }

  Vec project(const Vec& z) const {
    if (z.size() != dim()) throw std::invalid_argument("project: dimension mismatch");
    return impl_->project(z);
  }

  double distance(const Vec& z) const { return (z - project(z)).norm(); }

  bool contains(const Vec& z, double tol = kMembershipTol) const {
    if (z.size() != dim()) return false;
    return distance(z) <= tol + 1e-12;  // fp dust guard on exact members
  }

  double boundary_distance(const Vec& y) const {
    if (y.size() != dim()) throw std::invalid_argument("boundary_distance: dimension mismatch");
    return impl_->boundary_distance(y);
  }

  Vec nearest_boundary_point(const Vec& y) const { return impl_->nearest_boundary_point(y); }
  Vec hull_direction(const Vec& u) const { return impl_->hull_direction(u); }

  // Contraction about the origin: {y : y / (1 - delta) in this body}.
  ConvexBody contracted(double delta) const;

  const BodyImpl& impl() const { return *impl_; }
  std::shared_ptr<const BodyImpl> impl_ptr() const { return impl_; }

 private:
  std::shared_ptr<const BodyImpl> impl_;
};

// Projection onto the probability simplex by sort-and-threshold.
Vec project_simplex(const Vec& z);

}  // namespace nestctl
