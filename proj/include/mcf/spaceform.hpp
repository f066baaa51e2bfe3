#pragma once

#include <vector>

#include "mcf/flat_vector.hpp"

namespace mcf {

enum class Signature { euclidean, lorentzian };

/// The simply connected space form of constant curvature c, modelled as
///   c < 0: upper sheet of <P,P> = 1/c in Minkowski space (signature -,+,...,+),
///   c = 0: Euclidean space itself,
///   c > 0: the sphere <P,P> = 1/c in Euclidean space.
/// The flat embedding space has one coordinate more than the space form when c != 0.
class SpaceForm {
 public:
  SpaceForm(double c, int ambient_dim);

  double curvature() const { return c_; }
  int ambient_dim() const { return ambient_dim_; }
  int flat_dim() const { return flat_dim_; }
  Signature signature() const { return c_ < 0.0 ? Signature::lorentzian : Signature::euclidean; }

  /// Signature-weighted dot product; throws InputError on dimension mismatch.
  double bilinear(const FlatVec& u, const FlatVec& v) const;

  /// Unchecked bilinear form for inner loops.
  double dot(const FlatVec& u, const FlatVec& v) const {
    double s = euclidean_dot(u, v);
    if (c_ < 0.0) s -= 2.0 * u[0] * v[0];
    return s;
  }

  /// Rescales p onto the quadric; identity when c = 0.
  FlatVec project_to_quadric(const FlatVec& p) const;

  /// w - c<w,base> base: the part of w tangent to the quadric at base.
  FlatVec tangent_project(const FlatVec& base, const FlatVec& w) const {
    if (c_ == 0.0) return w;
    FlatVec r = w;
    r.axpy(-c_ * dot(w, base), base);
    return r;
  }

  /// Intrinsic distance of the space form. Arguments of arccosh/arccos within
  /// kDomainClamp of the boundary are clamped, beyond it DomainError is thrown.
  double geodesic_distance(const FlatVec& p, const FlatVec& q) const;

  /// |<p,p> - 1/c|, or 0 when c = 0.
  double quadric_residual(const FlatVec& p) const;

  /// e0/sqrt|c| for c != 0, the origin for c = 0.
  FlatVec default_center() const;

  /// Orthonormal basis of the tangent space at `base` (ambient_dim vectors),
  /// obtained by Gram-Schmidt from the coordinate axes.
  std::vector<FlatVec> tangent_frame(const FlatVec& base) const;

  /// Geodesic from `base` in the unit tangent direction `dir`, evaluated at arc length s.
  FlatVec exp_map(const FlatVec& base, const FlatVec& dir, double s) const;

  /// Exponential map for an arbitrary tangent vector v (|v| = arc length).
  FlatVec exp_map(const FlatVec& base, const FlatVec& v) const;

  static constexpr double kDomainClamp = 1e-9;

 private:
  void check_dim(const FlatVec& u) const;

  double c_;
  int ambient_dim_;
  int flat_dim_;
};

}  // namespace mcf
