#include "mcf/spaceform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcf {

SpaceForm::SpaceForm(double c, int ambient_dim)
    : c_(c), ambient_dim_(ambient_dim), flat_dim_(ambient_dim + (c != 0.0 ? 1 : 0)) {
  if (!std::isfinite(c)) throw InputError("curvature must be finite");
  if (ambient_dim < 2 || flat_dim_ > kMaxFlatDim) {
    throw InputError("ambient dimension " + std::to_string(ambient_dim) + " unsupported");
  }
}

void SpaceForm::check_dim(const FlatVec& u) const {
  if (u.dim() != flat_dim_) {
    throw InputError("flat vector has dimension " + std::to_string(u.dim()) + ", expected " +
                     std::to_string(flat_dim_));
  }
}

double SpaceForm::bilinear(const FlatVec& u, const FlatVec& v) const {
  check_dim(u);
  check_dim(v);
  return dot(u, v);
}

FlatVec SpaceForm::project_to_quadric(const FlatVec& p) const {
  check_dim(p);
  if (c_ == 0.0) return p;
  const double q = dot(p, p);
  // <p,p> must carry the sign of 1/c and be bounded away from the light cone / origin.
  if (!(q * c_ > 0.0) || std::abs(q) * std::abs(c_) < 1e-24) {
    throw DegeneratePointError("point cannot be scaled onto the quadric");
  }
  if (c_ < 0.0 && p[0] <= 0.0) throw DegeneratePointError("point lies on the lower sheet");
  return p * (1.0 / std::sqrt(q * c_));
}

double SpaceForm::geodesic_distance(const FlatVec& p, const FlatVec& q) const {
  check_dim(p);
  check_dim(q);
  const FlatVec diff = p - q;
  if (c_ == 0.0) return std::sqrt(dot(diff, diff));

  const double k = std::sqrt(std::abs(c_));
  const double x = c_ * dot(p, q);  // cosh(k d) for c<0, cos(k d) for c>0
  if (c_ < 0.0) {
    if (x < 1.0 - kDomainClamp) throw DomainError("arccosh argument below 1");
    // Chord form: <p-q,p-q> = (2/|c|)(cosh(kd) - 1) = (4/|c|) sinh^2(kd/2); accurate for small d.
    const double chord2 = std::max(dot(diff, diff), 0.0);
    return 2.0 * std::asinh(0.5 * k * std::sqrt(chord2)) / k;
  }
  if (x > 1.0 + kDomainClamp || x < -1.0 - kDomainClamp) {
    throw DomainError("arccos argument outside [-1, 1]");
  }
  const FlatVec sum = p + q;
  const double chord = std::sqrt(std::max(dot(diff, diff), 0.0));
  const double cochord = std::sqrt(std::max(dot(sum, sum), 0.0));
  return 2.0 * std::atan2(chord, cochord) / k;
}

double SpaceForm::quadric_residual(const FlatVec& p) const {
  if (c_ == 0.0) return 0.0;
  return std::abs(dot(p, p) - 1.0 / c_);
}

FlatVec SpaceForm::default_center() const {
  FlatVec o(flat_dim_);
  if (c_ != 0.0) o[0] = 1.0 / std::sqrt(std::abs(c_));
  return o;
}

std::vector<FlatVec> SpaceForm::tangent_frame(const FlatVec& base) const {
  check_dim(base);
  std::vector<FlatVec> frame;
  frame.reserve(static_cast<std::size_t>(ambient_dim_));
  for (int axis = 0; axis < flat_dim_ && static_cast<int>(frame.size()) < ambient_dim_; ++axis) {
    FlatVec v = tangent_project(base, FlatVec::basis(flat_dim_, axis));
    for (const FlatVec& e : frame) v.axpy(-dot(v, e), e);
    const double norm2 = dot(v, v);
    if (norm2 < 1e-12) continue;
    frame.push_back(v * (1.0 / std::sqrt(norm2)));
  }
  if (static_cast<int>(frame.size()) != ambient_dim_) {
    throw DegeneratePointError("could not build a tangent frame at base point");
  }
  return frame;
}

FlatVec SpaceForm::exp_map(const FlatVec& base, const FlatVec& dir, double s) const {
  if (c_ == 0.0) return base + s * dir;
  const double k = std::sqrt(std::abs(c_));
  if (c_ < 0.0) return std::cosh(k * s) * base + (std::sinh(k * s) / k) * dir;
  return std::cos(k * s) * base + (std::sin(k * s) / k) * dir;
}

FlatVec SpaceForm::exp_map(const FlatVec& base, const FlatVec& v) const {
  const double len = std::sqrt(std::max(dot(v, v), 0.0));
  if (len == 0.0) return base;
  return exp_map(base, v * (1.0 / len), len);
}

}  // namespace mcf
