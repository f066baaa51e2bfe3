#pragma once

#include <array>
#include <cassert>
#include <initializer_list>
#include <span>

#include "mcf/errors.hpp"

namespace mcf {

/// Upper bound on the dimension of the flat embedding space.
inline constexpr int kMaxFlatDim = 8;

/// A point or vector of the flat space that hosts the model quadric.
///
/// Storage is fixed-capacity and zero padded past `dim()`, so arithmetic
/// runs over the full capacity without branching on the dimension.
class FlatVec {
 public:
  FlatVec() = default;

  explicit FlatVec(int dim) : dim_(dim) {
    if (dim < 0 || dim > kMaxFlatDim) throw InputError("flat dimension out of range");
  }

  FlatVec(std::initializer_list<double> values) : dim_(static_cast<int>(values.size())) {
    if (dim_ > kMaxFlatDim) throw InputError("flat dimension out of range");
    int k = 0;
    for (double v : values) v_[k++] = v;
  }

  static FlatVec basis(int dim, int axis) {
    FlatVec e(dim);
    e[axis] = 1.0;
    return e;
  }

  int dim() const { return dim_; }
  double& operator[](int k) { return v_[k]; }
  double operator[](int k) const { return v_[k]; }
  std::span<const double> values() const { return {v_.data(), static_cast<std::size_t>(dim_)}; }

  FlatVec& operator+=(const FlatVec& o) {
    for (int k = 0; k < kMaxFlatDim; ++k) v_[k] += o.v_[k];
    if (dim_ == 0) dim_ = o.dim_;
    return *this;
  }
  FlatVec& operator-=(const FlatVec& o) {
    for (int k = 0; k < kMaxFlatDim; ++k) v_[k] -= o.v_[k];
    if (dim_ == 0) dim_ = o.dim_;
    return *this;
  }
  FlatVec& operator*=(double s) {
    for (int k = 0; k < kMaxFlatDim; ++k) v_[k] *= s;
    return *this;
  }
  /// this += s * o
  FlatVec& axpy(double s, const FlatVec& o) {
    for (int k = 0; k < kMaxFlatDim; ++k) v_[k] += s * o.v_[k];
    if (dim_ == 0) dim_ = o.dim_;
    return *this;
  }

  friend FlatVec operator+(FlatVec a, const FlatVec& b) { return a += b; }
  friend FlatVec operator-(FlatVec a, const FlatVec& b) { return a -= b; }
  friend FlatVec operator*(double s, FlatVec a) { return a *= s; }
  friend FlatVec operator*(FlatVec a, double s) { return a *= s; }
  friend FlatVec operator-(FlatVec a) { return a *= -1.0; }

  /// Plain Euclidean dot product of the stored coordinates.
  friend double euclidean_dot(const FlatVec& a, const FlatVec& b) {
    double s = 0.0;
    for (int k = 0; k < kMaxFlatDim; ++k) s += a.v_[k] * b.v_[k];
    return s;
  }

 private:
  std::array<double, kMaxFlatDim> v_{};
  int dim_ = 0;
};

}  // namespace mcf
