#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "mcf/grid.hpp"
#include "mcf/spaceform.hpp"

namespace mcf {

/// Snapshot of F: M^n -> F^{n+d}(c) sampled on every node of a grid, ghosts included.
/// Immutable once constructed; flow steps produce new snapshots that share the grid.
class Immersion {
 public:
  /// Takes ownership of node coordinates for every grid node (ghosts must already be filled).
  /// Validates dimensions and the quadric constraint at interior nodes.
  Immersion(SpaceForm space, std::shared_ptr<const Grid> grid, std::vector<FlatVec> coords, int codim);

  /// Builds from interior values: projects them onto the quadric and exchanges ghosts.
  static Immersion from_interior(SpaceForm space, std::shared_ptr<const Grid> grid, std::vector<FlatVec> coords,
                                 int codim);

  const SpaceForm& space() const { return space_; }
  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::span<const FlatVec> coords() const { return coords_; }
  const FlatVec& at(std::size_t node) const { return coords_[node]; }
  int intrinsic_dim() const { return grid_->dim(); }
  int codim() const { return codim_; }

  /// max over interior nodes of |<F,F> - 1/c|.
  double max_quadric_residual() const;

  static constexpr double kQuadricTolerance = 1e-10;

 private:
  SpaceForm space_;
  std::shared_ptr<const Grid> grid_;
  std::vector<FlatVec> coords_;
  int codim_;
};

/// Samples an arbitrary parametrization at every node (ghosts included, exactly).
Immersion sample_immersion(const SpaceForm& space, ParamDomain domain, int codim,
                           const std::function<FlatVec(const ParamPoint&)>& shape);

/// Distance sphere of `radius` about `center`, parametrized by the unit sphere of
/// the first n+1 tangent directions at the center.
Immersion make_geodesic_sphere(const SpaceForm& space, ParamDomain domain, const FlatVec& center, double radius);

/// One entry of the perturbation catalogue applied to a geodesic sphere.
///   axis == 0: radial graph, distance = radius * (1 + sum amplitude * Y_mode(u));
///   axis == j >= 1 (needs d > j): displacement radius * amplitude * Y_mode(u) along
///   the j-th tangent direction orthogonal to the sphere's totally geodesic slice.
///
/// Catalogue Y_k on the parameter sphere u = (x, y, z[, w]):
///   0: 3z^2 - 1   1: xy   2: x^2 - y^2   3: z(5z^2 - 3)   4: xyz   5: x
struct PerturbationMode {
  int mode = 0;
  double amplitude = 0.0;
  int axis = 0;
};

inline constexpr int kPerturbationCatalogueSize = 6;
double perturbation_basis(int mode, const ParamPoint& u);

Immersion make_perturbed_sphere(const SpaceForm& space, ParamDomain domain, double radius,
                                std::span<const PerturbationMode> modes);

/// Rotational torus with radii (major, minor), built in the tangent space at the
/// default center and carried to the space form by the exponential map; the
/// result lies in a 3-dimensional totally geodesic slice.
Immersion make_torus(const SpaceForm& space, ParamDomain domain, std::pair<double, double> radii, int codim);

/// Doubles the resolution by degree-5 Lagrange interpolation in parameter space,
/// then projects onto the quadric.
Immersion refine(const Immersion& imm);

}  // namespace mcf
