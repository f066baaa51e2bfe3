#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcf/geometry.hpp"

using namespace mcf;

namespace {

double max_radius_error(const Immersion& imm, const FlatVec& center, double r) {
  double worst = 0.0;
  for (std::size_t node : imm.grid().interior()) {
    worst = std::max(worst, std::abs(imm.space().geodesic_distance(center, imm.at(node)) - r));
  }
  return worst;
}

double area(const Immersion& imm) { return surface_integral(imm, ScalarField(imm.grid().size(), 1.0)); }

}  // namespace

TEST_CASE("geodesic spheres") {
  const SpaceForm H(-1.0, 3);
  const Immersion s = make_geodesic_sphere(H, {Topology::sphere2, 16}, H.default_center(), 0.5);
  CHECK(max_radius_error(s, H.default_center(), 0.5) <= 1e-12);
  CHECK(s.max_quadric_residual() <= 1e-10);
  CHECK(s.codim() == 1);
  for (std::size_t node = 0; node < s.grid().size(); ++node) CHECK(H.quadric_residual(s.at(node)) <= 1e-10);

  const SpaceForm S(1.0, 3);
  CHECK_THROWS_AS(make_geodesic_sphere(S, {Topology::sphere2, 16}, S.default_center(), 4.0), InputError);
  CHECK_THROWS_AS(make_geodesic_sphere(H, {Topology::sphere2, 16}, H.default_center(), -1.0), InputError);
  CHECK_THROWS_AS(make_geodesic_sphere(H, {Topology::torus2, 16}, H.default_center(), 0.5), InputError);

  const SpaceForm H5(-1.0, 5);
  const Immersion s3 = make_geodesic_sphere(H5, {Topology::sphere3, 8}, H5.default_center(), 0.5);
  CHECK(s3.intrinsic_dim() == 3);
  CHECK(s3.codim() == 2);
  CHECK(max_radius_error(s3, H5.default_center(), 0.5) <= 1e-12);
}

TEST_CASE("perturbed spheres") {
  const SpaceForm H(-1.0, 3);
  const ParamDomain dom{Topology::sphere2, 16};
  const PerturbationMode zero{0, 0.0, 0};
  const Immersion a = make_perturbed_sphere(H, dom, 0.5, std::span(&zero, 1));
  const Immersion b = make_geodesic_sphere(H, dom, H.default_center(), 0.5);
  for (std::size_t node = 0; node < a.grid().size(); ++node) {
    for (int k = 0; k < 4; ++k) CHECK(a.at(node)[k] == doctest::Approx(b.at(node)[k]).epsilon(1e-14));
  }
  const PerturbationMode bad_axis{0, 0.02, 1};
  CHECK_THROWS_AS(make_perturbed_sphere(H, dom, 0.5, std::span(&bad_axis, 1)), InputError);
  const PerturbationMode bad_mode{17, 0.02, 0};
  CHECK_THROWS_AS(make_perturbed_sphere(H, dom, 0.5, std::span(&bad_mode, 1)), InputError);
  CHECK(perturbation_basis(0, ParamPoint{0, 0, 1, 0}) == 2.0);
  CHECK(perturbation_basis(5, ParamPoint{0.6, 0.8, 0, 0}) == 0.6);
}

TEST_CASE("tori") {
  const SpaceForm E(0.0, 3);
  const double exact = 4.0 * std::numbers::pi * std::numbers::pi * 2.0;
  const Immersion t32 = make_torus(E, {Topology::torus2, 32}, {2.0, 1.0}, 1);
  const Immersion t64 = make_torus(E, {Topology::torus2, 64}, {2.0, 1.0}, 1);
  CHECK(std::abs(area(t64) - exact) / exact <= 5e-3);
  CHECK(area(t32) == doctest::Approx(78.956835209).epsilon(5e-3));

  int positive = 0, negative = 0;
  for (std::size_t node : t32.grid().interior()) {
    const double K = invariants(t32, node).K_min;
    positive += K > 1e-3;
    negative += K < -1e-3;
  }
  CHECK(positive > 0);
  CHECK(negative > 0);

  CHECK_THROWS_AS(make_torus(E, {Topology::sphere2, 16}, {2.0, 1.0}, 1), InputError);
  CHECK_THROWS_AS(make_torus(E, {Topology::torus2, 16}, {1.0, 2.0}, 1), InputError);
  const SpaceForm H4(-1.0, 4);
  CHECK(make_torus(H4, {Topology::torus2, 16}, {1.5, 0.3}, 2).codim() == 2);
}

TEST_CASE("refinement") {
  const SpaceForm H(-1.0, 3);
  const Immersion s16 = make_geodesic_sphere(H, {Topology::sphere2, 16}, H.default_center(), 0.5);
  const Immersion r32 = refine(s16);
  CHECK(r32.grid().resolution() == 32);
  CHECK(refine(r32).grid().resolution() == 64);
  const Immersion r8 = refine(make_geodesic_sphere(H, {Topology::sphere2, 8}, H.default_center(), 0.5));
  CHECK(max_radius_error(r32, H.default_center(), 0.5) * 3.0 <= max_radius_error(r8, H.default_center(), 0.5));

  const SpaceForm E(0.0, 3);
  const double exact = 78.956835209;
  const Immersion t16 = make_torus(E, {Topology::torus2, 16}, {2.0, 1.0}, 1);
  const double e16 = std::abs(area(refine(make_torus(E, {Topology::torus2, 8}, {2.0, 1.0}, 1))) - exact);
  const double e32 = std::abs(area(refine(t16)) - exact);
  CHECK(e32 * 3.0 <= e16);
}

TEST_CASE("constructor validation") {
  const SpaceForm H(-1.0, 3);
  const Immersion s = make_geodesic_sphere(H, {Topology::sphere2, 8}, H.default_center(), 0.5);
  std::vector<FlatVec> coords(s.coords().begin(), s.coords().end());
  CHECK_THROWS_AS(Immersion(H, s.grid_ptr(), coords, 2), InputError);
  coords[s.grid().interior()[0]][0] += 0.1;
  CHECK_THROWS_AS(Immersion(H, s.grid_ptr(), coords, 1), InputError);
}
