#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mcf/geometry.hpp"

using namespace mcf;

namespace {

Immersion hyperbolic_sphere(int res, int d = 1) {
  const SpaceForm s(-1.0, 2 + d);
  return make_geodesic_sphere(s, {Topology::sphere2, res}, s.default_center(), 0.5);
}

Immersion bumpy(int res, int d = 1) {
  const SpaceForm s(-1.0, 2 + d);
  const PerturbationMode m[2] = {{0, 0.02, 0}, {1, 0.02, 1}};
  return make_perturbed_sphere(s, {Topology::sphere2, res}, 0.5, std::span(m, d == 1 ? 1 : 2));
}

double max_rel_error(const Immersion& imm, double exact, double PointGeometry::*field) {
  const SurfaceGeometry sg(imm);
  double worst = 0.0;
  for (std::size_t node : imm.grid().interior()) worst = std::max(worst, std::abs(sg.at(node).*field - exact) / exact);
  return worst;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Rotates the last two flat coordinates; an isometry of every model that fixes the default center.
Immersion rotated(const Immersion& imm, double angle) {
  std::vector<FlatVec> coords(imm.coords().begin(), imm.coords().end());
  const int a = coords[0].dim() - 2, b = coords[0].dim() - 1;
  for (FlatVec& p : coords) {
    const double x = p[a], y = p[b];
    p[a] = std::cos(angle) * x - std::sin(angle) * y;
    p[b] = std::sin(angle) * x + std::cos(angle) * y;
  }
  return Immersion(imm.space(), imm.grid_ptr(), std::move(coords), imm.codim());
}

}  // namespace

TEST_CASE("round spheres") {
  const SpaceForm E(0.0, 3);
  const Immersion unit = make_geodesic_sphere(E, {Topology::sphere2, 32}, E.default_center(), 1.0);
  CHECK(max_rel_error(unit, 4.0, &PointGeometry::normsq_H) <= 1e-3);
  CHECK(max_rel_error(unit, 2.0, &PointGeometry::normsq_A) <= 1e-3);
  CHECK(max_rel_error(hyperbolic_sphere(32), 18.730777507, &PointGeometry::normsq_H) <= 1e-3);
  CHECK(max_rel_error(hyperbolic_sphere(32), 9.365388754, &PointGeometry::normsq_A) <= 1e-3);

  const SpaceForm S(1.0, 3);
  const Immersion equator =
      make_geodesic_sphere(S, {Topology::sphere2, 32}, S.default_center(), std::numbers::pi / 2);
  const SurfaceGeometry sg(equator);
  for (std::size_t node : equator.grid().interior()) {
    CHECK(sg.at(node).normsq_H <= 1e-8);
    CHECK(sg.at(node).normsq_A <= 1e-8);
  }
}

TEST_CASE("sphere invariants") {
  const Immersion s = hyperbolic_sphere(32);
  const SurfaceGeometry sg(s);
  for (std::size_t node : s.grid().interior()) {
    const InvariantBundle inv = sg.invariants(node);
    CHECK(inv.R2 == doctest::Approx(175.421013).epsilon(1e-3));
    CHECK(inv.K_min == doctest::Approx(3.682694377).epsilon(1e-3));
    CHECK(inv.R1 == doctest::Approx(9.365388754 * 9.365388754).epsilon(1e-3));
    CHECK(std::abs(inv.Z) <= 1e-2);
    CHECK(inv.Rperp_sq <= 1e-14);
    CHECK(inv.normsq_gradH <= 1e-3);
    CHECK(inv.normsq_gradA <= 1e-2);
  }
}

TEST_CASE("gradient invariants of the sphere vanish at second order") {
  auto worst = [](int res) {
    const Immersion s = hyperbolic_sphere(res);
    const SurfaceGeometry sg(s);
    double a = 0.0, h = 0.0;
    for (std::size_t node : s.grid().interior()) {
      a = std::max(a, sg.grad_A_sq(node));
      h = std::max(h, sg.grad_H_sq(node));
    }
    return std::pair{a, h};
  };
  const auto [a16, h16] = worst(16);
  const auto [a32, h32] = worst(32);
  INFO("grad A " << a16 << " " << a32 << ", grad H " << h16 << " " << h32);
  // Squared norms of O(h^2) errors drop by 16 per halving.
  CHECK(a16 / a32 >= 8.0);
  CHECK(h16 / h32 >= 4.0);
}

TEST_CASE("algebraic identities and normality on a perturbed sphere in codimension two") {
  const Immersion imm = bumpy(16, 2);
  const SurfaceGeometry sg(imm);
  const SpaceForm& space = imm.space();
  for (std::size_t node : imm.grid().interior()) {
    const PointGeometry& g = sg.at(node);
    CHECK(rel(g.normsq_Aring, g.normsq_A - g.normsq_H / 2.0) <= 1e-10);
    const double scale = std::sqrt(g.normsq_A);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) CHECK(std::abs(space.dot(g.A_vec[i][j], g.tangents[k])) <= 1e-10 * scale);
        CHECK(std::abs(space.dot(g.A_vec[i][j], g.position)) <= 1e-10 * scale);
        for (int m = 0; m < g.A_vec[i][j].dim(); ++m) CHECK(g.A_vec[i][j][m] == doctest::Approx(g.A_vec[j][i][m]));
      }
    }
    const InvariantBundle inv = sg.invariants(node);
    CHECK(inv.R1 >= 0.0);
    CHECK(inv.R2 >= 0.0);
    CHECK(inv.Rperp_sq >= 0.0);
    REQUIRE(inv.A_ring_H_sq.has_value());
    CHECK(rel(*inv.A_ring_H_sq + *inv.A_ring_I_sq, g.normsq_Aring) <= 1e-10);
  }
}

TEST_CASE("invariants do not depend on the normal frame") {
  const Immersion imm = bumpy(16, 2);
  const Immersion turned = rotated(imm, 0.7);
  const SurfaceGeometry a(imm), b(turned);
  for (std::size_t node : imm.grid().interior()) {
    const InvariantBundle x = a.invariants(node), y = b.invariants(node);
    CHECK(rel(y.R1, x.R1) <= 1e-10);
    CHECK(rel(y.R2, x.R2) <= 1e-10);
    CHECK(std::abs(y.Rperp_sq - x.Rperp_sq) <= 1e-10 * (1.0 + x.R1));
    CHECK(std::abs(y.Z - x.Z) <= 1e-10 * (1.0 + x.R1));
  }
}

TEST_CASE("gradients on a perturbed sphere") {
  const Immersion imm = bumpy(32);
  const SurfaceGeometry sg(imm);
  const double h2 = imm.grid().spacing() * imm.grid().spacing();
  double largest = 0.0;
  for (std::size_t node : imm.grid().interior()) {
    const InvariantBundle inv = sg.invariants(node);
    largest = std::max(largest, inv.normsq_gradH);
    const double A4 = sg.at(node).normsq_A * sg.at(node).normsq_A;
    CHECK(inv.normsq_gradA >= 0.75 * inv.normsq_gradH - h2 * A4);
  }
  CHECK(largest > 1e-2);

  // Richardson check of |grad H|^2 at a fixed parameter point.
  auto probe = [](int res) {
    const Immersion s = bumpy(res);
    const Interpolant w = s.grid().locate(ParamPoint{0.6, 0.0, 0.8, 0.0});
    const SurfaceGeometry sg(s);
    ScalarField f(s.grid().size(), 0.0);
    for (std::size_t node : s.grid().interior()) f[node] = sg.grad_H_sq(node);
    return w.apply(std::span<const double>(f));
  };
  const double g16 = probe(16), g32 = probe(32), g64 = probe(64);
  CHECK(std::log2(std::abs(g16 - g32) / std::abs(g32 - g64)) >= 1.8);
}

TEST_CASE("Laplace-Beltrami") {
  const SpaceForm E(0.0, 3);
  const Immersion unit = make_geodesic_sphere(E, {Topology::sphere2, 32}, E.default_center(), 1.0);
  const ScalarField one(unit.grid().size(), 1.0);
  const ScalarField lap1 = laplace_beltrami(unit, one);
  for (std::size_t node : unit.grid().interior()) CHECK(std::abs(lap1[node]) <= 1e-10);

  const ScalarField x = sample_field(unit, [](const FlatVec& p) { return p[0]; });
  const ScalarField lx = laplace_beltrami(unit, x);
  for (std::size_t node : unit.grid().interior()) CHECK(std::abs(lx[node] + 2.0 * x[node]) <= 5e-3);

  const ScalarField f = sample_field(unit, [](const FlatVec& p) { return std::exp(p[2]) * p[0] * p[1]; });
  CHECK(std::abs(surface_integral(unit, laplace_beltrami(unit, f))) <= 5e-3);
}

TEST_CASE("surface integrals") {
  const SpaceForm E(0.0, 3);
  const Immersion unit = make_geodesic_sphere(E, {Topology::sphere2, 32}, E.default_center(), 1.0);
  const ScalarField one(unit.grid().size(), 1.0);
  CHECK(surface_integral(unit, one) == doctest::Approx(4.0 * std::numbers::pi).epsilon(5e-3));
  const Immersion h = hyperbolic_sphere(32);
  CHECK(surface_integral(h, ScalarField(h.grid().size(), 1.0)) == doctest::Approx(3.412276265).epsilon(5e-3));
}

TEST_CASE("geometric convergence on the sphere") {
  const double e16 = max_rel_error(hyperbolic_sphere(16), 18.730777507, &PointGeometry::normsq_H);
  const double e32 = max_rel_error(hyperbolic_sphere(32), 18.730777507, &PointGeometry::normsq_H);
  CHECK(std::log2(e16 / e32) >= 1.8);
  const auto umbilicity = [](const Immersion& imm) {
    const SurfaceGeometry sg(imm);
    double u = 0.0;
    for (std::size_t node : imm.grid().interior()) u = std::max(u, sg.at(node).normsq_Aring / sg.at(node).normsq_H);
    return u;
  };
  CHECK(umbilicity(hyperbolic_sphere(32)) <= 1e-6);
}

TEST_CASE("three-dimensional spheres") {
  const SpaceForm H(-1.0, 4);
  const Immersion s = make_geodesic_sphere(H, {Topology::sphere3, 12}, H.default_center(), 0.5);
  const SurfaceGeometry sg(s);
  const double H2 = 9.0 / std::pow(std::tanh(0.5), 2);
  const double K = 1.0 / std::pow(std::sinh(0.5), 2);
  for (std::size_t node : s.grid().interior()) {
    CHECK(sg.at(node).normsq_H == doctest::Approx(H2).epsilon(2e-2));
    CHECK(sg.invariants(node).K_min == doctest::Approx(K).epsilon(2e-2));
  }
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  const Immersion imm = bumpy(16, 2);
  std::vector<CurvatureSample> a(imm.grid().size()), b(imm.grid().size());
  mean_curvature_field(imm, a, Exec::serial);
  mean_curvature_field(imm, b, Exec::parallel);
  for (std::size_t node : imm.grid().interior()) {
    CHECK(a[node].normsq_A == b[node].normsq_A);
    CHECK(a[node].area_element == b[node].area_element);
    for (int k = 0; k < a[node].V.dim(); ++k) CHECK(a[node].V[k] == b[node].V[k]);
  }
  const SurfaceGeometry s(imm, Exec::serial), p(imm, Exec::parallel);
  const ScalarField f = s.field([](const PointGeometry& g) { return g.normsq_H; });
  CHECK(s.integral(f) == p.integral(p.field([](const PointGeometry& g) { return g.normsq_H; })));
  for (std::size_t node : imm.grid().interior()) CHECK(s.invariants(node).Z == p.invariants(node).Z);
}

TEST_CASE("the mean curvature field is the trace of the full geometry") {
  const Immersion imm = bumpy(16);
  std::vector<CurvatureSample> cs(imm.grid().size());
  mean_curvature_field(imm, cs, Exec::parallel);
  const SurfaceGeometry sg(imm);
  for (std::size_t node : imm.grid().interior()) {
    CHECK(cs[node].normsq_H == doctest::Approx(sg.at(node).normsq_H).epsilon(1e-10));
    CHECK(cs[node].normsq_A == doctest::Approx(sg.at(node).normsq_A).epsilon(1e-10));
  }
}
