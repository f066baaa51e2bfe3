#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcf/errors.hpp"
#include "mcf/grid.hpp"

using namespace mcf;

namespace {

double smooth(const ParamPoint& u, Topology topology) {
  if (topology == Topology::torus2) return std::sin(u[0]) * std::cos(2.0 * u[1]) + 0.3 * std::cos(u[0] - u[1]);
  return u[0] * u[1] + std::exp(0.5 * u[2]) - u[0] * u[0] * u[2] + 0.2 * u[3];
}

// Largest ghost error after filling ghosts of a smooth field from its interior values.
double exchange_error(Topology topology, int res) {
  const Grid grid({topology, res});
  std::vector<double> f(grid.size(), 0.0);
  for (std::size_t node : grid.interior()) f[node] = smooth(grid.param_point(node), topology);
  grid.exchange(f);
  double worst = 0.0;
  for (std::size_t node : grid.ghosts()) {
    worst = std::max(worst, std::abs(f[node] - smooth(grid.param_point(node), topology)));
  }
  return worst;
}

}  // namespace

TEST_CASE("layout of the three topologies") {
  const Grid s2({Topology::sphere2, 8}), t2({Topology::torus2, 8}), s3({Topology::sphere3, 8});
  CHECK(s2.patches() == 6);
  CHECK(t2.patches() == 1);
  CHECK(s3.patches() == 8);
  CHECK(s2.interior().size() == 6u * 64u);
  CHECK(s3.interior().size() == 8u * 512u);
  CHECK(s2.dim() == 2);
  CHECK(s3.dim() == 3);
  CHECK(intrinsic_dim(Topology::sphere3) == 3);
  CHECK(is_sphere(Topology::sphere2));
  CHECK_FALSE(is_sphere(Topology::torus2));
  CHECK(t2.spacing() == doctest::Approx(2.0 * std::numbers::pi / 8));
  CHECK(parse_topology("torus2") == Topology::torus2);
  CHECK_THROWS_AS(parse_topology("klein_bottle"), InputError);
  CHECK_THROWS_AS(Grid({Topology::sphere2, 4}), InputError);
}

TEST_CASE("sphere parameter points are unit vectors") {
  for (Topology t : {Topology::sphere2, Topology::sphere3}) {
    const Grid grid({t, 8});
    for (std::size_t node = 0; node < grid.size(); ++node) {
      const ParamPoint u = grid.param_point(node);
      double s = 0.0;
      for (double x : u) s += x * x;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("interior and ghost classification") {
  const Grid grid({Topology::sphere2, 8});
  for (std::size_t node : grid.interior()) CHECK(grid.ghost_layer(node) == 0);
  for (std::size_t node : grid.ghosts()) {
    CHECK_FALSE(grid.is_interior(node));
    CHECK(grid.ghost_layer(node) >= 1);
    CHECK(grid.ghost_layer(node) <= Grid::kGhost);
  }
  CHECK(grid.interior().size() + grid.ghosts().size() == grid.size());
}

TEST_CASE("ghost exchange reproduces smooth fields with high order") {
  for (Topology t : {Topology::sphere2, Topology::sphere3}) {
    const double coarse = exchange_error(t, 8), fine = exchange_error(t, 16);
    INFO(to_string(t) << " coarse " << coarse << " fine " << fine);
    CHECK(fine < 1e-4);
    CHECK(std::log2(coarse / fine) >= 3.0);
  }
  // Periodic copies are exact.
  CHECK(exchange_error(Topology::torus2, 8) <= 1e-13);
}

TEST_CASE("torus ghosts are periodic copies") {
  const Grid grid({Topology::torus2, 8});
  std::vector<double> f(grid.size(), 0.0);
  for (std::size_t node : grid.interior()) f[node] = static_cast<double>(node);
  grid.exchange(f);
  for (std::size_t node : grid.ghosts()) {
    const Interpolant w = grid.locate(grid.param_point(node));
    CHECK(w.apply(std::span<const double>(f)) == doctest::Approx(f[node]).epsilon(1e-12));
  }
}

TEST_CASE("reference Christoffel symbols") {
  const Grid torus({Topology::torus2, 8});
  for (double v : torus.reference_christoffel(torus.interior()[5])) CHECK(v == 0.0);
  // The equiangular chart at a patch centre is symmetric, so Gamma^l_ij vanishes there to O(h^4).
  const Grid sphere({Topology::sphere2, 16});
  for (std::size_t node : sphere.interior()) {
    const ParamPoint u = sphere.param_point(node);
    if (std::abs(u[0]) > 1.0 - 1e-3) {
      for (double v : sphere.reference_christoffel(node)) CHECK(std::abs(v) < 0.05);
    }
  }
}
