#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "mcf/pinch.hpp"

using namespace mcf;

namespace {

Immersion perturbed(double amplitude, int res = 16) {
  const SpaceForm H(-1.0, 3);
  const PerturbationMode m{0, amplitude, 0};
  return make_perturbed_sphere(H, {Topology::sphere2, res}, 0.5, std::span(&m, 1));
}

}  // namespace

TEST_CASE("preset constants") {
  const PinchPreset p = preset(2, 1, -1.0, 0.1, 0.1);
  CHECK(p.regime == PinchRegime::low_dim);
  CHECK(p.alpha == doctest::Approx(2.0 / 3.0));
  CHECK(p.beta == doctest::Approx(1.0));
  CHECK(p.alpha_eps == doctest::Approx(0.6451612903).epsilon(1e-9));
  CHECK(p.beta_eps == doctest::Approx(1.1));
  CHECK(p.a == doctest::Approx(0.1612903226).epsilon(1e-9));
  CHECK(p.b == doctest::Approx(0.0161290323).epsilon(1e-9));
  CHECK(p.eps_nabla == doctest::Approx(0.0887096774).epsilon(1e-9));

  const PinchPreset h = preset(4, 1, -1.0, 1e-12, 0.1);
  CHECK(h.regime == PinchRegime::high_dim);
  CHECK(h.alpha == doctest::Approx(1.0 / 3.0));
  CHECK(h.beta == doctest::Approx(2.0));
  CHECK(h.alpha_eps == doctest::Approx(1.0 / 3.0));

  const PinchPreset s = preset(3, 1, -1.0, 0.1, 0.1, PinchRegime::hypersurface_n3);
  CHECK(s.alpha == doctest::Approx(0.5));
  CHECK(s.beta == doctest::Approx(2.0));
  CHECK(s.a == doctest::Approx(1.0 / (3.0 * 2.1)));

  CHECK_THROWS_AS(preset(2, 1, -1.0, 0.1, 0.1, PinchRegime::high_dim), InputError);
  CHECK_THROWS_AS(preset(3, 2, -1.0, 0.1, 0.1, PinchRegime::hypersurface_n3), InputError);
  CHECK_THROWS_AS(preset(2, 1, -1.0, 1.5, 0.1), InputError);
  CHECK_THROWS_AS(preset(2, 1, -1.0, 0.1, 0.0), InputError);
  CHECK_THROWS_AS(preset(1, 1, -1.0, 0.1, 0.1), InputError);
  CHECK(parse_regime("hypersurface_n3") == PinchRegime::hypersurface_n3);
}

TEST_CASE("property: eps_nabla and the denominator bound over the parameter range") {
  for (int n : {2, 3, 4, 5, 7}) {
    for (double eps = 0.01; eps < 1.0; eps += 0.07) {
      const PinchPreset p = preset(n, 1, -1.0, eps, 0.1);
      CHECK(p.eps_nabla > 0.0);
      CHECK(p.b == doctest::Approx(eps * p.a));
      // Pinched data has |H|^2/n <= |A|^2 <= alpha_eps |H|^2 + beta_eps c, so |H|^2 >= beta_eps / (alpha_eps - 1/n).
      const double floor_H2 = p.beta_eps / (p.alpha_eps - 1.0 / n);
      for (double H2 = floor_H2; H2 < 1e5; H2 *= 1.7) {
        CHECK(p.a * H2 + p.beta_eps * p.c >= p.b * H2 * (1.0 - 1e-12));
      }
    }
  }
}

TEST_CASE("Q on the sphere and at umbilical nodes") {
  const double H2 = 4.0 / std::pow(std::tanh(0.5), 2), A2 = H2 / 2.0;
  CHECK(pinch_Q(A2, H2, 2.0 / 3.0, 1.0, -1.0) == doctest::Approx(-2.121796251).epsilon(1e-9));
  for (int n : {2, 3}) {
    const PinchPreset p = preset(n, 1, -1.0, 0.1, 0.1);
    // Umbilical points are pinched once |H|^2 clears beta / (alpha - 1/n), never below.
    const double floor_H2 = p.beta_eps / (p.alpha_eps - 1.0 / n);
    for (double h2 = 0.1; h2 < 1e3; h2 *= 2.3) {
      CHECK((pinch_Q(h2 / n, h2, p.alpha_eps, p.beta_eps, -1.0) < 0.0) == (h2 > floor_H2));
    }
  }
}

TEST_CASE("f_sigma") {
  const PinchPreset p = preset(2, 1, -1.0, 0.1, 0.1);
  CHECK(f_sigma_denominator(18.730777507, p) == doctest::Approx(1.921093146).epsilon(1e-9));
  CHECK(f_sigma(0.5, 18.730777507, p) == doctest::Approx(0.277828263).epsilon(1e-8));
  CHECK(f_sigma(0.0, 18.730777507, p) == 0.0);
  CHECK_THROWS_AS(f_sigma(0.5, 1.0, p), PinchingViolation);
}

TEST_CASE("reports") {
  const PinchPreset p = preset(2, 1, -1.0, 0.1, 0.1);
  const SpaceForm H(-1.0, 3);
  const Immersion sphere = make_geodesic_sphere(H, {Topology::sphere2, 32}, H.default_center(), 0.5);
  const PinchReport r = report(sphere, p);
  CHECK(r.maxQ < 0.0);
  CHECK_FALSE(r.pinching_violated);
  CHECK(r.roundness == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.umbilicity <= 1e-6);
  CHECK(r.kmin_ratio == doctest::Approx(0.196611933).epsilon(1e-3));
  CHECK(r.sup_f_sigma <= 1e-6);

  const PinchReport small = report(perturbed(0.02), p);
  CHECK(small.maxQ < 0.0);
  CHECK(small.z_margin >= 0.0);
  CHECK(small.eps_Z_witness.has_value());
  CHECK(report(perturbed(0.02), p, {10.0, 0.0}).z_margin < 0.0);
  CHECK(report(perturbed(0.5), p).maxQ > 0.0);

  const Immersion torus = make_torus(H, {Topology::torus2, 32}, {1.5, 0.3}, 1);
  const PinchReport t = report(torus, p, {0.01, 1e-6});
  CHECK(t.maxQ > 0.0);
  CHECK(t.pinching_violated);

  const SpaceForm S(1.0, 3);
  const Immersion equator = make_geodesic_sphere(S, {Topology::sphere2, 16}, S.default_center(), std::numbers::pi / 2);
  const PinchReport e = report(equator, preset(2, 1, 1.0, 0.1, 0.1));
  CHECK(e.h_floor_hit);
  CHECK(std::isnan(e.umbilicity));
}

TEST_CASE("Euclidean scaling coherence") {
  const SpaceForm E(0.0, 3);
  const PerturbationMode m{2, 0.05, 0};
  const Immersion a = make_perturbed_sphere(E, {Topology::sphere2, 16}, 1.0, std::span(&m, 1));
  const Immersion b = make_perturbed_sphere(E, {Topology::sphere2, 16}, 2.5, std::span(&m, 1));
  const SurfaceGeometry ga(a), gb(b);
  const double alpha = 2.0 / 3.0;
  for (std::size_t node : a.grid().interior()) {
    CHECK(gb.at(node).normsq_H * 6.25 == doctest::Approx(ga.at(node).normsq_H).epsilon(1e-10));
    CHECK(gb.at(node).normsq_A * 6.25 == doctest::Approx(ga.at(node).normsq_A).epsilon(1e-10));
    const double qa = ga.at(node).normsq_A - alpha * ga.at(node).normsq_H;
    const double qb = gb.at(node).normsq_A - alpha * gb.at(node).normsq_H;
    CHECK((qa < 0.0) == (qb < 0.0));
  }
}
