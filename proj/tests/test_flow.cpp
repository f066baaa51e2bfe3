#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcf/flow.hpp"

using namespace mcf;

namespace {

double mean_radius(const Immersion& imm, const FlatVec& center) {
  double s = 0.0;
  for (std::size_t node : imm.grid().interior()) s += imm.space().geodesic_distance(center, imm.at(node));
  return s / static_cast<double>(imm.grid().interior().size());
}

double max_displacement(const Immersion& a, const Immersion& b) {
  double worst = 0.0;
  for (std::size_t node : a.grid().interior()) {
    const FlatVec d = a.at(node) - b.at(node);
    worst = std::max(worst, std::sqrt(euclidean_dot(d, d)));
  }
  return worst;
}

Immersion bumpy(int res, double amplitude = 0.02) {
  const SpaceForm H(-1.0, 3);
  const PerturbationMode m{0, amplitude, 0};
  return make_perturbed_sphere(H, {Topology::sphere2, res}, 0.5, std::span(&m, 1));
}

}  // namespace

TEST_CASE("config validation and names") {
  FlowConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.cfl = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = FlowConfig{};
  cfg.blowup_A2 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = FlowConfig{};
  cfg.t_end = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  CHECK(parse_integrator("euler") == Integrator::euler);
  CHECK(parse_tangential("none") == Tangential::none);
  CHECK_THROWS_AS(parse_integrator("leapfrog"), InputError);
  CHECK(to_string(Termination::blowup_resolved) == "blowup_resolved");
}

TEST_CASE("single steps on round spheres") {
  const SpaceForm E(0.0, 3);
  const Immersion unit = make_geodesic_sphere(E, {Topology::sphere2, 32}, E.default_center(), 1.0);
  const Immersion e = step(unit, 1e-3, Integrator::euler);
  CHECK(1.0 - mean_radius(e, E.default_center()) == doctest::Approx(2e-3).epsilon(1e-2));

  const SpaceForm H(-1.0, 3);
  const Immersion s = make_geodesic_sphere(H, {Topology::sphere2, 32}, H.default_center(), 0.5);
  const Immersion h = step(s, 1e-3, Integrator::euler);
  const double ratio = std::cosh(mean_radius(h, H.default_center())) / std::cosh(0.5);
  CHECK(ratio == doctest::Approx(std::exp(-2e-3)).epsilon(1e-5));
  CHECK(h.max_quadric_residual() <= 1e-10);

  const SpaceForm S(1.0, 3);
  const Immersion eq = make_geodesic_sphere(S, {Topology::sphere2, 32}, S.default_center(), std::numbers::pi / 2);
  const double dt = 1e-3, h2 = std::pow(eq.grid().spacing(), 2);
  CHECK(max_displacement(eq, step(eq, dt, Integrator::rk4)) <= h2 * dt);

  CHECK_THROWS_AS(step(s, 0.0, Integrator::rk4), InputError);
  CHECK_THROWS_AS(probe_step(s, 0.0, Integrator::rk4), InputError);
}

TEST_CASE("the DeTurck term moves nodes along the surface only") {
  const Immersion imm = bumpy(16);
  const Immersion a = step(imm, 1e-5, Integrator::rk4, Exec::parallel, Tangential::none);
  const Immersion b = step(imm, 1e-5, Integrator::rk4, Exec::parallel, Tangential::deturck);
  // Both land on the same surface: radii about the center at matching parameter points agree to O(dt * h^2) or so.
  const SpaceForm& s = imm.space();
  const FlatVec o = s.default_center();
  double rdiff = 0.0, move = 0.0;
  for (std::size_t node : imm.grid().interior()) {
    rdiff = std::max(rdiff, std::abs(s.geodesic_distance(o, a.at(node)) - s.geodesic_distance(o, b.at(node))));
  }
  move = max_displacement(a, b);
  CHECK(move > 0.0);
  CHECK(rdiff <= 0.1 * move + 1e-12);
}

TEST_CASE("time step selection") {
  const FlowConfig cfg;
  const double dt16 = choose_dt(bumpy(16), cfg), dt32 = choose_dt(bumpy(32), cfg);
  CHECK(dt16 / dt32 == doctest::Approx(4.0).epsilon(0.2));
  CHECK(dt32 > 0.0);
  const SpaceForm E(0.0, 3);
  const Immersion torus = make_torus(E, {Topology::torus2, 32}, {2.0, 1.0}, 1);
  const Immersion small = make_geodesic_sphere(E, {Topology::sphere2, 32}, E.default_center(), 0.2);
  CHECK(choose_dt(torus, cfg) > choose_dt(small, cfg));
  FlowConfig tight;
  tight.dt_min = 1.0;
  CHECK_THROWS_AS(choose_dt(small, tight), StepRejected);
}

TEST_CASE("runs stop as configured and keep their invariants") {
  const Immersion imm = bumpy(16);
  const PinchPreset p = preset(2, 1, -1.0, 0.1, 0.1);
  FlowConfig cfg;
  cfg.t_end = 0.01;
  RunOptions opts;
  opts.sample_every = 10;
  const FlowTrace tr = run(imm, p, cfg, opts);
  CHECK(tr.termination == Termination::t_end_reached);
  CHECK(tr.T_est == doctest::Approx(0.01));
  CHECK(tr.max_quadric_residual() <= 1e-10);
  CHECK(tr.max_area_increase() <= 1e-3);
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    CHECK(tr.samples[k].t > tr.samples[k - 1].t);
    CHECK(tr.samples[k].dt > 0.0);
  }
  for (const StepRecord& s : tr.steps) CHECK(s.dt > 0.0);

  opts.max_steps = 7;
  cfg.t_end.reset();
  const FlowTrace limited = run(imm, p, cfg, opts);
  CHECK(limited.termination == Termination::step_limit);
  CHECK(limited.steps.size() == 7u);
  CHECK(limited.samples.back().step == 7u);

  CHECK_THROWS_AS(run(imm, preset(2, 2, -1.0, 0.1, 0.1), cfg, opts), InputError);
}

TEST_CASE("spheres stay umbilical and blow up near the exact time") {
  const SpaceForm H(-1.0, 3);
  const Immersion s = make_geodesic_sphere(H, {Topology::sphere2, 16}, H.default_center(), 0.5);
  RunOptions opts;
  opts.sample_every = 200;
  const FlowTrace tr = run(s, preset(2, 1, -1.0, 0.1, 0.1), FlowConfig{}, opts);
  CHECK(tr.termination == Termination::blowup_resolved);
  CHECK(tr.T_est == doctest::Approx(0.060057253).epsilon(0.03));
  for (const FlowSample& x : tr.samples) CHECK(x.pinch.umbilicity <= 1e-3);
}

TEST_CASE("a pinched run stops when pinching fails") {
  const SpaceForm H(-1.0, 3);
  const Immersion torus = make_torus(H, {Topology::torus2, 16}, {1.5, 0.3}, 1);
  RunOptions opts;
  opts.expect_pinched = true;
  opts.q_tolerance = 1e-6;
  const FlowTrace tr = run(torus, preset(2, 1, -1.0, 0.1, 0.1), FlowConfig{}, opts);
  CHECK(tr.termination == Termination::pinching_violated);
  CHECK(tr.steps.empty());
  CHECK(tr.samples.size() == 1u);
}

TEST_CASE("serial and parallel runs agree bitwise") {
  const Immersion imm = bumpy(12);
  FlowConfig cfg;
  cfg.t_end = 2e-3;
  RunOptions a, b;
  a.exec = Exec::serial;
  b.exec = Exec::parallel;
  const FlowTrace ta = run(imm, preset(2, 1, -1.0, 0.1, 0.1), cfg, a);
  const FlowTrace tb = run(imm, preset(2, 1, -1.0, 0.1, 0.1), cfg, b);
  REQUIRE(ta.samples.size() == tb.samples.size());
  for (std::size_t k = 0; k < ta.samples.size(); ++k) {
    CHECK(ta.samples[k].t == tb.samples[k].t);
    CHECK(ta.samples[k].area == tb.samples[k].area);
    CHECK(ta.samples[k].pinch.maxQ == tb.samples[k].pinch.maxQ);
    CHECK(ta.samples[k].pinch.grad_ratio == tb.samples[k].pinch.grad_ratio);
  }
}
