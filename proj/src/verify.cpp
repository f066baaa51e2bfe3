#include "mcf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/numeric/odeint.hpp>

namespace mcf {

ShrinkerOracle::ShrinkerOracle(double c, int n, double r0) : c_(c), n_(n), r0_(r0) {
  if (n < 1) throw InputError("shrinker dimension must be positive");
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw InputError("shrinker radius must be positive");
  if (!std::isfinite(c)) throw InputError("curvature must be finite");
  if (c > 0.0 && r0 >= std::numbers::pi / std::sqrt(c)) throw InputError("shrinker radius exceeds pi/sqrt(c)");
}

double ShrinkerOracle::mean_curvature(double r) const {
  if (c_ < 0.0) {
    const double k = std::sqrt(-c_);
    return n_ * k / std::tanh(k * r);
  }
  if (c_ == 0.0) return n_ / r;
  const double k = std::sqrt(c_);
  return n_ * k / std::tan(k * r);
}

double ShrinkerOracle::T_exact() const {
  if (c_ < 0.0) return std::log(std::cosh(std::sqrt(-c_) * r0_)) / (-n_ * c_);
  if (c_ == 0.0) return r0_ * r0_ / (2.0 * n_);
  if (stationary()) return std::numeric_limits<double>::infinity();
  const double cr = std::cos(std::sqrt(c_) * r0_);
  return -std::log(std::abs(cr)) / (n_ * c_);
}

bool ShrinkerOracle::stationary() const {
  return c_ > 0.0 && std::abs(std::cos(std::sqrt(c_) * r0_)) <= 1e-12;
}

double ShrinkerOracle::radius_at(double t) const {
  if (t < 0.0) throw InputError("oracle time must be non-negative");
  if (stationary()) return r0_;
  if (c_ < 0.0) {
    const double k = std::sqrt(-c_);
    const double v = std::cosh(k * r0_) * std::exp(n_ * c_ * t);
    return v <= 1.0 ? 0.0 : std::acosh(v) / k;
  }
  if (c_ == 0.0) {
    const double r2 = r0_ * r0_ - 2.0 * n_ * t;
    return r2 <= 0.0 ? 0.0 : std::sqrt(r2);
  }
  const double k = std::sqrt(c_);
  const double v = std::cos(k * r0_) * std::exp(n_ * c_ * t);
  return std::acos(std::clamp(v, -1.0, 1.0)) / k;
}

double ShrinkerOracle::integrate_radius(double t, double tol) const {
  namespace odeint = boost::numeric::odeint;
  double r = r0_;
  if (t <= 0.0) return r;
  auto rhs = [this](const double& x, double& dxdt, double) { dxdt = -mean_curvature(x); };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<double>>(tol, tol);
  odeint::integrate_adaptive(stepper, rhs, r, 0.0, t, t * 1e-4);
  return r;
}

double oracle_discrepancy(const ShrinkerOracle& oracle, double fraction, int samples) {
  const double T = oracle.T_exact();
  const double span = std::isfinite(T) ? fraction * T : 1.0;
  double worst = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const double t = span * k / samples;
    worst = std::max(worst, std::abs(oracle.radius_at(t) - oracle.integrate_radius(t)));
  }
  return worst;
}

std::string to_string(Equation eq) {
  switch (eq) {
    case Equation::evolve_H2: return "evolve_H2";
    case Equation::evolve_A2: return "evolve_A2";
    case Equation::simons: return "simons";
  }
  return "?";
}

namespace {

ResidualReport summarize(Equation eq, const SurfaceGeometry& sg, const ScalarField& lhs, const ScalarField& rhs) {
  ResidualReport rep;
  rep.eq = eq;
  const auto interior = sg.grid().interior();
  ScalarField sq(sg.grid().size(), 0.0);
  for (std::size_t node : interior) {
    const double r = lhs[node] - rhs[node];
    rep.linf_residual = std::max(rep.linf_residual, std::abs(r));
    sq[node] = r * r;
  }
  const ScalarField ones(sg.grid().size(), 1.0);
  const double area = sg.integral(ones);
  rep.l2_residual = std::sqrt(sg.integral(sq) / area);
  rep.mean_lhs = sg.integral(lhs) / area;
  rep.mean_rhs = sg.integral(rhs) / area;
  return rep;
}

// Central difference of a per-node curvature scalar along the discrete flow.
ScalarField time_derivative(const Immersion& imm, double dt, Integrator integrator, Exec exec,
                            double CurvatureSample::*member) {
  const Immersion forward = probe_step(imm, dt, integrator, exec);
  const Immersion backward = probe_step(imm, -dt, integrator, exec);
  std::vector<CurvatureSample> fp(imm.grid().size()), bp(imm.grid().size());
  mean_curvature_field(forward, fp, exec);
  mean_curvature_field(backward, bp, exec);
  ScalarField d(imm.grid().size(), 0.0);
  for (std::size_t node : imm.grid().interior()) d[node] = (fp[node].*member - bp[node].*member) / (2.0 * dt);
  return d;
}

double default_probe(const Immersion& imm, double dt_probe, Exec exec) {
  if (dt_probe > 0.0) return dt_probe;
  return 0.1 * choose_dt(imm, FlowConfig{}, exec);
}

}  // namespace

ResidualReport residual_evolution_H2(const Immersion& imm, double dt_probe, Integrator integrator, Exec exec) {
  const double dt = default_probe(imm, dt_probe, exec);
  const ScalarField lhs = time_derivative(imm, dt, integrator, exec, &CurvatureSample::normsq_H);
  const SurfaceGeometry sg(imm, exec);
  const ScalarField lap = sg.laplacian(sg.field([](const PointGeometry& g) { return g.normsq_H; }));
  const double c = imm.space().curvature();
  const int n = imm.intrinsic_dim();
  ScalarField rhs(imm.grid().size(), 0.0);
  for_each_node(exec, imm.grid().interior(), [&](std::size_t node) {
    const PointGeometry& g = sg.at(node);
    const InvariantBundle inv = algebraic_invariants(g, imm.space(), imm.codim(), imm.grid().spacing());
    rhs[node] = lap[node] - 2.0 * sg.grad_H_sq(node) + 2.0 * inv.R2 + 2.0 * n * c * g.normsq_H;
  });
  return summarize(Equation::evolve_H2, sg, lhs, rhs);
}

ResidualReport residual_evolution_A2(const Immersion& imm, double dt_probe, Integrator integrator, Exec exec) {
  const double dt = default_probe(imm, dt_probe, exec);
  const ScalarField lhs = time_derivative(imm, dt, integrator, exec, &CurvatureSample::normsq_A);
  const SurfaceGeometry sg(imm, exec);
  const ScalarField lap = sg.laplacian(sg.field([](const PointGeometry& g) { return g.normsq_A; }));
  const double c = imm.space().curvature();
  const int n = imm.intrinsic_dim();
  ScalarField rhs(imm.grid().size(), 0.0);
  for_each_node(exec, imm.grid().interior(), [&](std::size_t node) {
    const PointGeometry& g = sg.at(node);
    const InvariantBundle inv = algebraic_invariants(g, imm.space(), imm.codim(), imm.grid().spacing());
    rhs[node] = lap[node] - 2.0 * sg.grad_A_sq(node) + 2.0 * inv.R1 + 4.0 * c * g.normsq_H -
                2.0 * n * c * g.normsq_A;
  });
  return summarize(Equation::evolve_A2, sg, lhs, rhs);
}

ResidualReport residual_simons(const Immersion& imm, Exec exec) {
  const SurfaceGeometry sg(imm, exec);
  const ScalarField lap = sg.laplacian(sg.field([](const PointGeometry& g) { return g.normsq_Aring; }));
  const double c = imm.space().curvature();
  const int n = imm.intrinsic_dim();
  ScalarField lhs(imm.grid().size(), 0.0), rhs(imm.grid().size(), 0.0);
  for_each_node(exec, imm.grid().interior(), [&](std::size_t node) {
    const PointGeometry& g = sg.at(node);
    const InvariantBundle inv = algebraic_invariants(g, imm.space(), imm.codim(), imm.grid().spacing());
    const SimonsTerms terms = sg.simons_terms(node);
    lhs[node] = 0.5 * lap[node];
    rhs[node] = terms.ring_hess_H + terms.normsq_gradAring + inv.Z + n * c * g.normsq_Aring;
  });
  return summarize(Equation::simons, sg, lhs, rhs);
}

double measured_order(double coarse, double fine) { return std::log2(coarse / fine); }

DistanceSample measure_distance(const Immersion& imm, const FlatVec& y, double t) {
  DistanceSample s;
  s.t = t;
  s.r_min = std::numeric_limits<double>::infinity();
  for (std::size_t node : imm.grid().interior()) {
    const double r = imm.space().geodesic_distance(imm.at(node), y);
    s.r_max = std::max(s.r_max, r);
    s.r_min = std::min(s.r_min, r);
  }
  return s;
}

DistanceBoundReport distance_monitor(std::span<const DistanceSample> series, int n, double c, double T_est,
                                     double margin, double clearance) {
  if (!(c < 0.0)) throw MonitorInvalid("the distance bound needs c < 0");
  if (n < 2) throw MonitorInvalid("the distance bound needs n >= 2");
  if (series.empty()) throw MonitorInvalid("no distance samples");
  for (const DistanceSample& s : series) {
    if (!(s.r_min > clearance)) throw MonitorInvalid("probe point lies on a sampled surface");
  }
  const double rate = (n - 1) * std::sqrt(-c);
  DistanceBoundReport rep;
  rep.R = series.front().r_max + margin;
  rep.min_slack = std::numeric_limits<double>::infinity();
  for (const DistanceSample& s : series) rep.min_slack = std::min(rep.min_slack, rep.R - rate * s.t - s.r_max);
  rep.T_bound = rep.R / rate;
  rep.T_est = T_est;
  rep.bound_holds = rep.min_slack > 0.0;
  rep.time_bound_holds = T_est < rep.T_bound;
  return rep;
}

DistanceBoundReport distance_monitor(const FlowTrace& trace, std::span<const Immersion> frames, const FlatVec& y,
                                     double margin, double clearance) {
  if (frames.size() != trace.samples.size()) throw MonitorInvalid("one frame per trace sample is required");
  if (frames.empty()) throw MonitorInvalid("no frames");
  std::vector<DistanceSample> series;
  for (std::size_t k = 0; k < frames.size(); ++k) series.push_back(measure_distance(frames[k], y, trace.samples[k].t));
  return distance_monitor(series, frames[0].intrinsic_dim(), frames[0].space().curvature(), trace.T_est, margin,
                          clearance);
}

FlatVec probe_point(const SpaceForm& space, double distance) {
  const FlatVec center = space.default_center();
  return space.exp_map(center, space.tangent_frame(center)[0], distance);
}

std::vector<ConvergenceRow> convergence_study(const std::function<Immersion(int)>& factory,
                                              const std::function<double(const Immersion&)>& probe, int base_resolution,
                                              int levels, std::optional<double> exact) {
  if (levels < 2) throw InputError("a convergence study needs at least two levels");
  std::vector<ConvergenceRow> rows;
  for (int k = 0; k < levels; ++k) {
    ConvergenceRow row;
    row.resolution = base_resolution << k;
    try {
      row.value = probe(factory(row.resolution));
    } catch (const std::exception& e) {
      row.note = e.what();
    }
    rows.push_back(row);
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!rows[k].value) continue;
    if (exact) {
      rows[k].error = std::abs(*rows[k].value - *exact);
    } else if (k + 1 < rows.size() && rows[k + 1].value) {
      rows[k].error = std::abs(*rows[k].value - *rows[k + 1].value);
    }
  }
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    if (rows[k].error && rows[k + 1].error && *rows[k + 1].error > 0.0) {
      rows[k].order = measured_order(*rows[k].error, *rows[k + 1].error);
    }
  }
  return rows;
}

}  // namespace mcf
