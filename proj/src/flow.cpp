#include "mcf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcf {

namespace {

struct Scan {
  double area = 0.0;
  double min_H2 = 0.0, max_H2 = 0.0;
  double min_A2 = 0.0, max_A2 = 0.0;
  double min_lambda = 0.0;
};

Scan scan(const Grid& grid, std::span<const CurvatureSample> cs) {
  const auto interior = grid.interior();
  Scan s;
  s.min_H2 = s.min_A2 = s.min_lambda = std::numeric_limits<double>::infinity();
  s.max_H2 = s.max_A2 = -std::numeric_limits<double>::infinity();
  std::vector<double> dA(interior.size());
  for (std::size_t k = 0; k < interior.size(); ++k) {
    const CurvatureSample& c = cs[interior[k]];
    dA[k] = c.area_element;
    s.min_H2 = std::min(s.min_H2, c.normsq_H);
    s.max_H2 = std::max(s.max_H2, c.normsq_H);
    s.min_A2 = std::min(s.min_A2, c.normsq_A);
    s.max_A2 = std::max(s.max_A2, c.normsq_A);
    s.min_lambda = std::min(s.min_lambda, c.lambda_min_g);
  }
  s.area = pairwise_sum(dA) * grid.cell_volume();
  return s;
}

double max_Q(const Grid& grid, std::span<const CurvatureSample> cs, const PinchPreset& p) {
  double q = -std::numeric_limits<double>::infinity();
  for (std::size_t node : grid.interior()) {
    q = std::max(q, pinch_Q(cs[node].normsq_A, cs[node].normsq_H, p.alpha_eps, p.beta_eps, p.c));
  }
  return q;
}

double dt_from(const Immersion& imm, const Scan& s, double cfl) {
  const double h = imm.grid().spacing() * std::sqrt(s.min_lambda);
  const double h2 = h * h;
  const double stiff = s.max_A2 + imm.intrinsic_dim() * std::abs(imm.space().curvature());
  return cfl * h2 / (1.0 + h2 * stiff);
}

// base + dt * sum_k w_k K_k on interior nodes, projected and ghost-exchanged.
using Term = std::pair<double, const std::vector<CurvatureSample>*>;

Immersion combine(const Immersion& base, double dt, FlatVec CurvatureSample::*velocity,
                  std::initializer_list<Term> terms) {
  const Grid& grid = base.grid();
  std::vector<FlatVec> coords(base.coords().begin(), base.coords().end());
  for (std::size_t node : grid.interior()) {
    FlatVec p = coords[node];
    for (const auto& [w, k] : terms) p.axpy(dt * w, (*k)[node].*velocity);
    for (int i = 0; i < p.dim(); ++i) {
      if (!std::isfinite(p[i])) throw StepRejected("non-finite coordinate during a flow stage");
    }
    coords[node] = p;
  }
  try {
    return Immersion::from_interior(base.space(), base.grid_ptr(), std::move(coords), base.codim());
  } catch (const Error& e) {
    throw StepRejected(std::string("projection failed during a flow stage: ") + e.what());
  }
}

void evaluate(const Immersion& imm, std::vector<CurvatureSample>& out, Exec exec) {
  out.resize(imm.grid().size());
  try {
    mean_curvature_field(imm, out, exec);
  } catch (const GeometryError& e) {
    throw StepRejected(std::string("geometry failed during a flow stage: ") + e.what());
  }
}

// Stage buffers reused across steps.
struct Stages {
  std::vector<CurvatureSample> k1, k2, k3, k4;
};

FlatVec CurvatureSample::*velocity_of(Tangential tangential) {
  return tangential == Tangential::deturck ? &CurvatureSample::V : &CurvatureSample::H;
}

Immersion advance(const Immersion& imm, double dt, Integrator integrator, Tangential tangential, Exec exec,
                  Stages& ws, const std::vector<CurvatureSample>* k1_given = nullptr) {
  const auto v = velocity_of(tangential);
  if (k1_given == nullptr) {
    evaluate(imm, ws.k1, exec);
    k1_given = &ws.k1;
  }
  if (integrator == Integrator::euler) return combine(imm, dt, v, {{1.0, k1_given}});

  evaluate(combine(imm, 0.5 * dt, v, {{1.0, k1_given}}), ws.k2, exec);
  evaluate(combine(imm, 0.5 * dt, v, {{1.0, &ws.k2}}), ws.k3, exec);
  evaluate(combine(imm, dt, v, {{1.0, &ws.k3}}), ws.k4, exec);
  return combine(imm, dt, v,
                 {{1.0 / 6.0, k1_given}, {2.0 / 6.0, &ws.k2}, {2.0 / 6.0, &ws.k3}, {1.0 / 6.0, &ws.k4}});
}

}  // namespace

Integrator parse_integrator(const std::string& name) {
  if (name == "rk4") return Integrator::rk4;
  if (name == "euler") return Integrator::euler;
  throw InputError("unknown integrator '" + name + "'");
}

std::string to_string(Integrator integrator) { return integrator == Integrator::rk4 ? "rk4" : "euler"; }

Tangential parse_tangential(const std::string& name) {
  if (name == "deturck") return Tangential::deturck;
  if (name == "none") return Tangential::none;
  throw InputError("unknown tangential mode '" + name + "'");
}

std::string to_string(Tangential tangential) { return tangential == Tangential::deturck ? "deturck" : "none"; }

std::string to_string(Termination termination) {
  switch (termination) {
    case Termination::blowup_resolved: return "blowup_resolved";
    case Termination::t_end_reached: return "t_end_reached";
    case Termination::dt_underflow: return "dt_underflow";
    case Termination::pinching_violated: return "pinching_violated";
    case Termination::step_limit: return "step_limit";
  }
  return "?";
}

void FlowConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InputError("cfl must lie in (0,1]");
  if (!(blowup_A2 > 0.0)) throw InputError("blowup_A2 must be positive");
  if (!(dt_min > 0.0)) throw InputError("dt_min must be positive");
  if (t_end && !(*t_end > 0.0)) throw InputError("t_end must be positive");
}

double FlowTrace::max_step_Q() const {
  double q = -std::numeric_limits<double>::infinity();
  for (const StepRecord& s : steps) q = std::max(q, s.maxQ);
  return q;
}

double FlowTrace::max_quadric_residual() const {
  double r = 0.0;
  for (const StepRecord& s : steps) r = std::max(r, s.quadric_residual);
  return r;
}

double FlowTrace::max_area_increase() const {
  double worst = 0.0;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    worst = std::max(worst, (steps[k].area - steps[k - 1].area) / steps[k - 1].area);
  }
  return worst;
}

Immersion step(const Immersion& imm, double dt, Integrator integrator, Exec exec, Tangential tangential) {
  if (!(dt > 0.0)) throw InputError("step needs dt > 0");
  Stages ws;
  return advance(imm, dt, integrator, tangential, exec, ws);
}

Immersion probe_step(const Immersion& imm, double signed_dt, Integrator integrator, Exec exec) {
  if (!std::isfinite(signed_dt) || signed_dt == 0.0) throw InputError("probe step needs a nonzero finite dt");
  Stages ws;
  return advance(imm, signed_dt, integrator, Tangential::none, exec, ws);
}

double choose_dt(const Immersion& imm, const FlowConfig& cfg, Exec exec) {
  std::vector<CurvatureSample> cs(imm.grid().size());
  mean_curvature_field(imm, cs, exec);
  const double dt = dt_from(imm, scan(imm.grid(), cs), cfg.cfl);
  if (!(dt >= cfg.dt_min)) throw StepRejected("time step below dt_min");
  return dt;
}

FlowTrace run(const Immersion& imm0, const PinchPreset& preset, const FlowConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (opts.sample_every == 0) throw InputError("sample_every must be positive");
  if (preset.n != imm0.intrinsic_dim() || preset.d != imm0.codim() || preset.c != imm0.space().curvature()) {
    throw InputError("pinching preset does not match the immersion");
  }

  FlowTrace trace;
  const ReportOptions report_opts{opts.eps_Z, opts.q_tolerance};
  Immersion state = imm0;
  std::vector<CurvatureSample> cs(state.grid().size());
  mean_curvature_field(state, cs, opts.exec);
  Scan current = scan(state.grid(), cs);
  const double h_ref = state.grid().spacing() * std::sqrt(current.min_lambda);

  double t = 0.0;
  std::size_t steps = 0;
  Stages ws;
  std::vector<CurvatureSample> next_cs;

  auto record_sample = [&](double dt) {
    FlowSample s;
    s.t = t;
    s.dt = dt;
    s.step = steps;
    s.area = current.area;
    s.min_H2 = current.min_H2;
    s.max_H2 = current.max_H2;
    s.min_A2 = current.min_A2;
    s.max_A2 = current.max_A2;
    s.quadric_residual = state.max_quadric_residual();
    s.pinch = report(SurfaceGeometry(state, opts.exec), preset, report_opts);
    trace.samples.push_back(s);
    if (opts.observer) opts.observer(state, trace.samples.back());
  };

  record_sample(0.0);
  if (opts.expect_pinched && trace.samples.back().pinch.pinching_violated) {
    trace.termination = Termination::pinching_violated;
    trace.T_est = 0.0;
    return trace;
  }

  while (true) {
    if (cfg.t_end && t >= *cfg.t_end * (1.0 - 1e-12)) {
      trace.termination = Termination::t_end_reached;
      break;
    }
    if (steps >= opts.max_steps) {
      trace.termination = Termination::step_limit;
      break;
    }
    double dt = dt_from(state, current, cfg.cfl);
    if (cfg.t_end) dt = std::min(dt, *cfg.t_end - t);
    if (!(dt >= cfg.dt_min)) {
      trace.termination = Termination::dt_underflow;
      break;
    }

    std::optional<Immersion> next;
    while (!next) {
      try {
        Immersion candidate = advance(state, dt, cfg.integrator, cfg.tangential, opts.exec, ws, &cs);
        evaluate(candidate, next_cs, opts.exec);
        next.emplace(std::move(candidate));
      } catch (const StepRejected&) {
        ++trace.rejected_steps;
        dt *= 0.5;
        if (!(dt >= cfg.dt_min)) break;
      }
    }
    if (!next) {
      trace.termination = Termination::dt_underflow;
      break;
    }

    state = std::move(*next);
    cs.swap(next_cs);
    current = scan(state.grid(), cs);
    t += dt;
    ++steps;

    StepRecord rec;
    rec.t = t;
    rec.dt = dt;
    rec.area = current.area;
    rec.maxQ = max_Q(state.grid(), cs, preset);
    rec.max_A2 = current.max_A2;
    rec.quadric_residual = state.max_quadric_residual();
    trace.steps.push_back(rec);

    const bool blowup = current.max_A2 * h_ref * h_ref > cfg.blowup_A2;
    const bool violated = opts.expect_pinched && rec.maxQ > opts.q_tolerance;
    const bool last = blowup || violated || (cfg.t_end && t >= *cfg.t_end * (1.0 - 1e-12)) || steps >= opts.max_steps;
    if (last || steps % opts.sample_every == 0) record_sample(dt);
    if (violated) {
      trace.termination = Termination::pinching_violated;
      break;
    }
    if (blowup) {
      trace.termination = Termination::blowup_resolved;
      break;
    }
  }
  trace.T_est = t;
  return trace;
}

}  // namespace mcf
