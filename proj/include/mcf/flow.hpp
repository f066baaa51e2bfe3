#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcf/pinch.hpp"

namespace mcf {

enum class Integrator { euler, rk4 };

Integrator parse_integrator(const std::string& name);
std::string to_string(Integrator integrator);

/// Tangential part of the node velocity. `none` moves nodes by H alone; `deturck`
/// adds the DeTurck term, which leaves the evolving surfaces unchanged but keeps
/// the grid from drifting along them.
enum class Tangential { none, deturck };

Tangential parse_tangential(const std::string& name);
std::string to_string(Tangential tangential);

struct FlowConfig {
  double cfl = 0.2;
  std::optional<double> t_end;
  double blowup_A2 = 0.5;  // resolution limit on max |A|^2 h^2, h the initial metric spacing
  double dt_min = 1e-12;
  Integrator integrator = Integrator::rk4;
  Tangential tangential = Tangential::deturck;

  /// Throws InputError when a field is out of range.
  void validate() const;
};

enum class Termination { blowup_resolved, t_end_reached, dt_underflow, pinching_violated, step_limit };

std::string to_string(Termination termination);

struct FlowSample {
  double t = 0.0;
  double dt = 0.0;  // the step that led here (0 for the initial sample)
  std::size_t step = 0;
  double area = 0.0;
  double min_H2 = 0.0, max_H2 = 0.0;
  double min_A2 = 0.0, max_A2 = 0.0;
  double quadric_residual = 0.0;
  PinchReport pinch;
};

/// Cheap per-step record kept for every accepted step.
struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  double area = 0.0;
  double maxQ = 0.0;
  double max_A2 = 0.0;
  double quadric_residual = 0.0;
};

struct FlowTrace {
  std::vector<FlowSample> samples;
  std::vector<StepRecord> steps;
  Termination termination = Termination::t_end_reached;
  double T_est = 0.0;
  std::size_t rejected_steps = 0;

  double max_step_Q() const;
  double max_quadric_residual() const;
  /// Largest relative area increase between consecutive accepted steps (0 if area never grew).
  double max_area_increase() const;
};

struct RunOptions {
  std::size_t sample_every = 1;  // full reports every k accepted steps; first and last always
  bool expect_pinched = false;   // stop with pinching_violated when maxQ exceeds q_tolerance
  double q_tolerance = 0.0;
  double eps_Z = 0.01;
  std::size_t max_steps = 1000000;
  Exec exec = Exec::parallel;
  /// Called with each sampled state (after the sample is appended).
  std::function<void(const Immersion&, const FlowSample&)> observer;
};

/// One explicit step of dF/dt = H (plus the chosen tangential term) followed by
/// projection onto the quadric. Throws StepRejected when any stage fails; requires dt > 0.
Immersion step(const Immersion& imm, double dt, Integrator integrator, Exec exec = Exec::parallel,
               Tangential tangential = Tangential::deturck);

/// A step of the pure normal flow dF/dt = H with a signed dt, for time-derivative probes
/// that follow nodes.
Immersion probe_step(const Immersion& imm, double signed_dt, Integrator integrator, Exec exec = Exec::parallel);

/// cfl h^2 / (1 + h^2 (max|A|^2 + n|c|)), h the smallest metric grid spacing.
/// Throws StepRejected when the result is below cfg.dt_min.
double choose_dt(const Immersion& imm, const FlowConfig& cfg, Exec exec = Exec::parallel);

FlowTrace run(const Immersion& imm0, const PinchPreset& preset, const FlowConfig& cfg, const RunOptions& opts = {});

}  // namespace mcf
