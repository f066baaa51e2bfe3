#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcf/flow.hpp"

namespace mcf {

/// Geodesic spheres shrink self-similarly: dr/dt = -|H|(r) with
///   |H| = n k coth(k r) (c = -k^2),  n / r (c = 0),  n k cot(k r) (c = k^2).
/// Closed forms: cosh(k r(t)) = cosh(k r0) e^{-n k^2 t}, r^2 = r0^2 - 2 n t,
/// cos(k r(t)) = cos(k r0) e^{n k^2 t}.
class ShrinkerOracle {
 public:
  ShrinkerOracle(double c, int n, double r0);

  double c() const { return c_; }
  int n() const { return n_; }
  double r0() const { return r0_; }

  double radius_at(double t) const;
  /// |H| of the geodesic sphere of radius r.
  double mean_curvature(double r) const;
  /// The totally geodesic equator r0 = pi/(2 sqrt c), to 1e-12 in cos(sqrt(c) r0).
  bool stationary() const;
  /// Extinction time; +inf for the stationary equator.
  double T_exact() const;

  /// Radius at t from an adaptive Dormand-Prince integration of dr/dt = -|H|(r).
  double integrate_radius(double t, double tol = 1e-10) const;

 private:
  double c_;
  int n_;
  double r0_;
};

/// max |closed form - ODE| over `samples` equally spaced times in [0, fraction * T].
double oracle_discrepancy(const ShrinkerOracle& oracle, double fraction = 0.95, int samples = 40);

enum class Equation { evolve_H2, evolve_A2, simons };

std::string to_string(Equation eq);

struct ResidualReport {
  Equation eq = Equation::evolve_H2;
  double linf_residual = 0.0;
  double l2_residual = 0.0;     // area-weighted root mean square
  double mean_lhs = 0.0;        // area-weighted means of the two sides
  double mean_rhs = 0.0;
  std::optional<double> measured_order;
};

/// Time derivative of |H|^2 by central differencing of one forward and one
/// backward integrator step, against Delta|H|^2 - 2|grad H|^2 + 2 R2 + 2nc|H|^2.
/// A non-positive dt_probe selects 0.1 times the CFL step.
ResidualReport residual_evolution_H2(const Immersion& imm, double dt_probe = 0.0,
                                     Integrator integrator = Integrator::rk4, Exec exec = Exec::parallel);

/// Same for |A|^2 against Delta|A|^2 - 2|grad A|^2 + 2 R1 + 4c|H|^2 - 2nc|A|^2.
ResidualReport residual_evolution_A2(const Immersion& imm, double dt_probe = 0.0,
                                     Integrator integrator = Integrator::rk4, Exec exec = Exec::parallel);

/// 1/2 Delta|A_ring|^2 against <A_ring, grad^2 H> + |grad A_ring|^2 + Z + nc|A_ring|^2.
ResidualReport residual_simons(const Immersion& imm, Exec exec = Exec::parallel);

/// log2(coarse / fine) for a refinement pair with halved spacing.
double measured_order(double coarse, double fine);

struct DistanceSample {
  double t = 0.0;
  double r_max = 0.0;
  double r_min = 0.0;
};

/// Largest and smallest node distance to y.
DistanceSample measure_distance(const Immersion& imm, const FlatVec& y, double t);

struct DistanceBoundReport {
  double R = 0.0;
  double min_slack = 0.0;  // min over samples of R - (n-1) sqrt(-c) t - r_max(t)
  double T_bound = 0.0;    // R / ((n-1) sqrt(-c))
  double T_est = 0.0;
  bool bound_holds = false;
  bool time_bound_holds = false;
};

/// Checks r_max(t) < R - (n-1) sqrt(-c) t with R = r_max(0) + margin, and T_est < T_bound.
/// Throws MonitorInvalid for c >= 0, n < 2, or when y comes within `clearance` of a sampled surface.
DistanceBoundReport distance_monitor(std::span<const DistanceSample> series, int n, double c, double T_est,
                                     double margin = 1e-3, double clearance = 1e-3);
DistanceBoundReport distance_monitor(const FlowTrace& trace, std::span<const Immersion> frames, const FlatVec& y,
                                     double margin = 1e-3, double clearance = 1e-3);

/// A point at geodesic distance `distance` from the default center along the first tangent axis.
FlatVec probe_point(const SpaceForm& space, double distance);

struct ConvergenceRow {
  int resolution = 0;
  std::optional<double> value;
  std::optional<double> error;   // against the exact value, or the next finer level when none is given
  std::optional<double> order;   // from this row's error and the next row's
  std::string note;
};

/// Evaluates probe(factory(res)) for res = base, 2 base, ... (levels entries).
/// A failing level leaves a row with a note and no value.
std::vector<ConvergenceRow> convergence_study(const std::function<Immersion(int)>& factory,
                                              const std::function<double(const Immersion&)>& probe, int base_resolution,
                                              int levels, std::optional<double> exact = std::nullopt);

}  // namespace mcf
