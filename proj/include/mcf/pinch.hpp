#pragma once

#include <optional>
#include <string>

#include "mcf/geometry.hpp"

namespace mcf {

enum class PinchRegime { low_dim, high_dim, hypersurface_n3 };

PinchRegime parse_regime(const std::string& name);
std::string to_string(PinchRegime regime);

/// Constants of one pinching regime.
///   low_dim (n = 2, 3):      alpha = 4/(3n),  beta = n/2,  alpha_eps = 4/(3n + n eps),  beta_eps = (n/2)(1 + eps)
///   high_dim (n >= 4):       alpha = 1/(n-1), beta = 2,    alpha_eps = 1/(n - 1 + eps), beta_eps = 2(1 + eps)
///   hypersurface_n3 (n = 3, d = 1): alpha = 1/2, beta = 2, with the high_dim eps-family
/// a = 1/(3n + n eps), 1/(n(n - 1 + eps)), 1/(3(2 + eps)) respectively; b = eps a;
/// eps_nabla = 3/(n + 2) - 1/n - a.
struct PinchPreset {
  int n = 2;
  int d = 1;
  double c = 0.0;
  PinchRegime regime = PinchRegime::low_dim;
  double alpha = 0.0;
  double beta = 0.0;
  double epsilon = 0.1;
  double alpha_eps = 0.0;
  double beta_eps = 0.0;
  double a = 0.0;
  double b = 0.0;
  double eps_nabla = 0.0;
  double sigma = 0.1;
};

/// Without an explicit regime, n <= 3 selects low_dim and n >= 4 high_dim.
PinchPreset preset(int n, int d, double c, double epsilon, double sigma,
                   std::optional<PinchRegime> regime = std::nullopt);

/// |A|^2 - alpha_eps |H|^2 - beta_eps c.
double pinch_Q(const PointGeometry& geom, const PinchPreset& p);
/// |A|^2 - alpha |H|^2 - beta c with explicit constants.
double pinch_Q(double normsq_A, double normsq_H, double alpha, double beta, double c);

/// a |H|^2 + beta_eps c
double f_sigma_denominator(double normsq_H, const PinchPreset& p);

/// |A_ring|^2 / (a |H|^2 + beta_eps c)^(1 - sigma); throws PinchingViolation when the denominator is not positive.
double f_sigma(const PointGeometry& geom, const PinchPreset& p);
double f_sigma(double normsq_Aring, double normsq_H, const PinchPreset& p);

/// Z + n c |A_ring|^2 - eps_Z |A_ring|^2 (a |H|^2 + beta_eps c)
double z_margin(const InvariantBundle& inv, const PointGeometry& geom, const PinchPreset& p, double eps_Z);

struct PinchReport {
  double maxQ = 0.0;
  double sup_f_sigma = 0.0;    // +inf when the denominator fails somewhere
  double z_margin = 0.0;
  double grad_ratio = 0.0;     // max |grad H|^2 / (|H|^4 + 1)
  double roundness = 0.0;      // max |H| / min |H|; +inf at the |H| floor
  double umbilicity = 0.0;     // max |A_ring|^2 / |H|^2; NaN at the |H| floor
  double kmin_ratio = 0.0;     // min K_min / |H|^2; NaN at the |H| floor
  double kato_defect = 0.0;    // max (3/(n+2)|grad H|^2 - |grad A|^2)_+ / (h^2 |A|^4), h the parameter spacing

  bool pinching_violated = false;  // maxQ > q_tolerance
  bool f_sigma_defined = true;
  bool h_floor_hit = false;

  /// Largest eps for which Z + n c |A_ring|^2 >= eps |A_ring|^2 (a|H|^2 + beta_eps c) held at
  /// every node with non-negligible |A_ring|; empty when every node is umbilical to rounding.
  std::optional<double> eps_Z_witness;
};

struct ReportOptions {
  double eps_Z = 0.01;
  double q_tolerance = 0.0;
};

PinchReport report(const SurfaceGeometry& geom, const PinchPreset& p, const ReportOptions& opts = {});
PinchReport report(const Immersion& imm, const PinchPreset& p, const ReportOptions& opts = {});

}  // namespace mcf
