#include "mcf/pinch.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace mcf {

namespace {

// Nodes with |A_ring|^2 below this fraction of |H|^2 are treated as umbilical
// when extracting the Z witness; there both sides of the bound are rounding noise.
constexpr double kUmbilicalFloor = 1e-10;

bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

PinchRegime parse_regime(const std::string& name) {
  if (name == "low_dim") return PinchRegime::low_dim;
  if (name == "high_dim") return PinchRegime::high_dim;
  if (name == "hypersurface_n3") return PinchRegime::hypersurface_n3;
  throw InputError("unknown pinching regime '" + name + "'");
}

std::string to_string(PinchRegime regime) {
  switch (regime) {
    case PinchRegime::low_dim: return "low_dim";
    case PinchRegime::high_dim: return "high_dim";
    case PinchRegime::hypersurface_n3: return "hypersurface_n3";
  }
  return "?";
}

PinchPreset preset(int n, int d, double c, double epsilon, double sigma, std::optional<PinchRegime> regime) {
  if (n < 2) throw InputError("pinching presets need n >= 2");
  if (d < 1) throw InputError("pinching presets need d >= 1");
  if (!std::isfinite(c)) throw InputError("curvature must be finite");
  if (!in_open_unit(epsilon)) throw InputError("epsilon must lie in (0,1)");
  if (!in_open_unit(sigma)) throw InputError("sigma must lie in (0,1)");

  PinchPreset p;
  p.n = n;
  p.d = d;
  p.c = c;
  p.epsilon = epsilon;
  p.sigma = sigma;
  p.regime = regime.value_or(n <= 3 ? PinchRegime::low_dim : PinchRegime::high_dim);
  const double nn = n;
  switch (p.regime) {
    case PinchRegime::low_dim:
      if (n > 3) throw InputError("the low_dim regime covers n = 2, 3");
      p.alpha = 4.0 / (3.0 * nn);
      p.beta = nn / 2.0;
      p.alpha_eps = 4.0 / (3.0 * nn + nn * epsilon);
      p.beta_eps = (nn / 2.0) * (1.0 + epsilon);
      p.a = 1.0 / (3.0 * nn + nn * epsilon);
      break;
    case PinchRegime::high_dim:
      if (n <= 3) throw InputError("the high_dim regime needs n >= 4");
      p.alpha = 1.0 / (nn - 1.0);
      p.beta = 2.0;
      p.alpha_eps = 1.0 / (nn - 1.0 + epsilon);
      p.beta_eps = 2.0 * (1.0 + epsilon);
      p.a = 1.0 / (nn * (nn - 1.0 + epsilon));
      break;
    case PinchRegime::hypersurface_n3:
      if (n != 3 || d != 1) throw InputError("the hypersurface_n3 regime needs n = 3, d = 1");
      p.alpha = 0.5;
      p.beta = 2.0;
      p.alpha_eps = 1.0 / (2.0 + epsilon);
      p.beta_eps = 2.0 * (1.0 + epsilon);
      p.a = 1.0 / (3.0 * (2.0 + epsilon));
      break;
  }
  p.b = epsilon * p.a;
  p.eps_nabla = 3.0 / (nn + 2.0) - 1.0 / nn - p.a;
  assert(p.eps_nabla > 0.0);
  return p;
}

double pinch_Q(double normsq_A, double normsq_H, double alpha, double beta, double c) {
  return normsq_A - alpha * normsq_H - beta * c;
}

double pinch_Q(const PointGeometry& geom, const PinchPreset& p) {
  return pinch_Q(geom.normsq_A, geom.normsq_H, p.alpha_eps, p.beta_eps, p.c);
}

double f_sigma_denominator(double normsq_H, const PinchPreset& p) { return p.a * normsq_H + p.beta_eps * p.c; }

double f_sigma(double normsq_Aring, double normsq_H, const PinchPreset& p) {
  const double denom = f_sigma_denominator(normsq_H, p);
  if (!(denom > 0.0)) throw PinchingViolation("f_sigma denominator a|H|^2 + beta_eps c is not positive");
  return normsq_Aring / std::pow(denom, 1.0 - p.sigma);
}

double f_sigma(const PointGeometry& geom, const PinchPreset& p) { return f_sigma(geom.normsq_Aring, geom.normsq_H, p); }

double z_margin(const InvariantBundle& inv, const PointGeometry& geom, const PinchPreset& p, double eps_Z) {
  const double ring = geom.normsq_Aring;
  return inv.Z + p.n * p.c * ring - eps_Z * ring * f_sigma_denominator(geom.normsq_H, p);
}

PinchReport report(const SurfaceGeometry& sg, const PinchPreset& p, const ReportOptions& opts) {
  const Grid& grid = sg.grid();
  const SpaceForm& space = sg.immersion().space();
  const int codim = sg.immersion().codim();
  const auto interior = grid.interior();
  const double h = grid.spacing();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();

  struct NodeValues {
    double Q, fs, margin, witness, grad_ratio, normH, umb, kmin_ratio, kato;
    bool fs_ok, floor_hit;
  };
  std::vector<NodeValues> vals(grid.size());
  const double kato_factor = 3.0 / (p.n + 2.0);

  for_each_node(sg.exec(), interior, [&](std::size_t node) {
    const PointGeometry& geom = sg.at(node);
    InvariantBundle inv = algebraic_invariants(geom, space, codim, h);
    inv.normsq_gradH = sg.grad_H_sq(node);
    inv.normsq_gradA = sg.grad_A_sq(node);
    NodeValues v{};
    v.Q = pinch_Q(geom, p);
    const double denom = f_sigma_denominator(geom.normsq_H, p);
    v.fs_ok = denom > 0.0;
    v.fs = v.fs_ok ? geom.normsq_Aring / std::pow(denom, 1.0 - p.sigma) : inf;
    v.margin = z_margin(inv, geom, p, opts.eps_Z);
    const double weight = geom.normsq_Aring * denom;
    v.witness = (geom.normsq_Aring > kUmbilicalFloor * geom.normsq_H && weight > 0.0)
                    ? (inv.Z + p.n * p.c * geom.normsq_Aring) / weight
                    : inf;
    v.grad_ratio = inv.normsq_gradH / (geom.normsq_H * geom.normsq_H + 1.0);
    v.normH = std::sqrt(geom.normsq_H);
    v.floor_hit = v.normH <= mean_curvature_floor(geom, h);
    v.umb = v.floor_hit ? nan : geom.normsq_Aring / geom.normsq_H;
    v.kmin_ratio = v.floor_hit ? nan : inv.K_min / geom.normsq_H;
    const double defect = std::max(0.0, kato_factor * inv.normsq_gradH - inv.normsq_gradA);
    const double scale = h * h * geom.normsq_A * geom.normsq_A;
    v.kato = defect > 0.0 ? (scale > 0.0 ? defect / scale : inf) : 0.0;
    vals[node] = v;
  });

  PinchReport r;
  r.maxQ = -inf;
  r.sup_f_sigma = -inf;
  r.z_margin = inf;
  r.grad_ratio = -inf;
  r.kato_defect = 0.0;
  double maxH = -inf, minH = inf, umb = -inf, kmin = inf, witness = inf;
  for (std::size_t node : interior) {
    const NodeValues& v = vals[node];
    r.maxQ = std::max(r.maxQ, v.Q);
    r.sup_f_sigma = std::max(r.sup_f_sigma, v.fs);
    r.f_sigma_defined = r.f_sigma_defined && v.fs_ok;
    r.z_margin = std::min(r.z_margin, v.margin);
    r.grad_ratio = std::max(r.grad_ratio, v.grad_ratio);
    r.kato_defect = std::max(r.kato_defect, v.kato);
    maxH = std::max(maxH, v.normH);
    minH = std::min(minH, v.normH);
    r.h_floor_hit = r.h_floor_hit || v.floor_hit;
    if (!v.floor_hit) {
      umb = std::max(umb, v.umb);
      kmin = std::min(kmin, v.kmin_ratio);
    }
    witness = std::min(witness, v.witness);
  }
  if (r.h_floor_hit) {
    r.roundness = inf;
    r.umbilicity = nan;
    r.kmin_ratio = nan;
  } else {
    r.roundness = maxH / minH;
    r.umbilicity = umb;
    r.kmin_ratio = kmin;
  }
  if (std::isfinite(witness)) r.eps_Z_witness = witness;
  r.pinching_violated = r.maxQ > opts.q_tolerance;
  return r;
}

PinchReport report(const Immersion& imm, const PinchPreset& p, const ReportOptions& opts) {
  return report(SurfaceGeometry(imm), p, opts);
}

}  // namespace mcf
