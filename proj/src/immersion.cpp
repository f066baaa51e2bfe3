#include "mcf/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mcf {

namespace {

double quadric_tolerance(const SpaceForm& space) {
  const double c = std::abs(space.curvature());
  return Immersion::kQuadricTolerance * (c > 0.0 ? std::max(1.0, 1.0 / c) : 1.0);
}

FlatVec combine(const std::vector<FlatVec>& frame, const ParamPoint& u, int count) {
  FlatVec v(frame[0].dim());
  for (int a = 0; a < count; ++a) v.axpy(u[static_cast<std::size_t>(a)], frame[static_cast<std::size_t>(a)]);
  return v;
}

void check_radius(const SpaceForm& space, double radius, const char* what) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InputError(std::string(what) + " must be positive");
  if (space.curvature() > 0.0 && radius >= std::numbers::pi / std::sqrt(space.curvature())) {
    throw InputError(std::string(what) + " exceeds the antipodal distance pi/sqrt(c)");
  }
}

}  // namespace

Immersion::Immersion(SpaceForm space, std::shared_ptr<const Grid> grid, std::vector<FlatVec> coords, int codim)
    : space_(std::move(space)), grid_(std::move(grid)), coords_(std::move(coords)), codim_(codim) {
  if (!grid_) throw InputError("immersion needs a grid");
  if (codim_ < 1) throw InputError("codimension must be at least 1");
  if (grid_->dim() + codim_ != space_.ambient_dim()) {
    throw InputError("n + d = " + std::to_string(grid_->dim() + codim_) + " does not match ambient dimension " +
                     std::to_string(space_.ambient_dim()));
  }
  if (coords_.size() != grid_->size()) throw InputError("coordinate count does not match the grid");
  for (const FlatVec& p : coords_) {
    if (p.dim() != space_.flat_dim()) throw InputError("node coordinate has the wrong flat dimension");
  }
  const double tol = quadric_tolerance(space_);
  for (std::size_t node : grid_->interior()) {
    if (!(space_.quadric_residual(coords_[node]) <= tol)) {
      throw InputError("node " + std::to_string(node) + " violates the quadric constraint");
    }
  }
}

Immersion Immersion::from_interior(SpaceForm space, std::shared_ptr<const Grid> grid, std::vector<FlatVec> coords,
                                   int codim) {
  for (std::size_t node : grid->interior()) coords[node] = space.project_to_quadric(coords[node]);
  grid->exchange(coords);
  return Immersion(std::move(space), std::move(grid), std::move(coords), codim);
}

double Immersion::max_quadric_residual() const {
  double worst = 0.0;
  for (std::size_t node : grid_->interior()) worst = std::max(worst, space_.quadric_residual(coords_[node]));
  return worst;
}

Immersion sample_immersion(const SpaceForm& space, ParamDomain domain, int codim,
                           const std::function<FlatVec(const ParamPoint&)>& shape) {
  auto grid = std::make_shared<const Grid>(domain);
  std::vector<FlatVec> coords(grid->size());
  for (std::size_t node = 0; node < grid->size(); ++node) coords[node] = shape(grid->param_point(node));
  return Immersion(space, std::move(grid), std::move(coords), codim);
}

Immersion make_geodesic_sphere(const SpaceForm& space, ParamDomain domain, const FlatVec& center, double radius) {
  if (!is_sphere(domain.topology)) throw InputError("geodesic spheres need a sphere topology");
  check_radius(space, radius, "sphere radius");
  if (space.quadric_residual(center) > quadric_tolerance(space)) throw InputError("center is not on the quadric");
  const int n = intrinsic_dim(domain.topology);
  const int codim = space.ambient_dim() - n;
  const auto frame = space.tangent_frame(center);
  return sample_immersion(space, domain, codim, [&](const ParamPoint& u) {
    return space.exp_map(center, combine(frame, u, n + 1), radius);
  });
}

double perturbation_basis(int mode, const ParamPoint& u) {
  const double x = u[0], y = u[1], z = u[2];
  switch (mode) {
    case 0: return 3.0 * z * z - 1.0;
    case 1: return x * y;
    case 2: return x * x - y * y;
    case 3: return z * (5.0 * z * z - 3.0);
    case 4: return x * y * z;
    case 5: return x;
    default: throw InputError("perturbation mode " + std::to_string(mode) + " is not in the catalogue");
  }
}

Immersion make_perturbed_sphere(const SpaceForm& space, ParamDomain domain, double radius,
                                std::span<const PerturbationMode> modes) {
  if (!is_sphere(domain.topology)) throw InputError("perturbed spheres need a sphere topology");
  check_radius(space, radius, "sphere radius");
  const int n = intrinsic_dim(domain.topology);
  const int codim = space.ambient_dim() - n;
  for (const PerturbationMode& m : modes) {
    perturbation_basis(m.mode, ParamPoint{});  // validates the index
    if (m.axis < 0 || m.axis >= codim) {
      throw InputError("perturbation axis " + std::to_string(m.axis) + " needs codimension > axis");
    }
    if (!std::isfinite(m.amplitude)) throw InputError("perturbation amplitude must be finite");
  }
  const FlatVec center = space.default_center();
  const auto frame = space.tangent_frame(center);
  return sample_immersion(space, domain, codim, [&](const ParamPoint& u) {
    double rho = 1.0;
    FlatVec lift(space.flat_dim());
    for (const PerturbationMode& m : modes) {
      const double y = perturbation_basis(m.mode, u);
      if (m.axis == 0) {
        rho += m.amplitude * y;
      } else {
        lift.axpy(radius * m.amplitude * y, frame[static_cast<std::size_t>(n + m.axis)]);
      }
    }
    rho *= radius;
    check_radius(space, rho, "perturbed radial function");
    const FlatVec p = space.exp_map(center, combine(frame, u, n + 1), rho);
    return space.exp_map(p, lift);
  });
}

Immersion make_torus(const SpaceForm& space, ParamDomain domain, std::pair<double, double> radii, int codim) {
  if (domain.topology != Topology::torus2) throw InputError("tori need the torus2 topology");
  const auto [major, minor] = radii;
  if (!(major > 0.0) || !(minor > 0.0) || !(minor < major)) {
    throw InputError("torus radii must satisfy 0 < minor < major");
  }
  check_radius(space, major + minor, "torus outer radius");
  if (2 + codim != space.ambient_dim()) throw InputError("torus codimension does not match the ambient dimension");
  const FlatVec center = space.default_center();
  const auto frame = space.tangent_frame(center);
  return sample_immersion(space, domain, codim, [&](const ParamPoint& angles) {
    const double t0 = angles[0], t1 = angles[1];
    const double ring = major + minor * std::cos(t1);
    FlatVec v = (ring * std::cos(t0)) * frame[0];
    v.axpy(ring * std::sin(t0), frame[1]);
    v.axpy(minor * std::sin(t1), frame[2]);
    return space.exp_map(center, v);
  });
}

Immersion refine(const Immersion& imm) {
  const Grid& coarse = imm.grid();
  auto fine = std::make_shared<const Grid>(ParamDomain{coarse.topology(), 2 * coarse.resolution()});
  std::vector<FlatVec> coords(fine->size(), FlatVec(imm.space().flat_dim()));
  for (std::size_t node : fine->interior()) {
    coords[node] = coarse.locate(fine->param_point(node)).apply(imm.coords());
  }
  return Immersion::from_interior(imm.space(), std::move(fine), std::move(coords), imm.codim());
}

}  // namespace mcf
