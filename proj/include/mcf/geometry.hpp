#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mcf/exec.hpp"
#include "mcf/immersion.hpp"

namespace mcf {

using ScalarField = std::vector<double>;  // one value per grid node
using SymMatrix = std::array<std::array<double, 3>, 3>;
using VecMatrix = std::array<std::array<FlatVec, 3>, 3>;

/// Extrinsic geometry of the immersion at one node, from centred differences
/// in the node's own patch chart.
struct PointGeometry {
  int n = 0;
  SymMatrix g{};      // g_ij = <d_i F, d_j F>
  SymMatrix g_inv{};  // g^ij
  double area_element = 0.0;
  VecMatrix A_vec{};  // A_ij, normal-bundle valued
  FlatVec H_vec;      // g^ij A_ij
  VecMatrix A_ring{}; // A_ij - g_ij H / n
  double normsq_A = 0.0;
  double normsq_H = 0.0;
  double normsq_Aring = 0.0;

  // Chart data reused by the derivative kernels.
  FlatVec position;
  std::array<FlatVec, 3> tangents{};           // d_i F, projected onto the quadric's tangent space
  std::array<SymMatrix, 3> christoffel{};      // christoffel[k][i][j] = Gamma^k_ij
  double lambda_min_g = 0.0;                   // smallest eigenvalue of g

  /// Removes the quadric-normal and tangential parts of w.
  FlatVec normal_part(const SpaceForm& space, const FlatVec& w) const;
};

/// Reaction-term invariants and gradient norms at a node.
struct InvariantBundle {
  double R1 = 0.0;
  double R2 = 0.0;
  double Rperp_sq = 0.0;
  double Z = 0.0;
  double normsq_gradH = 0.0;
  double normsq_gradA = 0.0;
  std::optional<double> A_ring_H_sq;  // undefined when |H| is below the floor
  std::optional<double> A_ring_I_sq;
  double K_min = 0.0;
};

/// Pieces of the contracted Simons identity at a node.
struct SimonsTerms {
  double ring_hess_H = 0.0;     // <A_ring_ij, nabla_i nabla_j H>
  double normsq_gradAring = 0.0;
};

/// Data the flow needs at each node, computed without storing the full geometry.
struct CurvatureSample {
  FlatVec H;
  /// H + W^l F_l with W^l = g^ij (Gamma^l_ij - reference Gamma^l_ij): the DeTurck
  /// velocity, which moves the same surfaces while holding the parametrization
  /// near a harmonic map onto the reference chart.
  FlatVec V;
  double normsq_A = 0.0;
  double normsq_H = 0.0;
  double area_element = 0.0;
  double lambda_min_g = 0.0;
};

/// |H| floor below which the H-direction split is undefined: 1e-8 per grid-scale length.
double mean_curvature_floor(const PointGeometry& geom, double spacing);

/// Algebraic invariants that need only the node's own second fundamental form.
/// Gradient norms are left zero.
InvariantBundle algebraic_invariants(const PointGeometry& geom, const SpaceForm& space, int codim, double spacing);

/// Geometry of a whole immersion, evaluated once on interior nodes and the first ghost ring.
class SurfaceGeometry {
 public:
  explicit SurfaceGeometry(const Immersion& imm, Exec exec = Exec::parallel);

  const Immersion& immersion() const { return imm_; }
  const Grid& grid() const { return imm_.grid(); }
  Exec exec() const { return exec_; }

  /// Valid on grid().extended() nodes.
  const PointGeometry& at(std::size_t node) const { return geom_[node]; }

  InvariantBundle invariants(std::size_t node) const;
  double grad_H_sq(std::size_t node) const;
  double grad_A_sq(std::size_t node) const;
  SimonsTerms simons_terms(std::size_t node) const;

  /// Evaluates fn on every extended node (other nodes get 0).
  ScalarField field(const std::function<double(const PointGeometry&)>& fn) const;

  /// Divergence-form Laplace-Beltrami of a field valid on extended nodes;
  /// the result is valid on interior nodes.
  ScalarField laplacian(const ScalarField& f) const;

  /// Sum over interior nodes of f * sqrt(det g) * cell volume.
  double integral(const ScalarField& f) const;

  /// Smallest grid spacing measured in the induced metric.
  double min_spacing() const;

 private:
  Immersion imm_;
  Exec exec_;
  std::vector<PointGeometry> geom_;
};

PointGeometry point_geometry(const Immersion& imm, std::size_t node);
InvariantBundle invariants(const Immersion& imm, std::size_t node);
double grad_H(const Immersion& imm, std::size_t node);
double grad_A(const Immersion& imm, std::size_t node);

/// The field must be valid on extended nodes (see sample_field).
ScalarField laplace_beltrami(const Immersion& imm, const ScalarField& field);
double surface_integral(const Immersion& imm, const ScalarField& field);

/// Evaluates a function of the node position at every node, ghosts included.
ScalarField sample_field(const Immersion& imm, const std::function<double(const FlatVec&)>& fn);

/// Mean curvature and flow monitors at interior nodes; `out` is indexed by node id.
/// Throws GeometryError on a degenerate metric or non-finite data.
void mean_curvature_field(const Immersion& imm, std::span<CurvatureSample> out, Exec exec);

/// Eigenvalues of a symmetric n x n matrix (n <= 3), ascending.
std::array<double, 3> symmetric_eigenvalues(const SymMatrix& m, int n);

}  // namespace mcf
