#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace mcf {

/// Parameter manifolds available for the abstract closed manifold M.
///   sphere2: cubed sphere, 6 square patches in equiangular gnomonic coordinates;
///   torus2:  one doubly periodic patch;
///   sphere3: cubed 3-sphere, 8 cubic patches in equiangular gnomonic coordinates.
enum class Topology { sphere2, torus2, sphere3 };

Topology parse_topology(const std::string& name);
std::string to_string(Topology topology);
int intrinsic_dim(Topology topology);
bool is_sphere(Topology topology);

struct ParamDomain {
  Topology topology = Topology::sphere2;
  int resolution = 32;  // nodes per patch edge (sphere) or per period (torus)
};

/// A point of the parameter manifold: a unit vector of R^{n+1} for sphere
/// topologies, the two angles (theta0, theta1) for the torus.
using ParamPoint = std::array<double, 4>;

/// Interpolation weights over interior nodes.
struct Interpolant {
  std::vector<std::size_t> sources;
  std::vector<double> weights;

  template <class T>
  T apply(std::span<const T> field) const {
    T acc = weights[0] * field[sources[0]];
    for (std::size_t k = 1; k < sources.size(); ++k) acc += weights[k] * field[sources[k]];
    return acc;
  }
};

/// Node layout of a structured multi-patch grid with three ghost layers per side.
///
/// Nodes sit at cell centres, so no node is shared between patches. Every
/// ghost node (edges and corners alike) is a well-defined point of the
/// patch's extended chart; `exchange` fills it by degree-5 tensor Lagrange
/// interpolation from the interior nodes of whichever patch contains that
/// point (periodic copy for the torus). Any field given at interior nodes can
/// be exchanged, but only smooth functions of the parameter point should be:
/// quantities obtained by differencing are recomputed in each patch's own
/// chart instead (see geometry).
class Grid {
 public:
  static constexpr int kGhost = 3;
  static constexpr int kStencil = 6;

  explicit Grid(ParamDomain domain);

  const ParamDomain& domain() const { return domain_; }
  Topology topology() const { return domain_.topology; }
  int dim() const { return dim_; }
  int resolution() const { return n_; }
  int patches() const { return patches_; }
  int extent() const { return extent_; }
  std::size_t size() const { return size_; }

  /// Parameter spacing (radians) along every axis.
  double spacing() const { return spacing_; }
  double cell_volume() const;

  std::ptrdiff_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

  std::span<const std::size_t> interior() const { return interior_; }
  /// Interior nodes followed by the first ghost layer (corners included).
  std::span<const std::size_t> extended() const { return extended_; }
  std::span<const std::size_t> ghosts() const { return ghost_nodes_; }

  bool is_interior(std::size_t node) const;
  /// 0 for interior nodes, otherwise the ghost layer (1 to kGhost).
  int ghost_layer(std::size_t node) const;

  ParamPoint param_point(std::size_t node) const;
  Interpolant locate(const ParamPoint& point) const;

  /// Christoffel symbols of the chart's reference metric at an interior node: the
  /// round unit sphere for sphere topologies (fourth-order differences of the
  /// parameter points), zero for the flat torus. Entry l*n*n + i*n + j is Gamma^l_ij.
  std::span<const double> reference_christoffel(std::size_t node) const;

  /// Fills every ghost node of `field` from interior values.
  template <class T>
  void exchange(std::span<T> field) const {
    for (std::size_t g = 0; g < ghost_nodes_.size(); ++g) {
      const std::size_t begin = ghost_offsets_[g], end = ghost_offsets_[g + 1];
      T acc = ghost_weights_[begin] * field[ghost_sources_[begin]];
      for (std::size_t k = begin + 1; k < end; ++k) {
        if constexpr (std::is_arithmetic_v<T>) {
          acc += ghost_weights_[k] * field[ghost_sources_[k]];
        } else {
          acc.axpy(ghost_weights_[k], field[ghost_sources_[k]]);
        }
      }
      field[ghost_nodes_[g]] = acc;
    }
  }
  template <class T>
  void exchange(std::vector<T>& field) const {
    exchange(std::span<T>(field));
  }

 private:
  struct Decoded {
    int patch;
    std::array<int, 3> index;  // storage indices in [0, extent)
  };
  Decoded decode(std::size_t node) const;
  std::size_t encode(int patch, const std::array<int, 3>& index) const;

  ParamDomain domain_;
  int dim_;
  int n_;
  int patches_;
  int extent_;
  std::size_t patch_size_;
  std::size_t size_;
  double spacing_;
  std::array<std::ptrdiff_t, 3> strides_{};

  std::vector<std::size_t> interior_;
  std::vector<std::size_t> extended_;
  std::vector<std::size_t> ghost_nodes_;
  std::vector<std::size_t> ghost_offsets_;
  std::vector<std::size_t> ghost_sources_;
  std::vector<double> ghost_weights_;
  std::vector<std::size_t> interior_slot_;
  std::vector<double> reference_christoffel_;
};

}  // namespace mcf
