#include "mcf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcf/errors.hpp"

namespace mcf {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;

// Ambient axis of the sphere vector carried by local coordinate `a` on a patch
// whose dominant axis is `k`.
int other_axis(int k, int a) { return a < k ? a : a + 1; }

std::array<double, Grid::kStencil> lagrange_weights(double x, int start) {
  std::array<double, Grid::kStencil> w{};
  for (int j = 0; j < Grid::kStencil; ++j) {
    double num = 1.0, den = 1.0;
    const double xj = start + j;
    for (int m = 0; m < Grid::kStencil; ++m) {
      if (m == j) continue;
      const double xm = start + m;
      num *= x - xm;
      den *= xj - xm;
    }
    w[static_cast<std::size_t>(j)] = num / den;
  }
  return w;
}

int floor_int(double x) { return static_cast<int>(std::floor(x)); }

}  // namespace

Topology parse_topology(const std::string& name) {
  if (name == "sphere2") return Topology::sphere2;
  if (name == "torus2") return Topology::torus2;
  if (name == "sphere3") return Topology::sphere3;
  throw InputError("unknown topology '" + name + "'");
}

std::string to_string(Topology topology) {
  switch (topology) {
    case Topology::sphere2: return "sphere2";
    case Topology::torus2: return "torus2";
    case Topology::sphere3: return "sphere3";
  }
  return "?";
}

int intrinsic_dim(Topology topology) { return topology == Topology::sphere3 ? 3 : 2; }

bool is_sphere(Topology topology) { return topology != Topology::torus2; }

Grid::Grid(ParamDomain domain)
    : domain_(domain),
      dim_(intrinsic_dim(domain.topology)),
      n_(domain.resolution),
      patches_(domain.topology == Topology::torus2 ? 1 : 2 * (dim_ + 1)),
      extent_(domain.resolution + 2 * kGhost) {
  if (n_ < 8) throw InputError("grid resolution must be at least 8");

  patch_size_ = 1;
  for (int a = 0; a < dim_; ++a) {
    strides_[static_cast<std::size_t>(a)] = static_cast<std::ptrdiff_t>(patch_size_);
    patch_size_ *= static_cast<std::size_t>(extent_);
  }
  size_ = patch_size_ * static_cast<std::size_t>(patches_);
  spacing_ = is_sphere(domain.topology) ? (std::numbers::pi / 2.0) / n_ : (2.0 * std::numbers::pi) / n_;

  std::vector<std::size_t> ring;
  for (std::size_t node = 0; node < size_; ++node) {
    const int layer = ghost_layer(node);
    if (layer == 0) {
      interior_.push_back(node);
    } else {
      if (layer == 1) ring.push_back(node);
      ghost_nodes_.push_back(node);
    }
  }
  extended_ = interior_;
  extended_.insert(extended_.end(), ring.begin(), ring.end());

  ghost_offsets_.reserve(ghost_nodes_.size() + 1);
  ghost_offsets_.push_back(0);
  for (std::size_t g : ghost_nodes_) {
    Interpolant rule = locate(param_point(g));
    ghost_sources_.insert(ghost_sources_.end(), rule.sources.begin(), rule.sources.end());
    ghost_weights_.insert(ghost_weights_.end(), rule.weights.begin(), rule.weights.end());
    ghost_offsets_.push_back(ghost_sources_.size());
  }

  const std::size_t block = static_cast<std::size_t>(dim_ * dim_ * dim_);
  interior_slot_.assign(size_, 0);
  reference_christoffel_.assign(interior_.size() * block, 0.0);
  if (domain_.topology == Topology::torus2) return;
  const double ih = 1.0 / spacing_;
  const double ih2 = ih * ih;
  using Vec = std::array<double, 4>;
  auto point = [&](std::size_t node, std::ptrdiff_t off) {
    return param_point(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + off));
  };
  auto dot = [&](const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int m = 0; m <= dim_; ++m) s += a[static_cast<std::size_t>(m)] * b[static_cast<std::size_t>(m)];
    return s;
  };
  for (std::size_t k = 0; k < interior_.size(); ++k) {
    const std::size_t node = interior_[k];
    interior_slot_[node] = k;
    const Vec u = param_point(node);
    std::array<Vec, 3> d1{};
    std::array<std::array<Vec, 3>, 3> d2{};
    for (int a = 0; a < dim_; ++a) {
      const std::ptrdiff_t s = strides_[static_cast<std::size_t>(a)];
      const Vec p1 = point(node, s), m1 = point(node, -s), p2 = point(node, 2 * s), m2 = point(node, -2 * s);
      for (std::size_t m = 0; m < 4; ++m) {
        d1[a][m] = (ih / 12.0) * (8.0 * (p1[m] - m1[m]) - (p2[m] - m2[m]));
        d2[a][a][m] = (ih2 / 12.0) * (16.0 * (p1[m] + m1[m]) - (p2[m] + m2[m]) - 30.0 * u[m]);
      }
      for (int b = a + 1; b < dim_; ++b) {
        const std::ptrdiff_t t = strides_[static_cast<std::size_t>(b)];
        const Vec npp = point(node, s + t), npm = point(node, s - t), nmp = point(node, -s + t),
                  nmm = point(node, -s - t);
        const Vec fpp = point(node, 2 * (s + t)), fpm = point(node, 2 * (s - t)), fmp = point(node, 2 * (-s + t)),
                  fmm = point(node, 2 * (-s - t));
        for (std::size_t m = 0; m < 4; ++m) {
          const double near = npp[m] - npm[m] - nmp[m] + nmm[m];
          const double far = fpp[m] - fpm[m] - fmp[m] + fmm[m];
          d2[a][b][m] = d2[b][a][m] = ih2 * ((1.0 / 3.0) * near - (1.0 / 48.0) * far);
        }
      }
    }
    std::array<std::array<double, 3>, 3> g{}, gi{};
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) g[a][b] = dot(d1[a], d1[b]);
    if (dim_ == 2) {
      const double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
      gi[0][0] = g[1][1] / det;
      gi[1][1] = g[0][0] / det;
      gi[0][1] = gi[1][0] = -g[0][1] / det;
    } else {
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int a1 = (a + 1) % 3, a2 = (a + 2) % 3, b1 = (b + 1) % 3, b2 = (b + 2) % 3;
          gi[b][a] = g[a1][b1] * g[a2][b2] - g[a1][b2] * g[a2][b1];
        }
      const double det = g[0][0] * gi[0][0] + g[0][1] * gi[1][0] + g[0][2] * gi[2][0];
      for (auto& row : gi)
        for (double& v : row) v /= det;
    }
    double* out = reference_christoffel_.data() + k * block;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int l = 0; l < dim_; ++l) {
          double gamma = 0.0;
          for (int m = 0; m < dim_; ++m) gamma += gi[l][m] * dot(d2[i][j], d1[m]);
          out[l * dim_ * dim_ + i * dim_ + j] = gamma;
        }
  }
}

std::span<const double> Grid::reference_christoffel(std::size_t node) const {
  const std::size_t block = static_cast<std::size_t>(dim_ * dim_ * dim_);
  return {reference_christoffel_.data() + interior_slot_[node] * block, block};
}

double Grid::cell_volume() const { return std::pow(spacing_, dim_); }

Grid::Decoded Grid::decode(std::size_t node) const {
  Decoded d{};
  d.patch = static_cast<int>(node / patch_size_);
  std::size_t rest = node % patch_size_;
  for (int a = 0; a < dim_; ++a) {
    d.index[static_cast<std::size_t>(a)] = static_cast<int>(rest % static_cast<std::size_t>(extent_));
    rest /= static_cast<std::size_t>(extent_);
  }
  return d;
}

std::size_t Grid::encode(int patch, const std::array<int, 3>& index) const {
  std::size_t node = static_cast<std::size_t>(patch) * patch_size_;
  for (int a = 0; a < dim_; ++a) {
    node += static_cast<std::size_t>(index[static_cast<std::size_t>(a)]) *
            static_cast<std::size_t>(strides_[static_cast<std::size_t>(a)]);
  }
  return node;
}

int Grid::ghost_layer(std::size_t node) const {
  const Decoded d = decode(node);
  int layer = 0;
  for (int a = 0; a < dim_; ++a) {
    const int i = d.index[static_cast<std::size_t>(a)];
    if (i < kGhost) layer = std::max(layer, kGhost - i);
    if (i >= kGhost + n_) layer = std::max(layer, i - (kGhost + n_) + 1);
  }
  return layer;
}

bool Grid::is_interior(std::size_t node) const { return ghost_layer(node) == 0; }

ParamPoint Grid::param_point(std::size_t node) const {
  const Decoded d = decode(node);
  ParamPoint p{};
  if (domain_.topology == Topology::torus2) {
    for (int a = 0; a < dim_; ++a) {
      p[static_cast<std::size_t>(a)] = (d.index[static_cast<std::size_t>(a)] - kGhost + 0.5) * spacing_;
    }
    return p;
  }
  const int k = d.patch / 2;
  const double sign = (d.patch % 2 == 0) ? 1.0 : -1.0;
  p[static_cast<std::size_t>(k)] = sign;
  for (int a = 0; a < dim_; ++a) {
    const double xi = -kQuarterPi + (d.index[static_cast<std::size_t>(a)] - kGhost + 0.5) * spacing_;
    p[static_cast<std::size_t>(other_axis(k, a))] = std::tan(xi);
  }
  double norm2 = 0.0;
  for (int m = 0; m <= dim_; ++m) norm2 += p[static_cast<std::size_t>(m)] * p[static_cast<std::size_t>(m)];
  const double inv = 1.0 / std::sqrt(norm2);
  for (int m = 0; m <= dim_; ++m) p[static_cast<std::size_t>(m)] *= inv;
  return p;
}

Interpolant Grid::locate(const ParamPoint& point) const {
  int patch = 0;
  std::array<double, 3> frac{};  // fractional interior index along each local axis
  if (domain_.topology == Topology::torus2) {
    for (int a = 0; a < dim_; ++a) frac[static_cast<std::size_t>(a)] = point[static_cast<std::size_t>(a)] / spacing_ - 0.5;
  } else {
    int k = 0;
    for (int m = 1; m <= dim_; ++m) {
      if (std::abs(point[static_cast<std::size_t>(m)]) > std::abs(point[static_cast<std::size_t>(k)])) k = m;
    }
    const double lead = point[static_cast<std::size_t>(k)];
    if (lead == 0.0) throw InputError("parameter point is not on the unit sphere");
    patch = 2 * k + (lead > 0.0 ? 0 : 1);
    for (int a = 0; a < dim_; ++a) {
      const double xi = std::atan(point[static_cast<std::size_t>(other_axis(k, a))] / std::abs(lead));
      frac[static_cast<std::size_t>(a)] = (xi + kQuarterPi) / spacing_ - 0.5;
    }
  }

  const bool periodic = domain_.topology == Topology::torus2;
  std::array<int, 3> start{};
  std::array<std::array<double, kStencil>, 3> w{};
  for (int a = 0; a < dim_; ++a) {
    const auto sa = static_cast<std::size_t>(a);
    int s = floor_int(frac[sa]) - (kStencil / 2 - 1);
    if (!periodic) s = std::clamp(s, 0, n_ - kStencil);
    start[sa] = s;
    w[sa] = lagrange_weights(frac[sa], s);
  }

  Interpolant rule;
  std::size_t count = 1;
  for (int a = 0; a < dim_; ++a) count *= kStencil;
  rule.sources.reserve(count);
  rule.weights.reserve(count);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rest = flat;
    std::array<int, 3> index{};
    double weight = 1.0;
    for (int a = 0; a < dim_; ++a) {
      const auto sa = static_cast<std::size_t>(a);
      const int m = static_cast<int>(rest % kStencil);
      rest /= kStencil;
      int j = start[sa] + m;
      if (periodic) j = ((j % n_) + n_) % n_;
      index[sa] = j + kGhost;
      weight *= w[sa][static_cast<std::size_t>(m)];
    }
    rule.sources.push_back(encode(patch, index));
    rule.weights.push_back(weight);
  }
  return rule;
}

}  // namespace mcf
