#include "mcf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mcf {

namespace {

using Rank3 = std::array<VecMatrix, 3>;  // T[k][i][j]

std::size_t shift(std::size_t node, std::ptrdiff_t offset) {
  return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + offset);
}

// Fourth-order centred first and second differences of F in the node's chart.
// The truncation error of these stencils depends on the chart, so it jumps
// across patch seams; keeping it at O(h^4) keeps the flow's velocity error
// smooth enough that its second derivatives stay O(h^2) at the seams.
struct Jet {
  FlatVec F;
  std::array<FlatVec, 3> d1{};
  VecMatrix d2{};
};

Jet compute_jet(std::span<const FlatVec> X, const Grid& grid, std::size_t node) {
  const int n = grid.dim();
  const double ih = 1.0 / grid.spacing();
  const double ih2 = ih * ih;
  auto at = [&](std::ptrdiff_t off) -> const FlatVec& { return X[shift(node, off)]; };
  Jet jet;
  jet.F = X[node];
  for (int a = 0; a < n; ++a) {
    const std::ptrdiff_t s = grid.stride(a);
    const FlatVec& p1 = at(s);
    const FlatVec& m1 = at(-s);
    const FlatVec& p2 = at(2 * s);
    const FlatVec& m2 = at(-2 * s);
    FlatVec d = 8.0 * (p1 - m1);
    d -= p2 - m2;
    jet.d1[a] = (ih / 12.0) * d;
    FlatVec e = 16.0 * (p1 + m1);
    e -= p2 + m2;
    e.axpy(-30.0, jet.F);
    jet.d2[a][a] = (ih2 / 12.0) * e;
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const std::ptrdiff_t sa = grid.stride(a), sb = grid.stride(b);
      // Richardson combination of the diagonal stencils at spacings h and 2h.
      FlatVec near = at(sa + sb) - at(sa - sb);
      near -= at(-sa + sb);
      near += at(-sa - sb);
      FlatVec far = at(2 * (sa + sb)) - at(2 * (sa - sb));
      far -= at(2 * (-sa + sb));
      far += at(2 * (-sa - sb));
      FlatVec d = (1.0 / 3.0) * near;
      d.axpy(-1.0 / 48.0, far);
      jet.d2[a][b] = ih2 * d;
      jet.d2[b][a] = jet.d2[a][b];
    }
  }
  return jet;
}

// Inverse of the Cholesky factor of g: M lower triangular with M g M^T = I.
SymMatrix orthonormalizer(const SymMatrix& g, int n) {
  SymMatrix L{};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = g[i][j];
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      L[i][j] = (i == j) ? std::sqrt(s) : s / L[j][j];
    }
  }
  SymMatrix M{};
  for (int i = 0; i < n; ++i) {
    M[i][i] = 1.0 / L[i][i];
    for (int j = 0; j < i; ++j) {
      double s = 0.0;
      for (int k = j; k < i; ++k) s += L[i][k] * M[k][j];
      M[i][j] = -s / L[i][i];
    }
  }
  return M;
}

// h_ab = M_ai M_bj A_ij
VecMatrix to_orthonormal(const VecMatrix& A, const SymMatrix& M, int n) {
  VecMatrix tmp{}, h{};
  const int dim = A[0][0].dim();
  for (int a = 0; a < n; ++a) {
    for (int j = 0; j < n; ++j) {
      FlatVec v(dim);
      for (int i = 0; i <= a; ++i) v.axpy(M[a][i], A[i][j]);
      tmp[a][j] = v;
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      FlatVec v(dim);
      for (int j = 0; j <= b; ++j) v.axpy(M[b][j], tmp[a][j]);
      h[a][b] = v;
    }
  }
  return h;
}

double normsq_rank3(const SpaceForm& space, const Rank3& T, const SymMatrix& M, int n) {
  Rank3 cur = T;
  for (int slot = 0; slot < 3; ++slot) {
    Rank3 next{};
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int e = 0; e < n; ++e) {
          FlatVec v(T[0][0][0].dim());
          for (int m = 0; m <= (slot == 0 ? a : slot == 1 ? b : e); ++m) {
            const double w = M[slot == 0 ? a : slot == 1 ? b : e][m];
            const FlatVec& src = slot == 0 ? cur[m][b][e] : slot == 1 ? cur[a][m][e] : cur[a][b][m];
            v.axpy(w, src);
          }
          next[a][b][e] = v;
        }
      }
    }
    cur = next;
  }
  double s = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int e = 0; e < n; ++e) s += space.dot(cur[a][b][e], cur[a][b][e]);
  return s;
}

double contract2(const SpaceForm& space, const VecMatrix& X, const VecMatrix& Y, const SymMatrix& ginv, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s += ginv[i][k] * ginv[j][l] * space.dot(X[i][j], Y[k][l]);
  return s;
}

// Metric, Christoffel symbols, A_ij and H. With `full`, also the traceless part,
// the norms and the metric's smallest eigenvalue; otherwise those are left for the caller.
void fill_geometry(const Jet& jet, const SpaceForm& space, int n, std::size_t node, PointGeometry& geom, bool full) {
  geom.n = n;
  geom.position = jet.F;
  for (int a = 0; a < n; ++a) geom.tangents[a] = space.tangent_project(jet.F, jet.d1[a]);

  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) geom.g[a][b] = geom.g[b][a] = space.dot(geom.tangents[a], geom.tangents[b]);

  const SymMatrix& g = geom.g;
  double det = 0.0;
  double scale = 0.0;
  for (int a = 0; a < n; ++a) scale += g[a][a];
  scale /= n;
  SymMatrix& gi = geom.g_inv;
  if (n == 2) {
    det = g[0][0] * g[1][1] - g[0][1] * g[0][1];
    gi[0][0] = g[1][1] / det;
    gi[1][1] = g[0][0] / det;
    gi[0][1] = gi[1][0] = -g[0][1] / det;
  } else {
    const double c00 = g[1][1] * g[2][2] - g[1][2] * g[1][2];
    const double c01 = g[1][2] * g[0][2] - g[0][1] * g[2][2];
    const double c02 = g[0][1] * g[1][2] - g[1][1] * g[0][2];
    const double c11 = g[0][0] * g[2][2] - g[0][2] * g[0][2];
    const double c12 = g[0][1] * g[0][2] - g[0][0] * g[1][2];
    const double c22 = g[0][0] * g[1][1] - g[0][1] * g[0][1];
    det = g[0][0] * c00 + g[0][1] * c01 + g[0][2] * c02;
    gi[0][0] = c00 / det;
    gi[0][1] = gi[1][0] = c01 / det;
    gi[0][2] = gi[2][0] = c02 / det;
    gi[1][1] = c11 / det;
    gi[1][2] = gi[2][1] = c12 / det;
    gi[2][2] = c22 / det;
  }
  const double scale_n = n == 2 ? scale * scale : scale * scale * scale;
  if (!std::isfinite(det) || !(det > 1e-12 * scale_n)) throw GeometryError("degenerate induced metric", node);
  geom.area_element = std::sqrt(det);

  FlatVec H(space.flat_dim());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      FlatVec w = space.tangent_project(jet.F, jet.d2[i][j]);
      std::array<double, 3> p{};
      for (int k = 0; k < n; ++k) p[k] = space.dot(w, geom.tangents[k]);
      for (int l = 0; l < n; ++l) {
        double gamma = 0.0;
        for (int k = 0; k < n; ++k) gamma += gi[l][k] * p[k];
        geom.christoffel[l][i][j] = geom.christoffel[l][j][i] = gamma;
        w.axpy(-gamma, geom.tangents[l]);
      }
      geom.A_vec[i][j] = w;
      if (j != i) geom.A_vec[j][i] = w;
      H.axpy((i == j ? 1.0 : 2.0) * gi[i][j], w);
    }
  }
  geom.H_vec = H;
  geom.normsq_H = space.dot(H, H);
  if (!full) return;

  geom.lambda_min_g = symmetric_eigenvalues(g, n)[0];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      FlatVec r = geom.A_vec[i][j];
      r.axpy(-g[i][j] / n, H);
      geom.A_ring[i][j] = r;
    }
  }
  geom.normsq_A = contract2(space, geom.A_vec, geom.A_vec, gi, n);
  geom.normsq_Aring = contract2(space, geom.A_ring, geom.A_ring, gi, n);
  if (!std::isfinite(geom.normsq_A) || !std::isfinite(geom.normsq_H)) {
    throw GeometryError("non-finite curvature", node);
  }
}

PointGeometry geometry_at(std::span<const FlatVec> X, const Grid& grid, const SpaceForm& space, std::size_t node) {
  PointGeometry geom;
  fill_geometry(compute_jet(X, grid, node), space, grid.dim(), node, geom, true);
  return geom;
}

// d_k d_i d_j F by centred differences.
FlatVec third_difference(std::span<const FlatVec> X, const Grid& grid, std::size_t node, int k, int i, int j) {
  std::array<int, 3> idx{k, i, j};
  std::sort(idx.begin(), idx.end());
  const double ih = 1.0 / grid.spacing();
  const double ih3 = ih * ih * ih;
  auto at = [&](std::ptrdiff_t off) -> const FlatVec& { return X[shift(node, off)]; };
  if (idx[0] == idx[2]) {
    const std::ptrdiff_t s = grid.stride(idx[0]);
    FlatVec d = at(2 * s) - at(-2 * s);
    d.axpy(-2.0, at(s));
    d.axpy(2.0, at(-s));
    return (0.5 * ih3) * d;
  }
  if (idx[0] == idx[1] || idx[1] == idx[2]) {
    const int a = idx[1];                              // repeated index
    const int b = (idx[0] == idx[1]) ? idx[2] : idx[0];  // single index
    const std::ptrdiff_t sa = grid.stride(a), sb = grid.stride(b);
    FlatVec d = at(sb + sa) + at(sb - sa);
    d.axpy(-2.0, at(sb));
    d -= at(-sb + sa);
    d -= at(-sb - sa);
    d.axpy(2.0, at(-sb));
    return (0.5 * ih3) * d;
  }
  const std::ptrdiff_t s0 = grid.stride(0), s1 = grid.stride(1), s2 = grid.stride(2);
  FlatVec d(X[node].dim());
  for (int m = 0; m < 8; ++m) {
    const int e0 = (m & 1) ? 1 : -1, e1 = (m & 2) ? 1 : -1, e2 = (m & 4) ? 1 : -1;
    d.axpy(static_cast<double>(e0 * e1 * e2), at(e0 * s0 + e1 * s1 + e2 * s2));
  }
  return (0.125 * ih3) * d;
}

using HLookup = std::function<const FlatVec&(std::size_t)>;

std::array<FlatVec, 3> gradient_H(const PointGeometry& geom, const SpaceForm& space, const Grid& grid,
                                  std::size_t node, const HLookup& H_at) {
  std::array<FlatVec, 3> grad{};
  const double ih = 1.0 / grid.spacing();
  for (int k = 0; k < geom.n; ++k) {
    const std::ptrdiff_t s = grid.stride(k);
    grad[k] = geom.normal_part(space, (0.5 * ih) * (H_at(shift(node, s)) - H_at(shift(node, -s))));
  }
  return grad;
}

Rank3 gradient_A(const PointGeometry& geom, const SpaceForm& space, std::span<const FlatVec> X, const Grid& grid,
                 std::size_t node) {
  const int n = geom.n;
  const auto& G = geom.christoffel;
  Rank3 T{};
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        FlatVec v = geom.normal_part(space, third_difference(X, grid, node, k, i, j));
        for (int l = 0; l < n; ++l) {
          v.axpy(-G[l][i][j], geom.A_vec[k][l]);
          v.axpy(-G[l][k][i], geom.A_vec[l][j]);
          v.axpy(-G[l][k][j], geom.A_vec[i][l]);
        }
        T[k][i][j] = v;
        T[k][j][i] = v;
      }
    }
  }
  return T;
}

double normsq_gradient(const SpaceForm& space, const std::array<FlatVec, 3>& grad, const SymMatrix& ginv, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) s += ginv[k][l] * space.dot(grad[k], grad[l]);
  return s;
}

VecMatrix hessian_H(const PointGeometry& geom, const SpaceForm& space, const Grid& grid, std::size_t node,
                    const HLookup& H_at, const std::array<FlatVec, 3>& gradH) {
  const int n = geom.n;
  const double ih = 1.0 / grid.spacing();
  const double ih2 = ih * ih;
  const FlatVec& H = geom.H_vec;
  VecMatrix hess{};
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const std::ptrdiff_t si = grid.stride(i), sj = grid.stride(j);
      FlatVec d;
      if (i == j) {
        d = H_at(shift(node, si)) + H_at(shift(node, -si));
        d.axpy(-2.0, H);
        d *= ih2;
      } else {
        d = H_at(shift(node, si + sj)) - H_at(shift(node, si - sj));
        d -= H_at(shift(node, -si + sj));
        d += H_at(shift(node, -si - sj));
        d *= 0.25 * ih2;
      }
      FlatVec v = geom.normal_part(space, d);
      // Converting the ambient second derivative of the normal field H into the
      // normal-connection Hessian: the tangential part of d_j H is -<H, A_jk> g^kl d_l F,
      // whose derivative contributes this normal term.
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) v.axpy(geom.g_inv[k][l] * space.dot(H, geom.A_vec[j][k]), geom.A_vec[i][l]);
      for (int k = 0; k < n; ++k) v.axpy(-geom.christoffel[k][i][j], gradH[k]);
      hess[i][j] = v;
      hess[j][i] = v;
    }
  }
  return hess;
}

Rank3 traceless_gradient(const Rank3& gradA, const std::array<FlatVec, 3>& gradH, const SymMatrix& g, int n) {
  Rank3 T = gradA;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) T[k][i][j].axpy(-g[i][j] / n, gradH[k]);
  return T;
}

double spacing_scale(const PointGeometry& geom, double spacing) { return spacing * std::sqrt(geom.lambda_min_g); }

}  // namespace

FlatVec PointGeometry::normal_part(const SpaceForm& space, const FlatVec& w) const {
  FlatVec t = space.tangent_project(position, w);
  std::array<double, 3> p{};
  for (int k = 0; k < n; ++k) p[k] = space.dot(t, tangents[k]);
  for (int l = 0; l < n; ++l) {
    double q = 0.0;
    for (int k = 0; k < n; ++k) q += g_inv[l][k] * p[k];
    t.axpy(-q, tangents[l]);
  }
  return t;
}

std::array<double, 3> symmetric_eigenvalues(const SymMatrix& m, int n) {
  if (n == 1) return {m[0][0], 0.0, 0.0};
  if (n == 2) {
    const double mean = 0.5 * (m[0][0] + m[1][1]);
    const double rad = std::hypot(0.5 * (m[0][0] - m[1][1]), m[0][1]);
    return {mean - rad, mean + rad, 0.0};
  }
  const double p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
  const double q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
  std::array<double, 3> e{m[0][0], m[1][1], m[2][2]};
  if (p1 == 0.0) {
    std::sort(e.begin(), e.end());
    return e;
  }
  const double d0 = m[0][0] - q, d1 = m[1][1] - q, d2 = m[2][2] - q;
  const double p = std::sqrt((d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1) / 6.0);
  const double b00 = d0 / p, b11 = d1 / p, b22 = d2 / p;
  const double b01 = m[0][1] / p, b02 = m[0][2] / p, b12 = m[1][2] / p;
  const double detB = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) + b02 * (b01 * b12 - b11 * b02);
  const double r = std::clamp(detB / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double big = q + 2.0 * p * std::cos(phi);
  const double small = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {small, 3.0 * q - big - small, big};
}

double mean_curvature_floor(const PointGeometry& geom, double spacing) {
  return 1e-8 / spacing_scale(geom, spacing);
}

InvariantBundle algebraic_invariants(const PointGeometry& geom, const SpaceForm& space, int codim, double spacing) {
  const int n = geom.n;
  const SymMatrix M = orthonormalizer(geom.g, n);
  const VecMatrix h = to_orthonormal(geom.A_vec, M, n);
  auto dot = [&](const FlatVec& u, const FlatVec& v) { return space.dot(u, v); };

  InvariantBundle inv;
  FlatVec H(space.flat_dim());
  for (int a = 0; a < n; ++a) H += h[a][a];

  double first = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = dot(h[i][j], h[k][l]);
          first += v * v;
        }

  double perp = 0.0;
  if (codim > 1) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) {
            perp += dot(h[i][p], h[i][q]) * dot(h[j][p], h[j][q]) - dot(h[i][p], h[j][q]) * dot(h[j][p], h[i][q]);
          }
    perp = std::max(0.0, 2.0 * perp);
  }
  inv.Rperp_sq = perp;
  inv.R1 = first + perp;

  double r2 = 0.0, cubic = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = dot(H, h[i][j]);
      r2 += v * v;
      for (int p = 0; p < n; ++p) cubic += dot(H, h[i][p]) * dot(h[i][j], h[p][j]);
    }
  }
  inv.R2 = r2;
  inv.Z = -inv.R1 + cubic;

  const double normH = std::sqrt(std::max(0.0, dot(H, H)));
  if (normH > mean_curvature_floor(geom, spacing)) {
    const FlatVec nu = (1.0 / normH) * H;
    double ring_h = 0.0, ring_i = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const double along = dot(h[a][b], nu);
        const double t = along - (a == b ? normH / n : 0.0);
        ring_h += t * t;
        FlatVec rest = h[a][b];
        rest.axpy(-along, nu);
        ring_i += dot(rest, rest);
      }
    }
    inv.A_ring_H_sq = ring_h;
    inv.A_ring_I_sq = ring_i;
  }

  const double c = space.curvature();
  if (n == 2) {
    inv.K_min = c + dot(h[0][0], h[1][1]) - dot(h[0][1], h[0][1]);
  } else {
    // Curvature operator on the bivectors e1^e2, e2^e0, e0^e1; in three dimensions
    // every bivector is decomposable, so its least eigenvalue is the least sectional curvature.
    constexpr std::array<std::array<int, 2>, 3> pairs{{{1, 2}, {2, 0}, {0, 1}}};
    SymMatrix R{};
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) {
        const int i = pairs[p][0], j = pairs[p][1], k = pairs[q][0], l = pairs[q][1];
        const double flat = c * ((i == k && j == l ? 1.0 : 0.0) - (i == l && j == k ? 1.0 : 0.0));
        R[p][q] = flat + dot(h[i][k], h[j][l]) - dot(h[i][l], h[j][k]);
      }
    }
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) R[p][q] = R[q][p] = 0.5 * (R[p][q] + R[q][p]);
    inv.K_min = symmetric_eigenvalues(R, 3)[0];
  }
  return inv;
}

SurfaceGeometry::SurfaceGeometry(const Immersion& imm, Exec exec) : imm_(imm), exec_(exec) {
  const Grid& grid = imm_.grid();
  geom_.resize(grid.size());
  const auto X = imm_.coords();
  const SpaceForm& space = imm_.space();
  const int n = grid.dim();
  for_each_node(exec_, grid.extended(), [&](std::size_t node) {
    fill_geometry(compute_jet(X, grid, node), space, n, node, geom_[node], true);
  });
}

InvariantBundle SurfaceGeometry::invariants(std::size_t node) const {
  const PointGeometry& geom = geom_[node];
  InvariantBundle inv = algebraic_invariants(geom, imm_.space(), imm_.codim(), grid().spacing());
  inv.normsq_gradH = grad_H_sq(node);
  inv.normsq_gradA = grad_A_sq(node);
  return inv;
}

double SurfaceGeometry::grad_H_sq(std::size_t node) const {
  const PointGeometry& geom = geom_[node];
  const auto grad = gradient_H(geom, imm_.space(), grid(), node,
                               [this](std::size_t m) -> const FlatVec& { return geom_[m].H_vec; });
  return normsq_gradient(imm_.space(), grad, geom.g_inv, geom.n);
}

double SurfaceGeometry::grad_A_sq(std::size_t node) const {
  const PointGeometry& geom = geom_[node];
  const Rank3 T = gradient_A(geom, imm_.space(), imm_.coords(), grid(), node);
  return normsq_rank3(imm_.space(), T, orthonormalizer(geom.g, geom.n), geom.n);
}

SimonsTerms SurfaceGeometry::simons_terms(std::size_t node) const {
  const PointGeometry& geom = geom_[node];
  const SpaceForm& space = imm_.space();
  const HLookup H_at = [this](std::size_t m) -> const FlatVec& { return geom_[m].H_vec; };
  const auto gradH = gradient_H(geom, space, grid(), node, H_at);
  const VecMatrix hess = hessian_H(geom, space, grid(), node, H_at, gradH);
  const Rank3 gradA = gradient_A(geom, space, imm_.coords(), grid(), node);
  SimonsTerms terms;
  terms.ring_hess_H = contract2(space, geom.A_ring, hess, geom.g_inv, geom.n);
  terms.normsq_gradAring =
      normsq_rank3(space, traceless_gradient(gradA, gradH, geom.g, geom.n), orthonormalizer(geom.g, geom.n), geom.n);
  return terms;
}

ScalarField SurfaceGeometry::field(const std::function<double(const PointGeometry&)>& fn) const {
  ScalarField f(grid().size(), 0.0);
  for_each_node(exec_, grid().extended(), [&](std::size_t node) { f[node] = fn(geom_[node]); });
  return f;
}

ScalarField SurfaceGeometry::laplacian(const ScalarField& f) const {
  const Grid& grid = imm_.grid();
  const int n = grid.dim();
  const double ih2 = 1.0 / (grid.spacing() * grid.spacing());
  ScalarField out(grid.size(), 0.0);
  auto k = [this](std::size_t node, int a, int b) { return geom_[node].area_element * geom_[node].g_inv[a][b]; };
  for_each_node(exec_, grid.interior(), [&](std::size_t node) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
      const std::ptrdiff_t sa = grid.stride(a);
      const std::size_t p = shift(node, sa), m = shift(node, -sa);
      const double kp = 0.5 * (k(node, a, a) + k(p, a, a));
      const double km = 0.5 * (k(node, a, a) + k(m, a, a));
      acc += kp * (f[p] - f[node]) - km * (f[node] - f[m]);
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        const std::ptrdiff_t sb = grid.stride(b);
        acc += 0.25 * (k(p, a, b) * (f[shift(p, sb)] - f[shift(p, -sb)]) -
                       k(m, a, b) * (f[shift(m, sb)] - f[shift(m, -sb)]));
      }
    }
    out[node] = acc * ih2 / geom_[node].area_element;
  });
  return out;
}

double SurfaceGeometry::integral(const ScalarField& f) const {
  const auto interior = grid().interior();
  std::vector<double> terms(interior.size());
  for (std::size_t k = 0; k < interior.size(); ++k) terms[k] = f[interior[k]] * geom_[interior[k]].area_element;
  return pairwise_sum(terms) * grid().cell_volume();
}

double SurfaceGeometry::min_spacing() const {
  double lam = geom_[grid().interior()[0]].lambda_min_g;
  for (std::size_t node : grid().interior()) lam = std::min(lam, geom_[node].lambda_min_g);
  return grid().spacing() * std::sqrt(lam);
}

PointGeometry point_geometry(const Immersion& imm, std::size_t node) {
  if (node >= imm.grid().size() || imm.grid().ghost_layer(node) > 1) {
    throw InputError("node " + std::to_string(node) + " has no complete stencil");
  }
  return geometry_at(imm.coords(), imm.grid(), imm.space(), node);
}

namespace {

// Geometry of the node and the neighbours its derivative stencils touch.
struct Neighbourhood {
  std::vector<std::pair<std::size_t, PointGeometry>> cells;
  const PointGeometry& at(std::size_t node) const {
    for (const auto& [m, g] : cells)
      if (m == node) return g;
    throw InputError("node outside the derivative stencil");
  }
};

Neighbourhood neighbourhood(const Immersion& imm, std::size_t node) {
  if (!imm.grid().is_interior(node)) throw InputError("derivatives are evaluated at interior nodes");
  const Grid& grid = imm.grid();
  Neighbourhood nb;
  std::vector<std::size_t> nodes{node};
  for (int a = 0; a < grid.dim(); ++a) {
    nodes.push_back(shift(node, grid.stride(a)));
    nodes.push_back(shift(node, -grid.stride(a)));
    for (int b = a + 1; b < grid.dim(); ++b) {
      for (int sa : {-1, 1})
        for (int sb : {-1, 1}) nodes.push_back(shift(node, sa * grid.stride(a) + sb * grid.stride(b)));
    }
  }
  for (std::size_t m : nodes) nb.cells.emplace_back(m, geometry_at(imm.coords(), grid, imm.space(), m));
  return nb;
}

}  // namespace

double grad_H(const Immersion& imm, std::size_t node) {
  const Neighbourhood nb = neighbourhood(imm, node);
  const PointGeometry& geom = nb.at(node);
  const auto grad = gradient_H(geom, imm.space(), imm.grid(), node,
                               [&nb](std::size_t m) -> const FlatVec& { return nb.at(m).H_vec; });
  return normsq_gradient(imm.space(), grad, geom.g_inv, geom.n);
}

double grad_A(const Immersion& imm, std::size_t node) {
  if (!imm.grid().is_interior(node)) throw InputError("derivatives are evaluated at interior nodes");
  const PointGeometry geom = point_geometry(imm, node);
  const Rank3 T = gradient_A(geom, imm.space(), imm.coords(), imm.grid(), node);
  return normsq_rank3(imm.space(), T, orthonormalizer(geom.g, geom.n), geom.n);
}

InvariantBundle invariants(const Immersion& imm, std::size_t node) {
  const PointGeometry geom = point_geometry(imm, node);
  InvariantBundle inv = algebraic_invariants(geom, imm.space(), imm.codim(), imm.grid().spacing());
  inv.normsq_gradH = grad_H(imm, node);
  inv.normsq_gradA = grad_A(imm, node);
  return inv;
}

ScalarField laplace_beltrami(const Immersion& imm, const ScalarField& field) {
  if (field.size() != imm.grid().size()) throw InputError("field size does not match the grid");
  return SurfaceGeometry(imm).laplacian(field);
}

double surface_integral(const Immersion& imm, const ScalarField& field) {
  if (field.size() != imm.grid().size()) throw InputError("field size does not match the grid");
  return SurfaceGeometry(imm).integral(field);
}

ScalarField sample_field(const Immersion& imm, const std::function<double(const FlatVec&)>& fn) {
  ScalarField f(imm.grid().size());
  for (std::size_t node = 0; node < f.size(); ++node) f[node] = fn(imm.at(node));
  return f;
}

namespace {

// The flow kernel: the same fourth-order stencils and projections as
// fill_geometry, on plain lane arrays sized to the flat dimension, keeping
// only what the flow needs.
template <int L>
struct Lanes {
  std::array<double, L> v;
};

template <int L>
Lanes<L> load(const FlatVec& x) {
  Lanes<L> r;
  for (int k = 0; k < L; ++k) r.v[k] = x[k];
  return r;
}

template <bool lorentz, int L>
double ldot(const Lanes<L>& a, const Lanes<L>& b) {
  double s = 0.0;
  for (int k = 0; k < L; ++k) s += a.v[k] * b.v[k];
  if constexpr (lorentz) s -= 2.0 * a.v[0] * b.v[0];
  return s;
}

// Index of the independent component A_ij, i <= j, in the order (0,0), (0,1), ..., (n-1,n-1).
constexpr int sym_slot(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

template <int L, int n, bool lorentz>
CurvatureSample lean_sample(std::span<const FlatVec> X, const Grid& grid, std::size_t node, double c) {
  const double ih = 1.0 / grid.spacing();
  const double ih2 = ih * ih;
  auto at = [&](std::ptrdiff_t off) -> const FlatVec& { return X[shift(node, off)]; };

  const Lanes<L> F = load<L>(X[node]);
  std::array<Lanes<L>, 3> d1, d2diag;
  std::array<Lanes<L>, 3> d2mixed;  // (0,1), (0,2), (1,2)
  for (int a = 0; a < n; ++a) {
    const std::ptrdiff_t s = grid.stride(a);
    const FlatVec &p1 = at(s), &m1 = at(-s), &p2 = at(2 * s), &m2 = at(-2 * s);
    for (int k = 0; k < L; ++k) {
      d1[a].v[k] = (ih / 12.0) * (8.0 * (p1[k] - m1[k]) - (p2[k] - m2[k]));
      d2diag[a].v[k] = (ih2 / 12.0) * (16.0 * (p1[k] + m1[k]) - (p2[k] + m2[k]) - 30.0 * F.v[k]);
    }
  }
  int m = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b, ++m) {
      const std::ptrdiff_t sa = grid.stride(a), sb = grid.stride(b);
      const FlatVec &npp = at(sa + sb), &npm = at(sa - sb), &nmp = at(-sa + sb), &nmm = at(-sa - sb);
      const FlatVec &fpp = at(2 * (sa + sb)), &fpm = at(2 * (sa - sb)), &fmp = at(2 * (-sa + sb)),
                    &fmm = at(2 * (-sa - sb));
      for (int k = 0; k < L; ++k) {
        const double near = npp[k] - npm[k] - nmp[k] + nmm[k];
        const double far = fpp[k] - fpm[k] - fmp[k] + fmm[k];
        d2mixed[m].v[k] = ih2 * ((1.0 / 3.0) * near - (1.0 / 48.0) * far);
      }
    }
  }

  auto project = [&](Lanes<L> w) {
    if (c != 0.0) {
      const double s = c * ldot<lorentz>(w, F);
      for (int k = 0; k < L; ++k) w.v[k] -= s * F.v[k];
    }
    return w;
  };

  std::array<Lanes<L>, 3> t;
  for (int a = 0; a < n; ++a) t[a] = project(d1[a]);
  SymMatrix g{}, gi{};
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) g[a][b] = g[b][a] = ldot<lorentz>(t[a], t[b]);
  double det, scale;
  if constexpr (n == 2) {
    det = g[0][0] * g[1][1] - g[0][1] * g[0][1];
    gi[0][0] = g[1][1] / det;
    gi[1][1] = g[0][0] / det;
    gi[0][1] = gi[1][0] = -g[0][1] / det;
    scale = 0.5 * (g[0][0] + g[1][1]);
    scale *= scale;
  } else {
    const double c00 = g[1][1] * g[2][2] - g[1][2] * g[1][2];
    const double c01 = g[1][2] * g[0][2] - g[0][1] * g[2][2];
    const double c02 = g[0][1] * g[1][2] - g[1][1] * g[0][2];
    det = g[0][0] * c00 + g[0][1] * c01 + g[0][2] * c02;
    gi[0][0] = c00 / det;
    gi[0][1] = gi[1][0] = c01 / det;
    gi[0][2] = gi[2][0] = c02 / det;
    gi[1][1] = (g[0][0] * g[2][2] - g[0][2] * g[0][2]) / det;
    gi[1][2] = gi[2][1] = (g[0][1] * g[0][2] - g[0][0] * g[1][2]) / det;
    gi[2][2] = (g[0][0] * g[1][1] - g[0][1] * g[0][1]) / det;
    scale = (g[0][0] + g[1][1] + g[2][2]) / 3.0;
    scale = scale * scale * scale;
  }
  if (!std::isfinite(det) || !(det > 1e-12 * scale)) throw GeometryError("degenerate induced metric", node);

  std::array<Lanes<L>, 6> A;
  Lanes<L> H{};
  std::array<double, 3> W{};
  const std::span<const double> ref = grid.reference_christoffel(node);
  int u = 0;
  m = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++u) {
      Lanes<L> w = project(i == j ? d2diag[i] : d2mixed[m++]);
      const double weight = (i == j ? 1.0 : 2.0) * gi[i][j];
      std::array<double, 3> p{};
      for (int k = 0; k < n; ++k) p[k] = ldot<lorentz>(w, t[k]);
      for (int l = 0; l < n; ++l) {
        double gamma = 0.0;
        for (int k = 0; k < n; ++k) gamma += gi[l][k] * p[k];
        for (int k = 0; k < L; ++k) w.v[k] -= gamma * t[l].v[k];
        W[l] += weight * (gamma - ref[static_cast<std::size_t>((l * n + i) * n + j)]);
      }
      A[u] = w;
      for (int k = 0; k < L; ++k) H.v[k] += weight * w.v[k];
    }
  }

  CurvatureSample out;
  out.H = FlatVec(X[node].dim());
  out.V = FlatVec(X[node].dim());
  for (int k = 0; k < L; ++k) {
    out.H[k] = H.v[k];
    double v = H.v[k];
    for (int l = 0; l < n; ++l) v += W[l] * t[l].v[k];
    out.V[k] = v;
  }
  out.normsq_H = ldot<lorentz>(H, H);
  constexpr int slots = n * (n + 1) / 2;
  std::array<std::array<double, slots>, slots> gram;
  for (int p = 0; p < slots; ++p)
    for (int q = p; q < slots; ++q) gram[p][q] = gram[q][p] = ldot<lorentz>(A[p], A[q]);
  double a2 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) a2 += gi[i][k] * gi[j][l] * gram[sym_slot(i, j, n)][sym_slot(k, l, n)];
  out.normsq_A = a2;
  out.area_element = std::sqrt(det);
  if constexpr (n == 2) {
    const double half = 0.5 * (g[0][0] - g[1][1]);
    out.lambda_min_g = 0.5 * (g[0][0] + g[1][1]) - std::sqrt(half * half + g[0][1] * g[0][1]);
  } else {
    out.lambda_min_g = symmetric_eigenvalues(g, n)[0];
  }
  if (!std::isfinite(out.normsq_A) || !std::isfinite(out.normsq_H)) throw GeometryError("non-finite curvature", node);
  return out;
}

template <int L>
void curvature_kernel(const Immersion& imm, std::span<CurvatureSample> out, Exec exec) {
  const auto X = imm.coords();
  const Grid& grid = imm.grid();
  const double c = imm.space().curvature();
  auto run = [&]<int n, bool lorentz>() {
    for_each_node(exec, grid.interior(),
                  [&](std::size_t node) { out[node] = lean_sample<L, n, lorentz>(X, grid, node, c); });
  };
  if (grid.dim() == 2) {
    c < 0.0 ? run.template operator()<2, true>() : run.template operator()<2, false>();
  } else {
    c < 0.0 ? run.template operator()<3, true>() : run.template operator()<3, false>();
  }
}

}  // namespace

void mean_curvature_field(const Immersion& imm, std::span<CurvatureSample> out, Exec exec) {
  if (out.size() != imm.grid().size()) throw InputError("output span does not match the grid");
  const int dim = imm.space().flat_dim();
  if (dim <= 4) {
    curvature_kernel<4>(imm, out, exec);
  } else if (dim <= 6) {
    curvature_kernel<6>(imm, out, exec);
  } else {
    curvature_kernel<kMaxFlatDim>(imm, out, exec);
  }
}

}  // namespace mcf
