#include "einglue/tensorlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>

#include "einglue/parallel.hpp"

namespace einglue::tensorlab {

namespace {

void require_dim(int n) {
  if (n < 2 || n > kMaxDim) throw std::domain_error("tensorlab supports 2 <= dim <= 8");
}

// Dense symmetric positive definite inverse via Cholesky. Returns false when
// the matrix is not positive definite.
bool chol_inverse(int n, const double* a, double* inv) {
  double L[kMaxDim * kMaxDim] = {0};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        L[i * n + i] = std::sqrt(s);
      } else {
        L[i * n + j] = s / L[j * n + j];
      }
    }
  }
  // columns of the inverse: solve L L^T x = e_k
  for (int k = 0; k < n; ++k) {
    double y[kMaxDim];
    for (int i = 0; i < n; ++i) {
      double s = (i == k) ? 1.0 : 0.0;
      for (int m = 0; m < i; ++m) s -= L[i * n + m] * y[m];
      y[i] = s / L[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int m = i + 1; m < n; ++m) s -= L[m * n + i] * inv[m * n + k];
      inv[i * n + k] = s / L[i * n + i];
    }
  }
  return true;
}

void unpack_sym(int n, const double* packed, double* full) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) full[i * n + j] = packed[sym_index(n, i, j)];
}

}  // namespace

PatchGrid PatchGrid::centered(const std::vector<double>& center, const std::vector<double>& spacing,
                              const std::vector<int>& extents) {
  PatchGrid g;
  g.dim = static_cast<int>(center.size());
  require_dim(g.dim);
  if (spacing.size() != center.size() || extents.size() != center.size())
    throw std::invalid_argument("grid axis lists must have equal length");
  g.spacing = spacing;
  g.extents = extents;
  g.origin.resize(g.dim);
  for (int k = 0; k < g.dim; ++k) {
    if (!(spacing[k] > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    if (extents[k] < 5) throw std::invalid_argument("grid extents must be >= 5 per axis");
    g.origin[k] = center[k] - 0.5 * (extents[k] - 1) * spacing[k];
  }
  return g;
}

std::size_t PatchGrid::num_points() const {
  std::size_t n = 1;
  for (int e : extents) n *= static_cast<std::size_t>(e);
  return n;
}

std::size_t PatchGrid::stride(int axis) const {
  std::size_t s = 1;
  for (int k = dim - 1; k > axis; --k) s *= static_cast<std::size_t>(extents[k]);
  return s;
}

void PatchGrid::multi_index(std::size_t idx, int* mi) const {
  for (int k = dim - 1; k >= 0; --k) {
    mi[k] = static_cast<int>(idx % static_cast<std::size_t>(extents[k]));
    idx /= static_cast<std::size_t>(extents[k]);
  }
}

std::size_t PatchGrid::linear_index(const int* mi) const {
  std::size_t idx = 0;
  for (int k = 0; k < dim; ++k) idx = idx * static_cast<std::size_t>(extents[k]) + mi[k];
  return idx;
}

void PatchGrid::coords(const int* mi, double* y) const {
  for (int k = 0; k < dim; ++k) y[k] = origin[k] + mi[k] * spacing[k];
}

bool PatchGrid::interior(const int* mi, int margin) const {
  for (int k = 0; k < dim; ++k)
    if (mi[k] < margin || mi[k] >= extents[k] - margin) return false;
  return true;
}

int rank_components(FieldRank rank, int n) {
  switch (rank) {
    case FieldRank::Scalar: return 1;
    case FieldRank::Covector: return n;
    case FieldRank::Sym2: return n * (n + 1) / 2;
    case FieldRank::Riemann: return n * n * n * n;
  }
  return 0;
}

PatchField PatchField::zeros(const PatchGrid& grid, FieldRank rank, int margin) {
  PatchField f;
  f.rank = rank;
  f.dim = grid.dim;
  f.ncomp = rank_components(rank, grid.dim);
  f.margin = margin;
  f.extents = grid.extents;
  f.data.assign(grid.num_points() * static_cast<std::size_t>(f.ncomp), 0.0);
  return f;
}

MetricFn flat_metric(int n) {
  return [n](const double* /*y*/, double* g) {
    const int ns = n * (n + 1) / 2;
    for (int k = 0; k < ns; ++k) g[k] = 0.0;
    for (int i = 0; i < n; ++i) g[sym_index(n, i, i)] = 1.0;
  };
}

MetricFn ansatz_metric(const profiles::ProfileSpec& profile) {
  const int n = profile.dim();
  return [profile, n](const double* y, double* g) {
    const int ns = n * (n + 1) / 2;
    for (int k = 0; k < ns; ++k) g[k] = 0.0;
    const double u = y[0];
    const double x_last = y[n - 1];
    const profiles::ProfileEval e = profile.eval(u);
    g[sym_index(n, 0, 0)] = 1.0 / e.V;
    g[sym_index(n, 1, 1)] = e.V;
    const double fib = (u * u) / (x_last * x_last);
    for (int i = 2; i < n; ++i) g[sym_index(n, i, i)] = fib;
  };
}

PatchField sample_metric(const PatchGrid& grid, const MetricFn& fn) {
  PatchField f = PatchField::zeros(grid, FieldRank::Sym2, 0);
  parallel_for(grid.num_points(), [&](std::size_t p) {
    int mi[kMaxDim];
    double y[kMaxDim];
    grid.multi_index(p, mi);
    grid.coords(mi, y);
    fn(y, f.at(p));
  });
  return f;
}

PatchField sample_sym2(const PatchGrid& grid, const MetricFn& fn) { return sample_metric(grid, fn); }

PatchField inverse_metric(const PatchGrid& grid, const PatchField& g) {
  const int n = grid.dim;
  PatchField inv = PatchField::zeros(grid, FieldRank::Sym2, g.margin);
  std::atomic<std::size_t> first_bad{static_cast<std::size_t>(-1)};
  parallel_for(grid.num_points(), [&](std::size_t p) {
    int mi[kMaxDim];
    grid.multi_index(p, mi);
    if (!grid.interior(mi, g.margin)) return;
    double full[kMaxDim * kMaxDim], ifull[kMaxDim * kMaxDim];
    unpack_sym(n, g.at(p), full);
    if (!chol_inverse(n, full, ifull)) {
      std::size_t cur = first_bad.load();
      while (p < cur && !first_bad.compare_exchange_weak(cur, p)) {}
      return;
    }
    double* out = inv.at(p);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) out[sym_index(n, i, j)] = ifull[i * n + j];
  });
  if (first_bad.load() != static_cast<std::size_t>(-1)) {
    const std::size_t p = first_bad.load();
    int mi[kMaxDim];
    double y[kMaxDim];
    grid.multi_index(p, mi);
    grid.coords(mi, y);
    std::string where = "metric not positive definite at grid point " + std::to_string(p) + " (";
    for (int k = 0; k < n; ++k) where += (k ? "," : "") + std::to_string(y[k]);
    where += ")";
    throw std::domain_error(where);
  }
  return inv;
}

namespace {

inline double cdiff(const PatchField& f, std::size_t p, std::size_t stride, int comp,
                    double inv2h) {
  return (f.data[(p + stride) * f.ncomp + comp] - f.data[(p - stride) * f.ncomp + comp]) * inv2h;
}

struct GridCtx {
  const PatchGrid& grid;
  int n;
  int ns;
  std::size_t strides[kMaxDim];
  double inv2h[kMaxDim];

  explicit GridCtx(const PatchGrid& g) : grid(g), n(g.dim), ns(g.dim * (g.dim + 1) / 2) {
    for (int k = 0; k < n; ++k) {
      strides[k] = g.stride(k);
      inv2h[k] = 0.5 / g.spacing[k];
    }
  }
};

// Christoffel symbols at one point from the metric and inverse fields.
void christoffel_at(const GridCtx& c, const PatchField& g, const PatchField& ginv, std::size_t p,
                    double* gamma /* n * ns */) {
  const int n = c.n;
  double dg[kMaxDim][kMaxDim * (kMaxDim + 1) / 2];
  for (int k = 0; k < n; ++k)
    for (int s = 0; s < c.ns; ++s) dg[k][s] = cdiff(g, p, c.strides[k], s, c.inv2h[k]);
  const double* gi = ginv.at(p);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int cc = b; cc < n; ++cc) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) {
          const double t = dg[b][sym_index(n, d, cc)] + dg[cc][sym_index(n, d, b)] -
                           dg[d][sym_index(n, b, cc)];
          s += gi[sym_index(n, a, d)] * t;
        }
        gamma[a * c.ns + sym_index(n, b, cc)] = 0.5 * s;
      }
    }
  }
}

// R^d_{cab} at one point from the Christoffel field (central differences of
// gamma plus quadratic terms). Layout ((d*n + c)*n + a)*n + b.
void riemann_at(const GridCtx& c, const PatchField& gamma, std::size_t p, double* R) {
  const int n = c.n;
  const int ns = c.ns;
  const double* G = gamma.at(p);
  double dG[kMaxDim][kMaxDim * kMaxDim * (kMaxDim + 1) / 2];
  for (int k = 0; k < n; ++k)
    for (int s = 0; s < n * ns; ++s) dG[k][s] = cdiff(gamma, p, c.strides[k], s, c.inv2h[k]);

  for (int d = 0; d < n; ++d) {
    for (int cc = 0; cc < n; ++cc) {
      for (int a = 0; a < n; ++a) {
        R[((d * n + cc) * n + a) * n + a] = 0.0;
        for (int b = a + 1; b < n; ++b) {
          double val = dG[a][d * ns + sym_index(n, b, cc)] - dG[b][d * ns + sym_index(n, a, cc)];
          for (int e = 0; e < n; ++e) {
            val += G[d * ns + sym_index(n, a, e)] * G[e * ns + sym_index(n, b, cc)] -
                   G[d * ns + sym_index(n, b, e)] * G[e * ns + sym_index(n, a, cc)];
          }
          R[((d * n + cc) * n + a) * n + b] = val;
          R[((d * n + cc) * n + b) * n + a] = -val;
        }
      }
    }
  }
}

// Ric_{cb} = R^a_{cab}, symmetrized.
void ricci_from_riemann(int n, const double* R, double* ric_sym) {
  for (int cc = 0; cc < n; ++cc) {
    for (int b = cc; b < n; ++b) {
      double s1 = 0.0, s2 = 0.0;
      for (int a = 0; a < n; ++a) {
        s1 += R[((a * n + cc) * n + a) * n + b];
        s2 += R[((a * n + b) * n + a) * n + cc];
      }
      ric_sym[sym_index(n, cc, b)] = 0.5 * (s1 + s2);
    }
  }
}

}  // namespace

PatchField christoffel_field(const PatchGrid& grid, const PatchField& g, const PatchField& ginv) {
  const GridCtx c(grid);
  PatchField gamma = PatchField::zeros(grid, FieldRank::Scalar, g.margin + 1);
  gamma.ncomp = c.n * c.ns;
  gamma.data.assign(grid.num_points() * static_cast<std::size_t>(gamma.ncomp), 0.0);
  const int margin = gamma.margin;
  parallel_for(grid.num_points(), [&](std::size_t p) {
    int mi[kMaxDim];
    grid.multi_index(p, mi);
    if (!grid.interior(mi, margin)) return;
    christoffel_at(c, g, ginv, p, gamma.at(p));
  });
  return gamma;
}

PatchField ricci_fd(const PatchGrid& grid, const PatchField& g, const PatchField& /*ginv*/,
                    const PatchField& gamma) {
  const GridCtx c(grid);
  PatchField ric = PatchField::zeros(grid, FieldRank::Sym2, gamma.margin + 1);
  const int margin = ric.margin;
  parallel_for(grid.num_points(), [&](std::size_t p) {
    int mi[kMaxDim];
    grid.multi_index(p, mi);
    if (!grid.interior(mi, margin)) return;
    double R[kMaxDim * kMaxDim * kMaxDim * kMaxDim];
    riemann_at(c, gamma, p, R);
    ricci_from_riemann(c.n, R, ric.at(p));
  });
  (void)g;
  return ric;
}

CurvatureFields curvature_fd(const PatchGrid& grid, const PatchField& g) {
  for (int k = 0; k < grid.dim; ++k)
    if (grid.extents[k] < 5 + 2 * g.margin)
      throw std::domain_error("grid too small for the curvature stencil");
  const GridCtx c(grid);
  CurvatureFields out;
  const PatchField ginv = inverse_metric(grid, g);
  out.christoffel = christoffel_field(grid, g, ginv);
  out.riemann = PatchField::zeros(grid, FieldRank::Riemann, out.christoffel.margin + 1);
  out.ricci = PatchField::zeros(grid, FieldRank::Sym2, out.christoffel.margin + 1);
  const int margin = out.riemann.margin;
  parallel_for(grid.num_points(), [&](std::size_t p) {
    int mi[kMaxDim];
    grid.multi_index(p, mi);
    if (!grid.interior(mi, margin)) return;
    riemann_at(c, out.christoffel, p, out.riemann.at(p));
    ricci_from_riemann(c.n, out.riemann.at(p), out.ricci.at(p));
  });
  return out;
}

namespace {

// (nabla_a h)_{ij} field, layout a*ns + sym(i,j).
PatchField covariant_derivative_sym2(const GridCtx& c, const PatchField& h,
                                     const PatchField& gamma) {
  const int n = c.n, ns = c.ns;
  PatchField W = PatchField::zeros(c.grid, FieldRank::Scalar, std::max(h.margin + 1, gamma.margin));
  W.ncomp = n * ns;
  W.data.assign(c.grid.num_points() * static_cast<std::size_t>(W.ncomp), 0.0);
  const int margin = W.margin;
  parallel_for(c.grid.num_points(), [&](std::size_t p) {
    int mi[kMaxDim];
    c.grid.multi_index(p, mi);
    if (!c.grid.interior(mi, margin)) return;
    const double* G = gamma.at(p);
    const double* H = h.at(p);
    double* out = W.at(p);
    for (int a = 0; a < n; ++a) {
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          double v = cdiff(h, p, c.strides[a], sym_index(n, i, j), c.inv2h[a]);
          for (int m = 0; m < n; ++m) {
            v -= G[m * ns + sym_index(n, a, i)] * H[sym_index(n, m, j)];
            v -= G[m * ns + sym_index(n, a, j)] * H[sym_index(n, i, m)];
          }
          out[a * ns + sym_index(n, i, j)] = v;
        }
      }
    }
  });
  return W;
}

}  // namespace

PatchField bianchi_op(const PatchGrid& grid, const PatchField& g_bg, const PatchField& h) {
  if (h.rank != FieldRank::Sym2 || g_bg.rank != FieldRank::Sym2)
    throw std::invalid_argument("bianchi_op expects symmetric (0,2) fields");
  const GridCtx c(grid);
  const int n = c.n, ns = c.ns;
  const PatchField ginv = inverse_metric(grid, g_bg);
  const PatchField gamma = christoffel_field(grid, g_bg, ginv);

  // tr_bg(h) as a scalar field
  PatchField tr = PatchField::zeros(grid, FieldRank::Scalar, std::max(g_bg.margin, h.margin));
  parallel_for(grid.num_points(), [&](std::size_t p) {
    const double* gi = ginv.at(p);
    const double* H = h.at(p);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += gi[sym_index(n, i, j)] * H[sym_index(n, i, j)];
    tr.at(p)[0] = s;
  });

  const PatchField W = covariant_derivative_sym2(c, h, gamma);
  PatchField beta = PatchField::zeros(grid, FieldRank::Covector, std::max(W.margin, tr.margin + 1));
  const int margin = beta.margin;
  parallel_for(grid.num_points(), [&](std::size_t p) {
    int mi[kMaxDim];
    grid.multi_index(p, mi);
    if (!grid.interior(mi, margin)) return;
    const double* gi = ginv.at(p);
    double* out = beta.at(p);
    for (int j = 0; j < n; ++j) {
      double div = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          div += gi[sym_index(n, a, b)] * W.data[p * W.ncomp + a * ns + sym_index(n, j, b)];
      out[j] = -div + 0.5 * cdiff(tr, p, c.strides[j], 0, c.inv2h[j]);
    }
  });
  return beta;
}

PatchField lichnerowicz(const PatchGrid& grid, const PatchField& g_bg, const PatchField& h) {
  if (h.rank != FieldRank::Sym2 || g_bg.rank != FieldRank::Sym2)
    throw std::invalid_argument("lichnerowicz expects symmetric (0,2) fields");
  const GridCtx c(grid);
  const int n = c.n, ns = c.ns;
  const PatchField ginv = inverse_metric(grid, g_bg);
  const PatchField gamma = christoffel_field(grid, g_bg, ginv);
  const PatchField W = covariant_derivative_sym2(c, h, gamma);

  PatchField out = PatchField::zeros(grid, FieldRank::Sym2, W.margin + 1);
  const int margin = out.margin;
  parallel_for(grid.num_points(), [&](std::size_t p) {
    int mi[kMaxDim];
    grid.multi_index(p, mi);
    if (!grid.interior(mi, margin)) return;
    const double* gi = ginv.at(p);
    const double* G = gamma.at(p);
    const double* H = h.at(p);
    double* o = out.at(p);

    // connection Laplacian: -(g^{ab} nabla_a nabla_b h)_{ij}
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double lap = 0.0;
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            double v = cdiff(W, p, c.strides[a], b * ns + sym_index(n, i, j), c.inv2h[a]);
            for (int m = 0; m < n; ++m) {
              v -= G[m * ns + sym_index(n, a, b)] * W.data[p * W.ncomp + m * ns + sym_index(n, i, j)];
              v -= G[m * ns + sym_index(n, a, i)] * W.data[p * W.ncomp + b * ns + sym_index(n, m, j)];
              v -= G[m * ns + sym_index(n, a, j)] * W.data[p * W.ncomp + b * ns + sym_index(n, i, m)];
            }
            lap += gi[sym_index(n, a, b)] * v;
          }
        }
        o[sym_index(n, i, j)] = -lap;
      }
    }

    // Weitzenboeck action
    double R[kMaxDim * kMaxDim * kMaxDim * kMaxDim];
    riemann_at(c, gamma, p, R);
    double ric[kMaxDim * (kMaxDim + 1) / 2];
    ricci_from_riemann(n, R, ric);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double v = 0.0;
        for (int k = 0; k < n; ++k) {
          for (int m = 0; m < n; ++m) {
            const double rk = gi[sym_index(n, k, m)];
            v += rk * ric[sym_index(n, m, i)] * H[sym_index(n, k, j)];
            v += rk * ric[sym_index(n, m, j)] * H[sym_index(n, i, k)];
          }
        }
        double t = 0.0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            for (int m = 0; m < n; ++m)
              t += gi[sym_index(n, k, l)] * H[sym_index(n, l, m)] * R[((m * n + j) * n + k) * n + i];
        o[sym_index(n, i, j)] += v - 2.0 * t;
      }
    }
  });
  return out;
}

PatchField einstein_operator(const PatchGrid& grid, const PatchField& g_bg, const PatchField& g) {
  if (g.rank != FieldRank::Sym2 || g_bg.rank != FieldRank::Sym2)
    throw std::invalid_argument("einstein_operator expects symmetric (0,2) fields");
  const GridCtx c(grid);
  const int n = c.n, ns = c.ns;
  const PatchField ginv_g = inverse_metric(grid, g);
  const PatchField gamma_g = christoffel_field(grid, g, ginv_g);
  const PatchField ric = ricci_fd(grid, g, ginv_g, gamma_g);
  const PatchField beta = bianchi_op(grid, g_bg, g);

  PatchField phi = PatchField::zeros(grid, FieldRank::Sym2, std::max(ric.margin, beta.margin + 1));
  const int margin = phi.margin;
  parallel_for(grid.num_points(), [&](std::size_t p) {
    int mi[kMaxDim];
    grid.multi_index(p, mi);
    if (!grid.interior(mi, margin)) return;
    const double* G = gamma_g.at(p);
    const double* B = beta.at(p);
    double* o = phi.at(p);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        // (L_X g)_{ij} with X = beta raised by g: nabla_i beta_j + nabla_j beta_i
        double lie = cdiff(beta, p, c.strides[i], j, c.inv2h[i]) +
                     cdiff(beta, p, c.strides[j], i, c.inv2h[j]);
        for (int m = 0; m < n; ++m) lie -= 2.0 * G[m * ns + sym_index(n, i, j)] * B[m];
        const int s = sym_index(n, i, j);
        o[s] = ric.data[p * ric.ncomp + s] + (n - 1.0) * g.data[p * g.ncomp + s] + 0.5 * lie;
      }
    }
  });
  return phi;
}

PatchField add_scaled(const PatchField& a, double cfac, const PatchField& b) {
  if (a.ncomp != b.ncomp || a.data.size() != b.data.size())
    throw std::invalid_argument("field shape mismatch");
  PatchField out = a;
  out.margin = std::max(a.margin, b.margin);
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = a.data[k] + cfac * b.data[k];
  return out;
}

double max_abs_interior(const PatchGrid& grid, const PatchField& f, int margin) {
  double best = 0.0;
  int mi[kMaxDim];
  for (std::size_t p = 0; p < grid.num_points(); ++p) {
    grid.multi_index(p, mi);
    if (!grid.interior(mi, margin)) continue;
    for (int k = 0; k < f.ncomp; ++k) best = std::max(best, std::abs(f.at(p)[k]));
  }
  return best;
}

double max_abs_diff_interior(const PatchGrid& grid, const PatchField& a, const PatchField& b,
                             int margin) {
  if (a.ncomp != b.ncomp) throw std::invalid_argument("field shape mismatch");
  double best = 0.0;
  int mi[kMaxDim];
  for (std::size_t p = 0; p < grid.num_points(); ++p) {
    grid.multi_index(p, mi);
    if (!grid.interior(mi, margin)) continue;
    for (int k = 0; k < a.ncomp; ++k) best = std::max(best, std::abs(a.at(p)[k] - b.at(p)[k]));
  }
  return best;
}

OperatorReport linearization_check(const PatchGrid& grid, const PatchField& g_bg,
                                   const PatchField& h, const std::vector<double>& steps,
                                   DiffScheme scheme) {
  if (steps.empty()) throw std::invalid_argument("linearization_check needs at least one step");
  std::vector<double> eps = steps;
  std::sort(eps.begin(), eps.end(), std::greater<double>());

  const PatchField lich = lichnerowicz(grid, g_bg, h);
  PatchField target = lich;
  for (std::size_t k = 0; k < target.data.size(); ++k)
    target.data[k] = 0.5 * lich.data[k] + (grid.dim - 1.0) * h.data[k];
  const int margin = std::max(target.margin, 2) + 1;

  PatchField phi0 = PatchField::zeros(grid, FieldRank::Sym2, 2);
  if (scheme == DiffScheme::OneSided) phi0 = einstein_operator(grid, g_bg, g_bg);

  std::vector<PatchField> derivs;
  derivs.reserve(eps.size());
  for (double e : eps) {
    const PatchField gp = add_scaled(g_bg, e, h);
    const PatchField phi_p = einstein_operator(grid, g_bg, gp);
    PatchField d = phi_p;
    if (scheme == DiffScheme::Centered) {
      const PatchField gm = add_scaled(g_bg, -e, h);
      const PatchField phi_m = einstein_operator(grid, g_bg, gm);
      for (std::size_t k = 0; k < d.data.size(); ++k)
        d.data[k] = (phi_p.data[k] - phi_m.data[k]) / (2.0 * e);
    } else {
      for (std::size_t k = 0; k < d.data.size(); ++k)
        d.data[k] = (phi_p.data[k] - phi0.data[k]) / e;
    }
    d.margin = margin;
    derivs.push_back(std::move(d));
  }

  OperatorReport rep;
  rep.pointwise_max_residual = max_abs_diff_interior(grid, derivs.back(), target, margin);

  // Order in eps from consecutive derivative differences: the spatial
  // discretization error is shared and cancels pointwise.
  std::vector<double> fit;
  for (std::size_t i = 0; i + 1 < derivs.size(); ++i) {
    const double dn = max_abs_diff_interior(grid, derivs[i], derivs[i + 1], margin);
    fit.push_back(dn);
  }
  double order_sum = 0.0;
  int order_cnt = 0;
  for (std::size_t i = 0; i + 1 < fit.size(); ++i) {
    if (fit[i] <= 0.0 || fit[i + 1] <= 0.0) continue;
    // model: |D(e_i) - D(e_{i+1})| ~ C e_i^p (1 - (e_{i+1}/e_i)^p)
    const double r_eps = eps[i] / eps[i + 1];
    order_sum += std::log(fit[i] / fit[i + 1]) / std::log(r_eps);
    ++order_cnt;
  }
  rep.convergence_order = order_cnt ? order_sum / order_cnt : std::nan("");
  return rep;
}

double sectional_from_riemann(const PatchGrid& grid, const PatchField& g,
                              const PatchField& riemann, std::size_t point, int i, int j) {
  const int n = grid.dim;
  const double* G = g.at(point);
  const double* R = riemann.at(point);
  double num = 0.0;
  for (int m = 0; m < n; ++m)
    num += G[sym_index(n, m, i)] * R[((m * n + j) * n + i) * n + j];
  const double gii = G[sym_index(n, i, i)], gjj = G[sym_index(n, j, j)],
               gij = G[sym_index(n, i, j)];
  return num / (gii * gjj - gij * gij);
}

double richardson2(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

MetricFn smooth_perturbation(const MetricFn& base, int n, unsigned seed, double amplitude) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int ns = n * (n + 1) / 2;
  std::vector<double> amp(ns), phase(ns), wave(n);
  for (auto& x : amp) x = amplitude * unif(rng);
  for (auto& x : phase) x = M_PI * unif(rng);
  for (auto& x : wave) x = 0.5 + 0.5 * unif(rng);
  return [base, n, amp, phase, wave](const double* y, double* out) {
    double gb[kMaxDim * (kMaxDim + 1) / 2];
    base(y, gb);
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += wave[k] * y[k];
    int c = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j, ++c) {
        const double scale = std::sqrt(gb[sym_index(n, i, i)] * gb[sym_index(n, j, j)]);
        out[sym_index(n, i, j)] = amp[c] * scale * std::sin(s + phase[c]);
      }
    }
  };
}

namespace {

// max |Ric + (n-1) g| either over the interior or at the center point
double einstein_residual(const PatchGrid& grid, const PatchField& g, bool center_only) {
  const int n = grid.dim;
  const PatchField ginv = inverse_metric(grid, g);
  const PatchField gamma = christoffel_field(grid, g, ginv);
  PatchField dev = ricci_fd(grid, g, ginv, gamma);
  for (std::size_t p = 0; p < grid.num_points(); ++p)
    for (int k = 0; k < dev.ncomp; ++k) dev.at(p)[k] += (n - 1.0) * g.at(p)[k];
  if (!center_only) return max_abs_interior(grid, dev, dev.margin);
  int mi[kMaxDim];
  for (int k = 0; k < n; ++k) mi[k] = grid.extents[k] / 2;
  const double* v = dev.at(grid.linear_index(mi));
  double best = 0.0;
  for (int k = 0; k < dev.ncomp; ++k) best = std::max(best, std::abs(v[k]));
  return best;
}

}  // namespace

SelfTestReport ansatz_selftest(const profiles::ProfileSpec& prof, int extent, double spacing) {
  const int n = prof.dim();
  std::vector<double> center(n, 0.0), sp(n, spacing);
  center[0] = prof.domain_lower() + 0.8;
  center[n - 1] = 1.5;
  const std::vector<int> ext(n, extent);

  SelfTestReport rep;
  const PatchGrid grid = PatchGrid::centered(center, sp, ext);
  const MetricFn chart = ansatz_metric(prof);
  const PatchField g = sample_metric(grid, chart);
  rep.ricci_einstein_residual = einstein_residual(grid, g, true);

  std::vector<double> sp2(n, 0.5 * spacing);
  const PatchGrid grid2 = PatchGrid::centered(center, sp2, ext);
  rep.ricci_einstein_residual_half = einstein_residual(grid2, sample_metric(grid2, chart), true);
  rep.convergence_order = rep.ricci_einstein_residual_half > 0.0
                              ? std::log2(rep.ricci_einstein_residual /
                                          rep.ricci_einstein_residual_half)
                              : 0.0;

  const PatchField beta = bianchi_op(grid, g, g);
  rep.bianchi_gauge_residual = max_abs_interior(grid, beta, beta.margin);
  const PatchField lg = lichnerowicz(grid, g, g);
  rep.lichnerowicz_metric_residual = max_abs_interior(grid, lg, lg.margin);

  const PatchField h = sample_sym2(grid, smooth_perturbation(chart, n, 12345));
  rep.linearization = linearization_check(grid, g, h, {0.2, 0.1, 0.05, 0.025});
  return rep;
}

AnsatzPointCurvature ansatz_curvature_at(const profiles::ProfileSpec& prof, double u0,
                                         double spacing, int extent) {
  const int n = prof.dim();
  require_dim(n);
  std::vector<double> center(n, 0.0), sp(n, spacing);
  center[0] = u0;
  center[n - 1] = 1.4;
  const PatchGrid grid = PatchGrid::centered(center, sp, std::vector<int>(n, extent));
  if (!(grid.origin[0] > prof.domain_lower()))
    throw std::domain_error("patch extends below the profile domain");

  const GridCtx c(grid);
  const PatchField g = sample_metric(grid, ansatz_metric(prof));
  const PatchField ginv = inverse_metric(grid, g);
  const PatchField gamma = christoffel_field(grid, g, ginv);

  int mi[kMaxDim];
  for (int k = 0; k < n; ++k) mi[k] = grid.extents[k] / 2;
  const std::size_t p = grid.linear_index(mi);
  std::vector<double> R(static_cast<std::size_t>(n) * n * n * n);
  riemann_at(c, gamma, p, R.data());
  double ric[kMaxDim * (kMaxDim + 1) / 2];
  ricci_from_riemann(n, R.data(), ric);

  const double* G = g.at(p);
  auto sec = [&](int i, int j) {
    double num = 0.0;
    for (int m = 0; m < n; ++m) num += G[sym_index(n, m, i)] * R[((m * n + j) * n + i) * n + j];
    const double gii = G[sym_index(n, i, i)], gjj = G[sym_index(n, j, j)],
                 gij = G[sym_index(n, i, j)];
    return num / (gii * gjj - gij * gij);
  };

  AnsatzPointCurvature out;
  out.k_base = sec(0, 1);
  out.k_mixed_u = sec(0, 2);
  out.k_mixed_theta = sec(1, 2);
  out.k_fiber = sec(2, 3);
  for (int i = 0; i < 3; ++i)
    out.ric_diag[i] = ric[sym_index(n, i, i)] / G[sym_index(n, i, i)];
  return out;
}

AnsatzPointCurvature ansatz_curvature_richardson(const profiles::ProfileSpec& prof, double u0,
                                                 double spacing, int extent) {
  const AnsatzPointCurvature coarse = ansatz_curvature_at(prof, u0, spacing, extent);
  const AnsatzPointCurvature fine = ansatz_curvature_at(prof, u0, 0.5 * spacing, extent);
  AnsatzPointCurvature out;
  out.k_base = richardson2(coarse.k_base, fine.k_base);
  out.k_mixed_u = richardson2(coarse.k_mixed_u, fine.k_mixed_u);
  out.k_mixed_theta = richardson2(coarse.k_mixed_theta, fine.k_mixed_theta);
  out.k_fiber = richardson2(coarse.k_fiber, fine.k_fiber);
  for (int i = 0; i < 3; ++i) out.ric_diag[i] = richardson2(coarse.ric_diag[i], fine.ric_diag[i]);
  return out;
}

void dump_csv(const PatchGrid& grid, const PatchField& f, const std::string& path, int axis0,
              int axis1) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path);
  std::fprintf(fp, "point");
  for (int k = 0; k < grid.dim; ++k) std::fprintf(fp, ",i%d", k);
  for (int k = 0; k < f.ncomp; ++k) std::fprintf(fp, ",c%d", k);
  std::fprintf(fp, "\n");
  int mi[kMaxDim];
  for (std::size_t p = 0; p < grid.num_points(); ++p) {
    grid.multi_index(p, mi);
    bool on_slice = true;
    for (int k = 0; k < grid.dim; ++k) {
      if (k == axis0 || k == axis1) continue;
      if (mi[k] != grid.extents[k] / 2) { on_slice = false; break; }
    }
    if (!on_slice) continue;
    std::fprintf(fp, "%zu", p);
    for (int k = 0; k < grid.dim; ++k) std::fprintf(fp, ",%d", mi[k]);
    for (int k = 0; k < f.ncomp; ++k) std::fprintf(fp, ",%.17g", f.at(p)[k]);
    std::fprintf(fp, "\n");
  }
  std::fclose(fp);
}

}  // namespace einglue::tensorlab
