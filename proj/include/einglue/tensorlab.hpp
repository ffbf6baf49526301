#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "einglue/profiles.hpp"

namespace einglue::tensorlab {

inline constexpr int kMaxDim = 8;

// Rectangular coordinate patch. Row-major storage, last axis fastest.
struct PatchGrid {
  int dim = 0;
  std::vector<double> origin;
  std::vector<double> spacing;
  std::vector<int> extents;

  static PatchGrid centered(const std::vector<double>& center, const std::vector<double>& spacing,
                            const std::vector<int>& extents);

  std::size_t num_points() const;
  std::size_t stride(int axis) const;
  void multi_index(std::size_t idx, int* mi) const;
  std::size_t linear_index(const int* mi) const;
  void coords(const int* mi, double* y) const;
  bool interior(const int* mi, int margin) const;
};

enum class FieldRank { Scalar, Covector, Sym2, Riemann };

int rank_components(FieldRank rank, int dim);

// Component arrays over a grid. margin counts boundary layers whose values
// are not meaningful; every stencil operation widens it by one.
struct PatchField {
  FieldRank rank = FieldRank::Scalar;
  int dim = 0;
  int ncomp = 0;
  int margin = 0;
  std::vector<int> extents;
  std::vector<double> data;  // num_points * ncomp, point-major

  static PatchField zeros(const PatchGrid& grid, FieldRank rank, int margin = 0);

  double* at(std::size_t point) { return data.data() + static_cast<std::size_t>(ncomp) * point; }
  const double* at(std::size_t point) const {
    return data.data() + static_cast<std::size_t>(ncomp) * point;
  }
};

// Packed symmetric index: (i, j) with i <= j.
inline int sym_index(int n, int i, int j) {
  if (i > j) { const int t = i; i = j; j = t; }
  return i * n - i * (i - 1) / 2 + (j - i);
}

using MetricFn = std::function<void(const double* y, double* g_sym)>;

MetricFn flat_metric(int n);
// Coordinates (u, theta, x_1, ..., x_{n-2}); the fiber is hyperbolic
// upper-half space dx^2 / x_{n-2}^2, so patches must keep x_{n-2} > 0.
MetricFn ansatz_metric(const profiles::ProfileSpec& profile);

PatchField sample_metric(const PatchGrid& grid, const MetricFn& fn);
PatchField sample_sym2(const PatchGrid& grid, const MetricFn& fn);  // alias, any sym2-valued fn

// g^{-1} as a Sym2 field. Throws std::domain_error naming the first grid
// point (smallest linear index) where g is not positive definite.
PatchField inverse_metric(const PatchGrid& grid, const PatchField& g);

PatchField christoffel_field(const PatchGrid& grid, const PatchField& g, const PatchField& ginv);

struct CurvatureFields {
  PatchField christoffel;  // [a][sym(b,c)], margin +1
  PatchField riemann;      // R^d_{cab} full n^4 layout ((d*n+c)*n+a)*n+b, margin +2
  PatchField ricci;        // Sym2, margin +2
};

// Second-order central differences throughout; interior points only.
CurvatureFields curvature_fd(const PatchGrid& grid, const PatchField& g);

// Lean path: Ricci only, no stored Riemann.
PatchField ricci_fd(const PatchGrid& grid, const PatchField& g, const PatchField& ginv,
                    const PatchField& gamma);

// beta_bg(h) = -sum_i (nabla_{e_i} h)(., e_i) + 1/2 d tr_bg(h), with the
// connection and traces of the background metric.
PatchField bianchi_op(const PatchGrid& grid, const PatchField& g_bg, const PatchField& h);

// Lichnerowicz Laplacian: nabla*nabla h + Ric(h) with the Weitzenboeck action
//   Ric(h)(x,y) = h(Ric x, y) + h(x, Ric y) - 2 tr_g h(., R(., x) y).
PatchField lichnerowicz(const PatchGrid& grid, const PatchField& g_bg, const PatchField& h);

// Phi_bg(g) = Ric(g) + (n-1) g + 1/2 L_{(beta_bg(g))#} g, index raised with g.
PatchField einstein_operator(const PatchGrid& grid, const PatchField& g_bg, const PatchField& g);

enum class DiffScheme { Centered, OneSided };

struct OperatorReport {
  double pointwise_max_residual = 0.0;  // at the smallest step
  double convergence_order = 0.0;       // fitted from consecutive step pairs
};

// Compares the finite difference of eps -> Phi_bg(g_bg + eps h) against
// (1/2) Delta_L h + (n-1) h and fits the order of the step error.
OperatorReport linearization_check(const PatchGrid& grid, const PatchField& g_bg,
                                   const PatchField& h, const std::vector<double>& steps,
                                   DiffScheme scheme = DiffScheme::Centered);

// Field helpers
PatchField add_scaled(const PatchField& a, double c, const PatchField& b);  // a + c b
double max_abs_interior(const PatchGrid& grid, const PatchField& f, int margin);
double max_abs_diff_interior(const PatchGrid& grid, const PatchField& a, const PatchField& b,
                             int margin);

// Debug dump of a 2D slice (axes axis0/axis1 through the patch center):
// linear index, multi-index, then all components per row.
void dump_csv(const PatchGrid& grid, const PatchField& f, const std::string& path, int axis0 = 0,
              int axis1 = 1);

// Deterministic smooth symmetric field, componentwise scaled by the
// background so perturbed metrics stay positive definite.
MetricFn smooth_perturbation(const MetricFn& base, int n, unsigned seed, double amplitude = 0.05);

struct SelfTestReport {
  double ricci_einstein_residual = 0.0;
  double ricci_einstein_residual_half = 0.0;  // at half spacing
  double convergence_order = 0.0;
  double bianchi_gauge_residual = 0.0;
  double lichnerowicz_metric_residual = 0.0;
  OperatorReport linearization;
};

// Engine checks on an ansatz background patch: Einstein residual of the FD
// Ricci at two spacings, gauge vanishing, Delta_L g, and the linearization
// identity on a deterministic smooth perturbation. The convergence order is
// measured at the patch center so both spacings see the same point.
SelfTestReport ansatz_selftest(const profiles::ProfileSpec& prof, int extent, double spacing);

// Frame curvature of the ansatz chart at (u0, theta0, x0) computed purely by
// finite differences on a small patch: the FD oracle for the closed forms.
struct AnsatzPointCurvature {
  double k_base = 0.0;        // plane (e_u, e_theta)
  double k_mixed_u = 0.0;     // plane (e_u, fiber)
  double k_mixed_theta = 0.0; // plane (e_theta, fiber)
  double k_fiber = 0.0;       // plane (fiber, fiber)
  std::array<double, 3> ric_diag{};  // e_u, e_theta, fiber
};

AnsatzPointCurvature ansatz_curvature_at(const profiles::ProfileSpec& prof, double u0,
                                         double spacing, int extent = 5);

// Same, Richardson-extrapolated from spacings s and s/2.
AnsatzPointCurvature ansatz_curvature_richardson(const profiles::ProfileSpec& prof, double u0,
                                                 double spacing, int extent = 5);

// Sectional curvature of the coordinate plane (i, j) at a point, from a
// Riemann field and the metric (orthogonalized within the plane).
double sectional_from_riemann(const PatchGrid& grid, const PatchField& g,
                              const PatchField& riemann, std::size_t point, int i, int j);

double richardson2(double coarse, double fine);  // (4 fine - coarse) / 3

}  // namespace einglue::tensorlab
