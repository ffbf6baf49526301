#pragma once

#include <array>

#include "einglue/profiles.hpp"

namespace einglue::geometry {

// Curvature of g = du^2/V + V dtheta^2 + u^2 g_S in the orthonormal frame
// {sqrt(V) d_u, V^{-1/2} d_theta, u^{-1} (g_S-orthonormal fiber frame)},
// where (S, g_S) has constant curvature -1 and dim S = n-2.
struct FrameCurvature {
  double k_base = 0.0;   // plane span{e_u, e_theta}:        -V''/2
  double k_mixed = 0.0;  // plane span{e_u or e_theta, e_i}: -V'/(2u)
  double k_fiber = 0.0;  // plane inside the fiber:          (-1-V)/u^2
  std::array<double, 3> ric_diag{};  // Ricci on e_u, e_theta, fiber
  std::array<double, 3> err_diag{};  // Ric + (n-1), same order
};

FrameCurvature frame_curvature(const profiles::ProfileSpec& profile, int n, double u);

// |Ric + (n-1)g| in the orthonormal frame; the fiber eigenvalue enters with
// multiplicity n-2.
double frame_err_norm(const FrameCurvature& fc, int n);

// Generalized closed form for g = A(u) du^2 + B(u) dtheta^2 + C(u) g_S with
// metric coefficients given as u-jets (value, d/du, d^2/du^2). Reduces to
// frame_curvature when (A, B, C) = (1/V, V, u^2). Used for directional
// derivatives off the model family, where the perturbed metric keeps the
// warped form but A != 1/B.
struct WarpedJets {
  double A = 0.0, Ap = 0.0, App = 0.0;
  double B = 0.0, Bp = 0.0, Bpp = 0.0;
  double C = 0.0, Cp = 0.0, Cpp = 0.0;
};

struct GeneralFrameCurvature {
  double sec_rtheta = 0.0;
  double sec_rfiber = 0.0;
  double sec_thetafiber = 0.0;
  double sec_fiberfiber = 0.0;
  std::array<double, 3> ric_diag{};  // e_r, e_theta, fiber
  std::array<double, 3> err_diag{};
};

GeneralFrameCurvature frame_curvature_general(const WarpedJets& w, int n);

struct ScanResult {
  double min_sec = 0.0;
  double max_sec = 0.0;
  double max_err_norm = 0.0;
  double u_min_sec = 0.0;   // witness of min_sec
  double u_max_sec = 0.0;   // witness of max_sec
  double u_max_err = 0.0;   // witness of max_err_norm
};

// Extremes of {k_base, k_mixed, k_fiber} and of |E| over a log-uniform grid
// on [u_lo, u_hi].
ScanResult curvature_scan(const profiles::ProfileSpec& profile, int n, double u_lo, double u_hi,
                          int samples);

struct VolumeQuery {
  double U = 0.0;       // outer radius of the annulus {U/2 < u < U}
  int n = 0;
  int d = 1;            // branch degree; theta-period is 2*pi*d
  double vol_sigma = 0.0;
};

// Volume of {U/2 < u < U}: 2*pi*d*vol_sigma * Int u^{n-2} du by adaptive
// quadrature (the volume density of the ansatz is u^{n-2} du dtheta dvol_S).
double region_volume(const profiles::ProfileSpec& profile, const VolumeQuery& q);

}  // namespace einglue::geometry
