#include "einglue/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "einglue/quadrature.hpp"

namespace einglue::geometry {

FrameCurvature frame_curvature(const profiles::ProfileSpec& profile, int n, double u) {
  if (n < 4) throw std::domain_error("dimension must satisfy n >= 4");
  // Inclusive at the lower end (every entry stays finite at u = u_a), with a
  // one-ulp-scale allowance for roots produced by different solvers.
  if (!(u >= profile.domain_lower() * (1.0 - 1e-12)))
    throw std::domain_error("u below the profile domain");
  const profiles::ProfileEval e = profile.eval(u);
  FrameCurvature fc;
  fc.k_base = -0.5 * e.Vpp;
  fc.k_mixed = -0.5 * e.Vp / u;
  fc.k_fiber = (-1.0 - e.V) / (u * u);
  const double nf = static_cast<double>(n);
  fc.ric_diag[0] = fc.k_base + (nf - 2.0) * fc.k_mixed;  // e_u
  fc.ric_diag[1] = fc.k_base + (nf - 2.0) * fc.k_mixed;  // e_theta
  fc.ric_diag[2] = 2.0 * fc.k_mixed + (nf - 3.0) * fc.k_fiber;
  // Ric + (n-1) with the hyperbolic part cancelled symbolically: writing
  // V = u^2 - 1 + D gives
  //   err_u = err_theta = -D''/2 - (n-2) D'/(2u)
  //   err_fiber         = -D'/u - (n-3) D/u^2,
  // which avoids absorbing |E| ~ u^{1-n} into O(n) Ricci terms.
  const profiles::DeviationEval dev = profile.deviation(u);
  fc.err_diag[0] = -0.5 * dev.Dpp - (nf - 2.0) * 0.5 * dev.Dp / u;
  fc.err_diag[1] = fc.err_diag[0];
  fc.err_diag[2] = -dev.Dp / u - (nf - 3.0) * dev.D / (u * u);
  return fc;
}

double frame_err_norm(const FrameCurvature& fc, int n) {
  // scaled three-term hypot: the entries can sit near the underflow range
  const double m = std::sqrt(static_cast<double>(n - 2));
  return std::hypot(fc.err_diag[0], fc.err_diag[1], m * fc.err_diag[2]);
}

GeneralFrameCurvature frame_curvature_general(const WarpedJets& w, int n) {
  if (n < 4) throw std::domain_error("dimension must satisfy n >= 4");
  if (!(w.A > 0.0 && w.B > 0.0 && w.C > 0.0))
    throw std::domain_error("warped coefficients must be positive");
  const double nf = static_cast<double>(n);

  // Arclength reparametrization dr = sqrt(A) du: for a coefficient X(u),
  //   X'_r  = X_u / sqrt(A)
  //   X''_r = X_uu / A - X_u A' / (2 A^2)
  const auto sqrt_jet = [](double x, double x1, double x2, double& s, double& s1, double& s2) {
    s = std::sqrt(x);
    s1 = 0.5 * x1 / s;
    s2 = 0.5 * x2 / s - 0.25 * x1 * x1 / (x * s);
  };
  double f, f_u, f_uu, h, h_u, h_uu;
  sqrt_jet(w.B, w.Bp, w.Bpp, f, f_u, f_uu);
  sqrt_jet(w.C, w.Cp, w.Cpp, h, h_u, h_uu);

  const double fp = f_u / std::sqrt(w.A);
  const double fpp = f_uu / w.A - 0.5 * f_u * w.Ap / (w.A * w.A);
  const double hp = h_u / std::sqrt(w.A);
  const double hpp = h_uu / w.A - 0.5 * h_u * w.Ap / (w.A * w.A);

  GeneralFrameCurvature gc;
  gc.sec_rtheta = -fpp / f;
  gc.sec_rfiber = -hpp / h;
  gc.sec_thetafiber = -fp * hp / (f * h);
  gc.sec_fiberfiber = (-1.0 - hp * hp) / (h * h);
  gc.ric_diag[0] = gc.sec_rtheta + (nf - 2.0) * gc.sec_rfiber;
  gc.ric_diag[1] = gc.sec_rtheta + (nf - 2.0) * gc.sec_thetafiber;
  gc.ric_diag[2] = gc.sec_rfiber + gc.sec_thetafiber + (nf - 3.0) * gc.sec_fiberfiber;
  for (int i = 0; i < 3; ++i) gc.err_diag[i] = gc.ric_diag[i] + (nf - 1.0);
  return gc;
}

ScanResult curvature_scan(const profiles::ProfileSpec& profile, int n, double u_lo, double u_hi,
                          int samples) {
  if (!(u_hi > u_lo) || samples < 2) throw std::domain_error("curvature_scan: empty range");
  if (!(u_lo >= profile.domain_lower() * (1.0 - 1e-12)))
    throw std::domain_error("curvature_scan: range below profile domain");

  ScanResult r;
  bool first = true;
  const double log_lo = std::log(u_lo), log_hi = std::log(u_hi);
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
    const double u = std::exp(log_lo + t * (log_hi - log_lo));
    const FrameCurvature fc = frame_curvature(profile, n, u);
    const double ks[3] = {fc.k_base, fc.k_mixed, fc.k_fiber};
    for (double k : ks) {
      if (first || k < r.min_sec) { r.min_sec = k; r.u_min_sec = u; }
      if (first || k > r.max_sec) { r.max_sec = k; r.u_max_sec = u; }
      first = false;
    }
    const double err = frame_err_norm(fc, n);
    if (err > r.max_err_norm || i == 0) { r.max_err_norm = err; r.u_max_err = u; }
  }
  return r;
}

double region_volume(const profiles::ProfileSpec& profile, const VolumeQuery& q) {
  if (q.n < 4) throw std::domain_error("dimension must satisfy n >= 4");
  if (q.d < 1) throw std::domain_error("branch degree must be >= 1");
  if (!(q.vol_sigma >= 0.0)) throw std::domain_error("vol_sigma must be >= 0");
  if (!(0.5 * q.U >= profile.domain_lower() * (1.0 - 1e-12)))
    throw std::domain_error("region_volume: U/2 must reach the profile domain lower bound");
  if (q.vol_sigma == 0.0) return 0.0;
  // det g = u^{2(n-2)} det g_S independently of V (the du^2 and dtheta^2
  // factors cancel), so the radial density is u^{n-2}.
  const int n = q.n;
  const double integral =
      integrate([n](double u) { return std::pow(u, n - 2); }, 0.5 * q.U, q.U, 1e-10);
  return 2.0 * M_PI * static_cast<double>(q.d) * q.vol_sigma * integral;
}

}  // namespace einglue::geometry
