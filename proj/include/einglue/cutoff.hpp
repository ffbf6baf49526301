#pragma once

#include <cmath>
#include <stdexcept>

namespace einglue::gluing {

// Smooth transition chi(u): identically 1 for u <= lower, identically 0 for
// u >= upper. Shape is the exponential smoothstep
//   psi(t) = B(t) / (B(t) + B(1-t)),  B(t) = exp(-1/t) for t > 0, else 0,
// applied as chi(u) = psi((upper - u) / (upper - lower)). The endpoint values
// are returned as exact 0/1 (no tolerance), so a profile built with this
// cutoff matches its two sides bit-for-bit outside the transition band.
struct CutoffSpec {
  double lower = 0.0;
  double upper = 0.0;

  CutoffSpec() = default;
  CutoffSpec(double lo, double hi) : lower(lo), upper(hi) {
    if (!(hi > lo)) throw std::invalid_argument("CutoffSpec: upper must exceed lower");
  }

  // Transition band [U_glue/2, U_glue].
  static CutoffSpec for_glue(double u_glue) { return CutoffSpec(0.5 * u_glue, u_glue); }

  static double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

  // psi and its first two derivatives on [0, 1]; exact constants outside.
  static void psi_jet(double t, double& p, double& p1, double& p2) {
    if (t <= 0.0) { p = 0.0; p1 = 0.0; p2 = 0.0; return; }
    if (t >= 1.0) { p = 1.0; p1 = 0.0; p2 = 0.0; return; }
    const double B = bump(t);
    const double s = 1.0 - t;
    const double C = bump(s);
    const double B1 = B / (t * t);
    const double B2 = B * (1.0 / (t * t * t * t) - 2.0 / (t * t * t));
    const double C1 = -(C / (s * s));
    const double C2 = C * (1.0 / (s * s * s * s) - 2.0 / (s * s * s));
    const double den = B + C;
    const double num1 = B1 * C - B * C1;
    p = B / den;
    p1 = num1 / (den * den);
    p2 = ((B2 * C - B * C2) * den - 2.0 * num1 * (B1 + C1)) / (den * den * den);
  }

  double chi(double u) const {
    double p, p1, p2;
    psi_jet((upper - u) / (upper - lower), p, p1, p2);
    return p;
  }

  // chi, chi', chi'' in one evaluation
  void chi_jet(double u, double& c, double& c1, double& c2) const {
    const double inv = 1.0 / (upper - lower);
    double p, p1, p2;
    psi_jet((upper - u) * inv, p, p1, p2);
    c = p;
    c1 = -p1 * inv;
    c2 = p2 * inv * inv;
  }
};

}  // namespace einglue::gluing
