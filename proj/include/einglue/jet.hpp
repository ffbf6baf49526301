#pragma once

#include <cmath>

namespace einglue {

// Second-order jet: carries (f, f', f'') through arithmetic, so coefficient
// functions built by composition report exact derivatives.
struct Jet2 {
  double v = 0.0;   // value
  double d1 = 0.0;  // first derivative
  double d2 = 0.0;  // second derivative

  static Jet2 constant(double c) { return {c, 0.0, 0.0}; }
  static Jet2 variable(double x) { return {x, 1.0, 0.0}; }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.d1, -a.d2}; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  const double w = 1.0 / b.v;
  const double q = a.v * w;
  const double q1 = (a.d1 - q * b.d1) * w;
  const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) * w;
  return {q, q1, q2};
}

inline Jet2 operator+(const Jet2& a, double c) { return {a.v + c, a.d1, a.d2}; }
inline Jet2 operator+(double c, const Jet2& a) { return a + c; }
inline Jet2 operator-(const Jet2& a, double c) { return {a.v - c, a.d1, a.d2}; }
inline Jet2 operator-(double c, const Jet2& a) { return {c - a.v, -a.d1, -a.d2}; }
inline Jet2 operator*(const Jet2& a, double c) { return {a.v * c, a.d1 * c, a.d2 * c}; }
inline Jet2 operator*(double c, const Jet2& a) { return a * c; }
inline Jet2 operator/(const Jet2& a, double c) { return a * (1.0 / c); }
inline Jet2 operator/(double c, const Jet2& a) { return Jet2::constant(c) / a; }

// x^p for real exponent, x > 0
inline Jet2 pow(const Jet2& a, double p) {
  const double f = std::pow(a.v, p);
  const double fp = p * std::pow(a.v, p - 1.0);
  const double fpp = p * (p - 1.0) * std::pow(a.v, p - 2.0);
  return {f, fp * a.d1, fpp * a.d1 * a.d1 + fp * a.d2};
}

inline Jet2 sqrt(const Jet2& a) { return pow(a, 0.5); }

}  // namespace einglue
