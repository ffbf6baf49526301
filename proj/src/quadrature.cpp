#include "einglue/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace einglue {

double integrate(const std::function<double(double)>& fn, double a, double b, double rel_tol) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double error = 0.0, l1 = 0.0;
  const double value = GK::integrate(fn, a, b, 15, rel_tol, &error, &l1);
  // boost reports an absolute error estimate; compare against the scale of
  // the integral (L1 guards against cancellation)
  const double scale = std::max(std::abs(value), l1);
  if (scale > 0.0 && !(error <= 1e3 * rel_tol * scale)) {
    throw std::runtime_error("quadrature did not converge to the requested tolerance");
  }
  return value;
}

}  // namespace einglue
