#include "einglue/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace einglue::gluing {

GluedMetricSpec GluedMetricSpec::make(int n, int d, double U_glue) {
  const profiles::ConeAngleSolution sol = profiles::solve_cone_angle(n, d);
  GluedMetricSpec spec;
  spec.n = n;
  spec.d = d;
  spec.a = sol.a_of_d;
  spec.u_a = sol.u_of_d;
  spec.U_glue = U_glue;
  spec.cutoff = CutoffSpec::for_glue(U_glue);
  if (!(0.5 * U_glue > spec.u_a))
    throw std::invalid_argument("U_glue/2 must exceed the core radius u_a");
  return spec;
}

profiles::ProfileSpec glued_profile(const GluedMetricSpec& spec) {
  if (!(0.5 * spec.U_glue > spec.u_a))
    throw std::invalid_argument("U_glue/2 must exceed the core radius u_a");
  return profiles::ProfileSpec::glued(spec.n, spec.a, spec.cutoff);
}

namespace {

// max |E| with witness over a log-uniform grid on [lo, hi]
std::pair<double, double> max_err_on(const profiles::ProfileSpec& p, int n, double lo, double hi,
                                     int samples) {
  double best = -1.0, witness = lo;
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
    const double u = std::exp(llo + t * (lhi - llo));
    const double e = geometry::frame_err_norm(geometry::frame_curvature(p, n, u), n);
    if (e > best) { best = e; witness = u; }
  }
  return {best, witness};
}

}  // namespace

SupportCheck error_support_check(const GluedMetricSpec& spec, int samples) {
  const profiles::ProfileSpec p = glued_profile(spec);
  SupportCheck c;
  const auto inner = max_err_on(p, spec.n, p.domain_lower(), 0.5 * spec.U_glue, samples);
  const auto outer = max_err_on(p, spec.n, spec.U_glue, 4.0 * spec.U_glue, samples);
  c.max_err_inner = inner.first;
  c.witness_inner = inner.second;
  c.max_err_outer = outer.first;
  c.witness_outer = outer.second;
  c.support_ok = c.max_err_inner < 1e-10 && c.max_err_outer < 1e-10;
  return c;
}

double error_sup_norm(const GluedMetricSpec& spec, int samples) {
  if (samples < 100) throw std::invalid_argument("error_sup_norm needs samples >= 100");
  const profiles::ProfileSpec p = glued_profile(spec);
  return max_err_on(p, spec.n, 0.5 * spec.U_glue, spec.U_glue, samples).first;
}

double decay_exponent_fit(const std::vector<GluedMetricSpec>& family, int samples) {
  if (family.size() < 4) throw std::invalid_argument("decay fit needs >= 4 gluing parameters");
  double min_lu = 0.0, max_lu = 0.0;
  std::vector<double> lu, le;
  for (const auto& spec : family) {
    const double sup = error_sup_norm(spec, samples);
    if (!(sup > 0.0)) throw std::runtime_error("decay fit rejected: zero error norm in family");
    lu.push_back(std::log(spec.U_glue));
    le.push_back(std::log(sup));
  }
  min_lu = *std::min_element(lu.begin(), lu.end());
  max_lu = *std::max_element(lu.begin(), lu.end());
  if (max_lu - min_lu < 2.0 * std::log(10.0) - 1e-9)
    throw std::invalid_argument("decay fit needs U_glue spanning >= 2 decades");

  const std::size_t m = lu.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += lu[i];
    sy += le[i];
    sxx += lu[i] * lu[i];
    sxy += lu[i] * le[i];
  }
  const double denom = m * sxx - sx * sx;
  if (denom <= 0.0) throw std::runtime_error("decay fit degenerate");
  return (m * sxy - sx * sy) / denom;
}

namespace {

double max_sec_for(int n, int d, double a, double u_a, double U, int samples, double* witness) {
  GluedMetricSpec s;
  s.n = n; s.d = d; s.a = a; s.u_a = u_a; s.U_glue = U;
  s.cutoff = CutoffSpec::for_glue(U);
  const profiles::ProfileSpec p = glued_profile(s);
  const auto r = geometry::curvature_scan(p, n, u_a, 2.0 * U, samples);
  if (witness) *witness = r.u_max_sec;
  return r.max_sec;
}

}  // namespace

NegativityCertificate negativity_certificate(const GluedMetricSpec& spec, double u_cap,
                                             int samples) {
  if (!(u_cap >= spec.U_glue)) throw std::invalid_argument("u_cap must be >= U_glue");
  const profiles::ProfileSpec p = glued_profile(spec);
  NegativityCertificate cert;
  const auto scan = geometry::curvature_scan(p, spec.n, spec.u_a, u_cap, samples);
  cert.max_sec = scan.max_sec;
  cert.witness_u = scan.u_max_sec;
  if (!(cert.max_sec < 0.0)) return cert;
  if (spec.a == 0.0) return cert;  // hyperbolic at every U_glue, no threshold

  // Bisect downward for the smallest U_glue keeping all curvatures negative.
  double hi = spec.U_glue;                      // negative here
  double lo = 2.0 * spec.u_a * (1.0 + 1e-6);    // smallest admissible band
  if (max_sec_for(spec.n, spec.d, spec.a, spec.u_a, lo, samples, nullptr) < 0.0) {
    return cert;  // negative over the whole admissible range
  }
  for (int it = 0; it < 60 && hi / lo > 1.0 + 1e-9; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (max_sec_for(spec.n, spec.d, spec.a, spec.u_a, mid, samples, nullptr) < 0.0)
      hi = mid;
    else
      lo = mid;
  }
  cert.min_required_Uglue = hi;
  return cert;
}

std::pair<double, double> cutoff_shape_constants(int samples) {
  double k1 = 0.0, k2 = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(samples);
    double p, p1, p2;
    CutoffSpec::psi_jet(t, p, p1, p2);
    k1 = std::max(k1, std::abs(p1));
    k2 = std::max(k2, std::abs(p2));
  }
  return {k1, k2};
}

}  // namespace einglue::gluing
