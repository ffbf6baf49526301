#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "einglue/geometry.hpp"
#include "einglue/gluing.hpp"
#include "einglue/jet.hpp"
#include "einglue/tensorlab.hpp"
#include "oracles.hpp"

using namespace einglue;
using namespace einglue::tensorlab;
using profiles::ProfileSpec;

namespace {

PatchGrid hyperbolic_grid(int n, int extent, double spacing, double u0 = 1.8) {
  std::vector<double> center(n, 0.0), sp(n, spacing);
  center[0] = u0;
  center[n - 1] = 1.5;
  return PatchGrid::centered(center, sp, std::vector<int>(n, extent));
}

}  // namespace

TEST_CASE("jet arithmetic matches finite differences") {
  auto f = [](double x) {
    Jet2 j = Jet2::variable(x);
    return (j * j - 1.0 + 0.3 * pow(j, -2.5)) / (2.0 + sqrt(j));
  };
  auto fv = [&](double x) { return f(x).v; };
  for (double x : {0.7, 1.3, 2.9}) {
    const Jet2 j = f(x);
    CHECK(j.d1 == doctest::Approx(oracles::fd1(fv, x, 1e-5)).epsilon(1e-8));
    CHECK(j.d2 == doctest::Approx(oracles::fd2(fv, x, 1e-4)).epsilon(1e-6));
  }
}

TEST_CASE("flat patch: exactly zero curvature") {
  const PatchGrid grid = hyperbolic_grid(4, 5, 0.1);
  const PatchField g = sample_metric(grid, flat_metric(4));
  const CurvatureFields cf = curvature_fd(grid, g);
  CHECK(max_abs_interior(grid, cf.christoffel, cf.christoffel.margin) == 0.0);
  CHECK(max_abs_interior(grid, cf.riemann, cf.riemann.margin) == 0.0);
  CHECK(max_abs_interior(grid, cf.ricci, cf.ricci.margin) == 0.0);
}

TEST_CASE("hyperbolic patch: sectional curvature -1 to stencil error") {
  const int n = 4;
  const double s = 0.04;
  const PatchGrid grid = hyperbolic_grid(n, 5, s);
  const PatchField g = sample_metric(grid, ansatz_metric(ProfileSpec::hyperbolic(n)));
  const CurvatureFields cf = curvature_fd(grid, g);
  int mi[kMaxDim];
  for (int k = 0; k < n; ++k) mi[k] = grid.extents[k] / 2;
  const std::size_t p = grid.linear_index(mi);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      CHECK(sectional_from_riemann(grid, g, cf.riemann, p, i, j) ==
            doctest::Approx(-1.0).epsilon(5.0 * s * s));
}

TEST_CASE("model patch: Ricci = -(n-1) g to stencil error") {
  const int n = 4;
  const auto sol = profiles::solve_cone_angle(n, 2);
  const auto prof = ProfileSpec::model(n, sol.a_of_d);
  const double s = 0.03;
  std::vector<double> center(n, 0.0), sp(n, s);
  center[0] = sol.u_of_d + 0.6;
  center[n - 1] = 1.5;
  const PatchGrid grid = PatchGrid::centered(center, sp, std::vector<int>(n, 7));
  const PatchField g = sample_metric(grid, ansatz_metric(prof));
  const CurvatureFields cf = curvature_fd(grid, g);
  PatchField dev = cf.ricci;
  for (std::size_t pt = 0; pt < grid.num_points(); ++pt)
    for (int k = 0; k < dev.ncomp; ++k) dev.at(pt)[k] += (n - 1.0) * g.at(pt)[k];
  CHECK(max_abs_interior(grid, dev, dev.margin) < 0.05);  // O(s^2) * derivative scale
}

TEST_CASE("first Bianchi identity to stencil error") {
  const int n = 4;
  const PatchGrid grid = hyperbolic_grid(n, 5, 0.04);
  // a deliberately non-ansatz smooth metric: flat plus a smooth bump
  const MetricFn bumped = [n](const double* y, double* g) {
    flat_metric(n)(y, g);
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += y[k] * 0.7;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        g[sym_index(n, i, j)] += 0.1 * std::sin(s + 0.3 * (i + 2 * j));
  };
  const PatchField g = sample_metric(grid, bumped);
  const CurvatureFields cf = curvature_fd(grid, g);
  int mi[kMaxDim];
  double worst = 0.0;
  for (std::size_t p = 0; p < grid.num_points(); ++p) {
    grid.multi_index(p, mi);
    if (!grid.interior(mi, cf.riemann.margin)) continue;
    const double* R = cf.riemann.at(p);
    for (int d2 = 0; d2 < n; ++d2)
      for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const double cyc = R[((d2 * n + c) * n + a) * n + b] +
                               R[((d2 * n + a) * n + b) * n + c] +
                               R[((d2 * n + b) * n + c) * n + a];
            worst = std::max(worst, std::abs(cyc));
          }
  }
  CHECK(worst < 5e-3);  // pure stencil error; each term is O(1)
}

TEST_CASE("bianchi operator") {
  const int n = 4;
  const PatchGrid grid = hyperbolic_grid(n, 7, 0.05);
  const MetricFn chart = ansatz_metric(ProfileSpec::hyperbolic(n));
  const PatchField g = sample_metric(grid, chart);

  SUBCASE("gauge vanishes at the background") {
    const PatchField beta = bianchi_op(grid, g, g);
    CHECK(max_abs_interior(grid, beta, beta.margin) < 1e-12);
  }
  SUBCASE("conformal direction: beta(f g) = (n/2 - 1) df") {
    auto ffun = [](const double* y) {
      return 0.3 * std::sin(0.8 * y[0] + 0.5 * y[1] + 0.4 * y[2] + 0.6 * y[3]) + 1.0;
    };
    const MetricFn fg = [&](const double* y, double* out) {
      chart(y, out);
      const double f = ffun(y);
      for (int k = 0; k < n * (n + 1) / 2; ++k) out[k] *= f;
    };
    const PatchField h = sample_sym2(grid, fg);
    const PatchField beta = bianchi_op(grid, g, h);
    // exact df
    const double w[4] = {0.8, 0.5, 0.4, 0.6};
    int mi[kMaxDim];
    double y[kMaxDim];
    double worst = 0.0;
    for (std::size_t p = 0; p < grid.num_points(); ++p) {
      grid.multi_index(p, mi);
      if (!grid.interior(mi, beta.margin)) continue;
      grid.coords(mi, y);
      const double c = 0.3 * std::cos(0.8 * y[0] + 0.5 * y[1] + 0.4 * y[2] + 0.6 * y[3]);
      for (int j = 0; j < n; ++j) {
        const double want = (0.5 * n - 1.0) * c * w[j];
        worst = std::max(worst, std::abs(beta.at(p)[j] - want));
      }
    }
    CHECK(worst < 2e-3);  // stencil error
  }
  SUBCASE("self-convergence order ~2 on a random smooth field") {
    const MetricFn hfn = smooth_perturbation(chart, n, 99);
    std::vector<double> errs;
    double prev_center[kMaxDim];
    (void)prev_center;
    std::vector<double> centers;
    for (double s : {0.08, 0.04, 0.02}) {
      const PatchGrid gr = hyperbolic_grid(n, 7, s);
      const PatchField gg = sample_metric(gr, chart);
      const PatchField hh = sample_sym2(gr, hfn);
      const PatchField beta = bianchi_op(gr, gg, hh);
      int mi[kMaxDim];
      for (int k = 0; k < n; ++k) mi[k] = gr.extents[k] / 2;
      centers.push_back(beta.at(gr.linear_index(mi))[0]);
    }
    const double d1 = std::abs(centers[0] - centers[1]);
    const double d2 = std::abs(centers[1] - centers[2]);
    CHECK(std::log2(d1 / d2) == doctest::Approx(2.0).epsilon(0.2));
  }
  SUBCASE("rank mismatch rejected") {
    PatchField covec = PatchField::zeros(grid, FieldRank::Covector, 0);
    CHECK_THROWS_AS(bianchi_op(grid, g, covec), std::invalid_argument);
  }
}

TEST_CASE("lichnerowicz laplacian") {
  const int n = 4;
  const PatchGrid grid = hyperbolic_grid(n, 7, 0.05);
  const MetricFn chart = ansatz_metric(ProfileSpec::hyperbolic(n));
  const PatchField g = sample_metric(grid, chart);

  SUBCASE("Delta_L g = 0 on any background") {
    const PatchField lg = lichnerowicz(grid, g, g);
    CHECK(max_abs_interior(grid, lg, lg.margin) < 1e-12);
    // also on a non-Einstein background
    const MetricFn warped = [n](const double* y, double* out) {
      flat_metric(n)(y, out);
      const double f = 1.0 + 0.2 * std::sin(y[0] + 0.5 * y[1]) * std::cos(0.3 * y[2] + y[3]);
      for (int k = 0; k < n * (n + 1) / 2; ++k) out[k] *= f;
    };
    const PatchField gw = sample_metric(grid, warped);
    const PatchField lw = lichnerowicz(grid, gw, gw);
    // generic background: the discrete pair symmetry of Riemann only holds
    // to stencil error, so this residual is O(spacing^2), not rounding
    CHECK(max_abs_interior(grid, lw, lw.margin) < 5e-4);
  }
  SUBCASE("constant field on a flat patch maps to zero") {
    const PatchField gf = sample_metric(grid, flat_metric(n));
    PatchField h = PatchField::zeros(grid, FieldRank::Sym2, 0);
    for (std::size_t p = 0; p < grid.num_points(); ++p) {
      h.at(p)[sym_index(n, 0, 1)] = 0.7;
      h.at(p)[sym_index(n, 2, 2)] = -0.4;
    }
    const PatchField lh = lichnerowicz(grid, gf, h);
    CHECK(max_abs_interior(grid, lh, lh.margin) == 0.0);
  }
}

TEST_CASE("einstein operator") {
  const int n = 4;
  SUBCASE("zero at Einstein backgrounds") {
    for (bool model : {false, true}) {
      const ProfileSpec prof =
          model ? ProfileSpec::model(n, profiles::solve_cone_angle(n, 2).a_of_d)
                : ProfileSpec::hyperbolic(n);
      std::vector<double> center(n, 0.0), sp(n, 0.04);
      center[0] = prof.domain_lower() + 0.8;
      center[n - 1] = 1.5;
      const PatchGrid grid = PatchGrid::centered(center, sp, std::vector<int>(n, 7));
      const PatchField g = sample_metric(grid, ansatz_metric(prof));
      const PatchField phi = einstein_operator(grid, g, g);
      CHECK(max_abs_interior(grid, phi, phi.margin) < 0.05);  // O(s^2) stencil
    }
  }
  SUBCASE("glued background matches the closed-form error tensor") {
    const auto spec = gluing::GluedMetricSpec::make(n, 2, 8.0);
    const auto prof = gluing::glued_profile(spec);
    const double u0 = 6.0;  // inside the band
    std::vector<double> center(n, 0.0);
    center[0] = u0;
    center[n - 1] = 1.5;
    auto phi_center = [&](double s) {
      const PatchGrid grid = PatchGrid::centered(center, {s, s, s, s}, {7, 7, 7, 7});
      const PatchField g = sample_metric(grid, ansatz_metric(prof));
      const PatchField phi = einstein_operator(grid, g, g);
      int mi[kMaxDim];
      for (int k = 0; k < n; ++k) mi[k] = grid.extents[k] / 2;
      const std::size_t p = grid.linear_index(mi);
      std::array<double, 3> out{};  // uu, theta-theta, fiber-fiber in frame
      const double* G = g.at(p);
      out[0] = phi.at(p)[sym_index(n, 0, 0)] / G[sym_index(n, 0, 0)];
      out[1] = phi.at(p)[sym_index(n, 1, 1)] / G[sym_index(n, 1, 1)];
      out[2] = phi.at(p)[sym_index(n, 2, 2)] / G[sym_index(n, 2, 2)];
      return out;
    };
    const auto coarse = phi_center(0.06), fine = phi_center(0.03);
    const auto fc = geometry::frame_curvature(prof, n, u0);
    for (int i = 0; i < 3; ++i) {
      const double fd = richardson2(coarse[i], fine[i]);
      CHECK(fd == doctest::Approx(fc.err_diag[i]).epsilon(1e-3).scale(1e-5));
    }
  }
  SUBCASE("gauge term vanishes when g equals the background") {
    // beta_bg(bg) = 0, so Phi(bg) is Ric + (n-1) g alone; compare against the
    // operator assembled without the gauge term
    const ProfileSpec prof = ProfileSpec::hyperbolic(n);
    const PatchGrid grid = hyperbolic_grid(n, 7, 0.05);
    const PatchField g = sample_metric(grid, ansatz_metric(prof));
    const PatchField ginv = inverse_metric(grid, g);
    const PatchField gamma = christoffel_field(grid, g, ginv);
    PatchField bare = ricci_fd(grid, g, ginv, gamma);
    for (std::size_t p = 0; p < grid.num_points(); ++p)
      for (int k = 0; k < bare.ncomp; ++k) bare.at(p)[k] += (n - 1.0) * g.at(p)[k];
    const PatchField phi = einstein_operator(grid, g, g);
    CHECK(max_abs_diff_interior(grid, phi, bare, phi.margin) < 1e-11);
  }
  SUBCASE("non positive definite input names the first failing point") {
    const PatchGrid grid = hyperbolic_grid(n, 5, 0.05);
    PatchField g = sample_metric(grid, flat_metric(n));
    g.at(3)[sym_index(n, 0, 0)] = -1.0;
    try {
      const PatchField phi = einstein_operator(grid, g, g);
      FAIL("expected a domain error");
    } catch (const std::domain_error& e) {
      CHECK(std::string(e.what()).find("grid point 3") != std::string::npos);
    }
  }
}

TEST_CASE("linearization identity") {
  const int n = 4;
  SUBCASE("centered differences, hyperbolic and model backgrounds") {
    for (bool model : {false, true}) {
      const ProfileSpec prof =
          model ? ProfileSpec::model(n, profiles::solve_cone_angle(n, 2).a_of_d)
                : ProfileSpec::hyperbolic(n);
      const auto rep = ansatz_selftest(prof, 9, 0.05);
      CHECK(rep.linearization.convergence_order > 1.7);
      CHECK(rep.linearization.convergence_order < 2.3);
      CHECK(rep.linearization.pointwise_max_residual < 0.01);
      CHECK(rep.bianchi_gauge_residual < 1e-12);
      CHECK(rep.lichnerowicz_metric_residual < 1e-12);
    }
  }
  SUBCASE("one-sided differences fit order ~1") {
    const ProfileSpec prof = ProfileSpec::hyperbolic(n);
    const PatchGrid grid = hyperbolic_grid(n, 7, 0.05);
    const MetricFn chart = ansatz_metric(prof);
    const PatchField g = sample_metric(grid, chart);
    const PatchField h = sample_sym2(grid, smooth_perturbation(chart, n, 5));
    const auto rep = linearization_check(grid, g, h, {0.2, 0.1, 0.05, 0.025},
                                         DiffScheme::OneSided);
    CHECK(rep.convergence_order == doctest::Approx(1.0).epsilon(0.25));
  }
  SUBCASE("conformal ray: derivative is (n-1) g") {
    const ProfileSpec prof = ProfileSpec::hyperbolic(n);
    const PatchGrid grid = hyperbolic_grid(n, 7, 0.05);
    const PatchField g = sample_metric(grid, ansatz_metric(prof));
    const auto rep = linearization_check(grid, g, g, {0.2, 0.1, 0.05});
    // Phi((1+eps) g) is linear in eps, so the residual is pure stencil noise
    CHECK(rep.pointwise_max_residual < 1e-10);
  }
  SUBCASE("zero perturbation gives exact zero") {
    const ProfileSpec prof = ProfileSpec::hyperbolic(n);
    const PatchGrid grid = hyperbolic_grid(n, 7, 0.05);
    const PatchField g = sample_metric(grid, ansatz_metric(prof));
    const PatchField h = PatchField::zeros(grid, FieldRank::Sym2, 0);
    const auto rep = linearization_check(grid, g, h, {0.1, 0.05});
    CHECK(rep.pointwise_max_residual == 0.0);
  }
}

TEST_CASE("cross-oracle: finite differences vs closed forms") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int n : {4, 5}) {
    for (int trial = 0; trial < 4; ++trial) {
      const double a_max = profiles::a_max_and_v(n).first;
      const double a = (2.0 * unif(rng) - 1.0) * 0.9 * a_max;
      const auto prof = ProfileSpec::model(n, a);
      const double u0 = prof.domain_lower() + 0.5 + 1.5 * unif(rng);
      const auto fd = ansatz_curvature_richardson(prof, u0, 0.015, 5);
      const auto cf = geometry::frame_curvature(prof, n, u0);
      CHECK(fd.k_base == doctest::Approx(cf.k_base).epsilon(1e-6));
      CHECK(fd.k_mixed_u == doctest::Approx(cf.k_mixed).epsilon(1e-6));
      CHECK(fd.k_mixed_theta == doctest::Approx(cf.k_mixed).epsilon(1e-6));
      CHECK(fd.k_fiber == doctest::Approx(cf.k_fiber).epsilon(1e-6));
      for (int i = 0; i < 3; ++i)
        CHECK(fd.ric_diag[i] == doctest::Approx(cf.ric_diag[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("kernel direction: linearized error vanishes along the family") {
  // The straight line g_a + eps * (d/da g_a) leaves the Einstein family at
  // second order, so the centered difference of the error tensor across
  // +-eps scales as eps^2.
  for (int n : {4, 5}) {
    const double a = profiles::solve_cone_angle(n, 2).a_of_d;
    const auto prof = ProfileSpec::model(n, a);
    const double expo = static_cast<double>(3 - n);

    auto err_along_line = [&](double eps, double u) {
      auto side = [&](double sgn) {
        const Jet2 ju = Jet2::variable(u);
        const Jet2 V = ju * ju - 1.0 + a * pow(ju, expo);
        const Jet2 w = pow(ju, expo);
        const Jet2 A = 1.0 / V - (sgn * eps) * w / (V * V);
        const Jet2 B = V + (sgn * eps) * w;
        const Jet2 C = ju * ju;
        geometry::WarpedJets wj{A.v, A.d1, A.d2, B.v, B.d1, B.d2, C.v, C.d1, C.d2};
        return geometry::frame_curvature_general(wj, n).err_diag;
      };
      const auto ep = side(1.0), em = side(-1.0);
      double worst = 0.0;
      for (int i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs((ep[i] - em[i]) / (2.0 * eps)));
      return worst;
    };

    // small eps keeps the line inside the positivity region near the root,
    // where w/V^2 makes the relative perturbation largest
    std::vector<double> le, lr;
    for (double eps : {0.05, 0.025, 0.0125, 0.00625}) {
      double worst = 0.0;
      for (double u = prof.domain_lower() + 0.2; u < 6.0; u += 0.25)
        worst = std::max(worst, err_along_line(eps, u));
      le.push_back(std::log(eps));
      lr.push_back(std::log(worst));
    }
    const double slope = oracles::fit_slope(le, lr);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("grid and field plumbing") {
  SUBCASE("grid too small for the stencil") {
    CHECK_THROWS_AS(PatchGrid::centered({1.5, 0.0, 0.0, 1.5}, {0.1, 0.1, 0.1, 0.1}, {3, 5, 5, 5}),
                    std::invalid_argument);
  }
  SUBCASE("csv dump") {
    const PatchGrid grid = hyperbolic_grid(4, 5, 0.1);
    const PatchField g = sample_metric(grid, flat_metric(4));
    const std::string path = "patch_dump_test.csv";
    dump_csv(grid, g, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header.substr(0, 5) == "point");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 25);  // 5x5 slice
    std::remove(path.c_str());
  }
}
