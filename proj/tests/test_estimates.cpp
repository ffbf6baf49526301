#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "einglue/estimates.hpp"
#include "oracles.hpp"

using namespace einglue;
using namespace einglue::estimates;

namespace {

ScenarioInputs scenario(int n, int d, double R, double diam) {
  ScenarioInputs s;
  s.n = n;
  s.d = d;
  s.R_nu = R;
  s.diam_sigma = diam;
  return s;
}

}  // namespace

TEST_CASE("derived gluing parameters") {
  SUBCASE("cosh definition") {
    const auto p = derive_parameters(scenario(4, 2, 3.0, 0.5));
    CHECK(p.U_max == doctest::Approx(10.067661995778).epsilon(1e-10));
    CHECK(p.U_glue == doctest::Approx(3.172956663499).epsilon(1e-10));
    const auto q = derive_parameters(scenario(4, 2, 20.0, 0.5));
    CHECK(q.U_max == doctest::Approx(std::cosh(20.0)).epsilon(1e-13));
    CHECK(q.U_max == doctest::Approx(2.4258e8).epsilon(1e-4));
    CHECK(q.U_glue == doctest::Approx(std::sqrt(std::cosh(20.0))).epsilon(1e-13));
  }
  SUBCASE("guard: U_max must exceed 4") {
    CHECK_THROWS_AS(derive_parameters(scenario(4, 2, 0.01, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(derive_parameters(scenario(4, 2, 2.06, 0.0)), std::invalid_argument);
    CHECK_NOTHROW(derive_parameters(scenario(4, 2, 2.07, 0.0)));
  }
  SUBCASE("log-space survives far beyond cosh overflow") {
    const auto p = derive_parameters(scenario(4, 2, 800.0, 1.0));
    CHECK(p.log_U_max == doctest::Approx(800.0 - std::log(2.0)).epsilon(1e-12));
    CHECK(p.log_U_glue == doctest::Approx(0.5 * (800.0 - std::log(2.0))).epsilon(1e-12));
    CHECK(std::isinf(p.U_max));          // linear value saturates
    CHECK(std::isfinite(p.U_glue));      // sqrt is still representable
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(derive_parameters(scenario(3, 2, 5.0, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(derive_parameters(scenario(4, 0, 5.0, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(derive_parameters(scenario(4, 2, -1.0, 0.0)), std::invalid_argument);
  }
}

TEST_CASE("l2 bound chain") {
  SUBCASE("bookkeeping identity: net exponent is -(n-1) + epsilon") {
    for (int n : {4, 5, 7}) {
      for (double diam : {0.0, 1.0, 3.7}) {
        const auto c = l2_bound_chain(scenario(n, 2, 30.0, diam), 1e-4, 2.0);
        const double eps = 2.0 * (n - 3) * diam / 30.0;
        CHECK(c.epsilon == eps);
        CHECK(c.net_exponent == -(n - 1.0) + eps);
        CHECK(c.decay_certified);
      }
    }
  }
  SUBCASE("no decay certified at the exponent boundary") {
    // (n-3) diam = (n-1) R/2  <=>  epsilon = n-1
    const int n = 5;
    const double R = 10.0;
    const double diam = (n - 1.0) * 0.5 * R / (n - 3.0);
    const auto c = l2_bound_chain(scenario(n, 2, R, diam), 1e-4, 2.0);
    CHECK(c.epsilon == doctest::Approx(n - 1.0).epsilon(1e-14));
    CHECK_FALSE(c.decay_certified);
    // more diameter is also uncertified
    const auto c2 = l2_bound_chain(scenario(n, 2, R, 1.5 * diam), 1e-4, 2.0);
    CHECK_FALSE(c2.decay_certified);
  }
  SUBCASE("zero cross-section volume gives bound zero") {
    auto s = scenario(4, 2, 20.0, 0.0);
    s.vol_sigma = 0.0;
    const auto c = l2_bound_chain(s, 1e-4, 2.0);
    CHECK(c.l2_bound == 0.0);
    CHECK(c.gluing_volume == 0.0);
  }
  SUBCASE("product structure in log space") {
    const auto s = scenario(4, 2, 21.0, 1.0);
    const auto p = derive_parameters(s);
    const double sup = 3.7e-9, cvol = 5.5;
    const auto c = l2_bound_chain(s, sup, cvol);
    const double expect_log = 2.0 * std::log(sup) + std::log(cvol) +
                              3.0 * p.log_U_glue + s.log_vol_sigma_cap();
    CHECK(c.log_l2_bound == doctest::Approx(expect_log).epsilon(1e-14));
  }
  SUBCASE("strictly decreasing in R_nu, all else fixed") {
    double prev = std::numeric_limits<double>::infinity();
    for (double R : {10.0, 15.0, 22.0, 40.0}) {
      const auto rep = scenario_report(scenario(4, 2, R, 1.0), 600);
      CHECK(rep.chain.log_l2_bound < prev);
      prev = rep.chain.log_l2_bound;
    }
  }
}

TEST_CASE("true l2 norm by quadrature") {
  SUBCASE("a = 0 integrates to zero") {
    const auto spec = gluing::GluedMetricSpec::make(4, 1, 100.0);
    CHECK(l2_numeric(spec, 1.0) == 0.0);
  }
  SUBCASE("bound dominates the truth") {
    for (double R : {12.0, 20.0, 26.0}) {
      const auto rep = scenario_report(scenario(4, 3, R, 0.8), 1000);
      REQUIRE(rep.l2_numeric_computed);
      CHECK(rep.l2_numeric_value <= 1.01 * rep.chain.l2_bound);
      CHECK(rep.l2_numeric_value > 0.0);
    }
  }
  SUBCASE("doubling U_glue shrinks the integral by about 2^{1-n}") {
    const int n = 4;
    const auto s1 = gluing::GluedMetricSpec::make(n, 2, 200.0);
    const auto s2 = gluing::GluedMetricSpec::make(n, 2, 400.0);
    const double ratio = l2_numeric(s2, 1.0) / l2_numeric(s1, 1.0);
    CHECK(ratio == doctest::Approx(std::pow(2.0, 1 - n)).epsilon(0.02));
  }
  SUBCASE("volume scale enters linearly") {
    const auto spec = gluing::GluedMetricSpec::make(4, 2, 150.0);
    CHECK(l2_numeric(spec, 3.0) == doctest::Approx(3.0 * l2_numeric(spec, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("scenario reports and convergence tables") {
  SUBCASE("report fields are coherent") {
    const auto rep = scenario_report(scenario(4, 2, 25.0, 5.0), 800);
    CHECK(rep.params.U_glue == doctest::Approx(std::sqrt(std::cosh(25.0))).epsilon(1e-12));
    CHECK(rep.sup_error > 0.0);
    // C_sup recovers sup via the scaling
    CHECK(rep.C_sup == doctest::Approx(rep.sup_error * std::pow(rep.params.U_glue, 3))
                           .epsilon(1e-9));
    // measured volume constant matches the closed form for the annulus
    const double expect_cvol = 2.0 * M_PI * 2.0 * (1.0 - std::pow(2.0, -3)) / 3.0;
    CHECK(rep.measured_C_vol == doctest::Approx(expect_cvol).epsilon(1e-9));
    CHECK(rep.vol_cap_provenance.find("unit-ball") != std::string::npos);
  }
  SUBCASE("vol_sigma wins over the cap when given") {
    auto s = scenario(4, 2, 25.0, 5.0);
    s.vol_sigma = 2.5;
    const auto rep = scenario_report(s, 600);
    CHECK(rep.vol_sigma_cap == 2.5);
    CHECK(rep.vol_cap_provenance == "given vol_sigma");
  }
  SUBCASE("the scenario sequence drives the bound to zero") {
    std::vector<ScenarioInputs> seq;
    for (int k = 25; k <= 400; k += 25)
      seq.push_back(scenario(4, 2, static_cast<double>(k), std::sqrt(static_cast<double>(k))));
    const auto rows = convergence_table(seq, 600);
    REQUIRE(rows.size() == seq.size());
    for (std::size_t i = 1; i < rows.size(); ++i)
      CHECK(rows[i].chain.log_l2_bound < rows[i - 1].chain.log_l2_bound);
    CHECK(rows.back().chain.log_l2_bound - rows.front().chain.log_l2_bound <
          std::log(1e-3));
    // truth stays below the bound wherever it was computable
    int computed = 0;
    for (const auto& r : rows)
      if (r.l2_numeric_computed) {
        CHECK(r.l2_numeric_value <= 1.01 * r.chain.l2_bound);
        ++computed;
      }
    CHECK(computed >= 5);
  }
  SUBCASE("single row table") {
    const auto rows = convergence_table({scenario(4, 2, 25.0, 1.0)}, 400);
    CHECK(rows.size() == 1);
  }
  SUBCASE("invalid scenario surfaces with its index") {
    std::vector<ScenarioInputs> seq{scenario(4, 2, 25.0, 1.0), scenario(4, 2, 1.0, 1.0)};
    CHECK_THROWS_WITH_AS(convergence_table(seq, 400), doctest::Contains("scenario 1"),
                         std::runtime_error);
  }
}

TEST_CASE("scenario JSON and table serialization") {
  SUBCASE("round trip with both volume conventions") {
    const std::string text = R"([
      {"n": 4, "d": 2, "R_nu": 25.0, "diam_sigma": 3.0, "vol_sigma": 7.25},
      {"n": 5, "d": 3, "R_nu": 30.0, "diam_sigma": 2.0, "vol_cap_constant": 0.5}
    ])";
    const auto seq = read_scenarios_json(text);
    REQUIRE(seq.size() == 2);
    CHECK(seq[0].vol_sigma.value() == 7.25);
    CHECK_FALSE(seq[0].vol_cap_constant.has_value());
    CHECK(seq[1].vol_cap_constant.value() == 0.5);
    CHECK(seq[1].vol_sigma_cap() == doctest::Approx(0.5 * std::exp(2.0 * 2.0)).epsilon(1e-12));
  }
  SUBCASE("unknown keys rejected") {
    CHECK_THROWS_AS(read_scenarios_json(R"([{"n":4,"d":2,"R_nu":25.0,"bogus":1}])"),
                    std::invalid_argument);
  }
  SUBCASE("non-array rejected") {
    CHECK_THROWS_AS(read_scenarios_json(R"({"n":4})"), std::invalid_argument);
  }
  SUBCASE("csv has the full column set and one line per row") {
    std::vector<ScenarioInputs> seq{scenario(4, 2, 25.0, 1.0), scenario(4, 2, 30.0, 1.0)};
    const auto rows = convergence_table(seq, 400);
    const std::string csv = table_to_csv(rows);
    CHECK(csv.find("l2_bound") != std::string::npos);
    CHECK(csv.find("net_exponent") != std::string::npos);
    int lines = 0;
    for (char ch : csv)
      if (ch == '\n') ++lines;
    CHECK(lines == 3);  // header + 2 rows
    const std::string js = table_to_json(rows);
    CHECK(js.find("exponent_bookkeeping") != std::string::npos);
  }
}

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(0) == doctest::Approx(1.0));
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
}
