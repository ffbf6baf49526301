#include "einglue/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "einglue/estimates.hpp"
#include "einglue/geometry.hpp"
#include "einglue/gluing.hpp"
#include "einglue/profiles.hpp"
#include "einglue/tensorlab.hpp"
#include "einglue/version.hpp"

namespace einglue::cli {

using json = nlohmann::json;

namespace {

void write_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp);
    f << text;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move report into place at " + path);
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty())
    out << text;
  else
    write_atomic(out_path, text);
}

json report_shell(const std::string& command, const json& config) {
  json doc;
  doc["schema"] = 1;
  doc["version"] = EINGLUE_VERSION;
  doc["command"] = command;
  doc["config"] = config;
  return doc;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw CLI::ValidationError(msg);
}

int cmd_profile_solve(int n, int d, const std::string& out_path, std::ostream& out) {
  const profiles::ConeAngleSolution sol = profiles::solve_cone_angle(n, d);
  const auto [a_max, v] = profiles::a_max_and_v(n);
  json config{{"n", n}, {"d", d}};
  json doc = report_shell("profile-solve", config);
  doc["results"] = {{"a", sol.a_of_d},
                    {"u_a", sol.u_of_d},
                    {"residual_V", sol.residuals[0]},
                    {"residual_Vp", sol.residuals[1]},
                    {"cone_angle", 2.0 * M_PI / d},
                    {"a_max", a_max},
                    {"v", v}};
  emit(doc.dump(2) + "\n", out_path, out);
  return 0;
}

profiles::ProfileSpec make_profile(const std::string& kind, int n, int d, double a_flag,
                                   bool a_given, double uglue) {
  if (kind == "hyperbolic") return profiles::ProfileSpec::hyperbolic(n);
  double a = a_flag;
  if (!a_given) a = profiles::solve_cone_angle(n, d).a_of_d;
  if (kind == "model") return profiles::ProfileSpec::model(n, a);
  if (kind == "glued") {
    require(uglue > 0.0, "--uglue is required for glued profiles");
    return profiles::ProfileSpec::glued(n, a, gluing::CutoffSpec::for_glue(uglue));
  }
  throw CLI::ValidationError("unknown profile kind: " + kind);
}

int cmd_curvature_scan(const std::string& kind, int n, int d, double a_flag, bool a_given,
                       double uglue, double umin, double umax, int samples,
                       const std::string& out_path, std::ostream& out) {
  const profiles::ProfileSpec p = make_profile(kind, n, d, a_flag, a_given, uglue);
  double lo = umin;
  if (lo <= 0.0) lo = p.domain_lower();
  require(umax > lo, "--umax must exceed the scan lower bound");
  const geometry::ScanResult r = geometry::curvature_scan(p, n, lo, umax, samples);
  json config{{"profile", kind}, {"n", n},       {"d", d},
              {"a", p.a()},      {"uglue", uglue}, {"umin", lo},
              {"umax", umax},    {"samples", samples}};
  json doc = report_shell("curvature-scan", config);
  doc["results"] = {{"min_sec", r.min_sec},       {"max_sec", r.max_sec},
                    {"max_err_norm", r.max_err_norm}, {"u_min_sec", r.u_min_sec},
                    {"u_max_sec", r.u_max_sec},   {"u_max_err", r.u_max_err},
                    {"domain_lower", p.domain_lower()}};
  emit(doc.dump(2) + "\n", out_path, out);
  return 0;
}

int cmd_glue_verify(int n, int d, double uglue, double ucap, int samples, int decay_count,
                    double decay_umin, double decay_umax, const std::string& out_path,
                    std::ostream& out) {
  const gluing::GluedMetricSpec spec = gluing::GluedMetricSpec::make(n, d, uglue);
  const gluing::SupportCheck sup = gluing::error_support_check(spec, samples);
  const double sup_norm = gluing::error_sup_norm(spec, samples);
  if (ucap <= 0.0) ucap = 2.0 * uglue;
  const gluing::NegativityCertificate cert = gluing::negativity_certificate(spec, ucap, samples);

  json config{{"n", n},         {"d", d},           {"uglue", uglue},
              {"ucap", ucap},   {"samples", samples}, {"decay_count", decay_count},
              {"decay_umin", decay_umin}, {"decay_umax", decay_umax}};
  json doc = report_shell("glue-verify", config);
  json res;
  res["a"] = spec.a;
  res["u_a"] = spec.u_a;
  res["support_ok"] = sup.support_ok;
  res["max_err_inner"] = sup.max_err_inner;
  res["max_err_outer"] = sup.max_err_outer;
  res["sup_err_band"] = sup_norm;
  res["max_sec"] = cert.max_sec;
  res["max_sec_witness_u"] = cert.witness_u;
  if (cert.min_required_Uglue) res["min_required_uglue"] = *cert.min_required_Uglue;

  if (decay_count > 0) {
    require(decay_count >= 4, "--decay-count must be >= 4");
    require(decay_umin > 0.0 && decay_umax >= 100.0 * decay_umin,
            "decay fit needs U_glue spanning >= 2 decades");
    std::vector<gluing::GluedMetricSpec> family;
    for (int i = 0; i < decay_count; ++i) {
      const double t = static_cast<double>(i) / (decay_count - 1);
      const double U = std::exp(std::log(decay_umin) + t * std::log(decay_umax / decay_umin));
      family.push_back(gluing::GluedMetricSpec::make(n, d, U));
    }
    res["decay_exponent"] = gluing::decay_exponent_fit(family, samples);
    res["decay_expected"] = -(n - 1);
  }
  doc["results"] = res;
  emit(doc.dump(2) + "\n", out_path, out);
  return 0;
}

int cmd_scenario_table(const std::string& input, const std::string& out_path,
                       const std::string& format, std::ostream& out) {
  const std::vector<estimates::ScenarioInputs> seq = estimates::read_scenarios_file(input);
  const std::vector<estimates::EstimateReport> rows = estimates::convergence_table(seq);
  json config{{"input", input}, {"format", format}, {"rows", seq.size()}};
  if (format == "csv") {
    std::string text = "# einglue " EINGLUE_VERSION " scenario-table\n";
    text += "# config " + config.dump() + "\n";
    text += estimates::table_to_csv(rows);
    emit(text, out_path, out);
  } else {
    json doc = report_shell("scenario-table", config);
    doc["results"] = json::parse(estimates::table_to_json(rows));
    emit(doc.dump(2) + "\n", out_path, out);
  }
  return 0;
}

int cmd_tensorlab_check(int n, const std::string& background, int d, int extent, double spacing,
                        const std::string& dump_path, const std::string& out_path,
                        std::ostream& out) {
  using namespace tensorlab;
  profiles::ProfileSpec prof = profiles::ProfileSpec::hyperbolic(n);
  if (background == "model")
    prof = profiles::ProfileSpec::model(n, profiles::solve_cone_angle(n, d).a_of_d);
  else
    require(background == "hyperbolic", "background must be hyperbolic or model");

  const SelfTestReport rep = ansatz_selftest(prof, extent, spacing);
  json res;
  res["ricci_einstein_residual"] = rep.ricci_einstein_residual;
  res["ricci_einstein_residual_half_spacing"] = rep.ricci_einstein_residual_half;
  res["convergence_order"] = rep.convergence_order;
  res["bianchi_gauge_residual"] = rep.bianchi_gauge_residual;
  res["lichnerowicz_of_metric_residual"] = rep.lichnerowicz_metric_residual;
  res["linearization_residual"] = rep.linearization.pointwise_max_residual;
  res["linearization_order"] = rep.linearization.convergence_order;

  if (!dump_path.empty()) {
    std::vector<double> center(n, 0.0), sp(n, spacing);
    center[0] = prof.domain_lower() + 0.8;
    center[n - 1] = 1.5;
    const PatchGrid grid = PatchGrid::centered(center, sp, std::vector<int>(n, extent));
    const PatchField g = sample_metric(grid, ansatz_metric(prof));
    const PatchField phi = einstein_operator(grid, g, g);
    dump_csv(grid, phi, dump_path);
    res["dump"] = dump_path;
  }

  json config{{"n", n},           {"background", background}, {"d", d},
              {"extent", extent}, {"spacing", spacing},       {"dump", dump_path}};
  json doc = report_shell("tensorlab-check", config);
  doc["results"] = res;
  emit(doc.dump(2) + "\n", out_path, out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"verification toolkit for glued approximately-Einstein metrics "
               "on branched covers of hyperbolic manifolds"};
  app.set_version_flag("--version", EINGLUE_VERSION);
  app.require_subcommand(1);

  int n = 4, d = 2;
  double a_flag = 0.0, uglue = 0.0, umin = 0.0, umax = 0.0, ucap = 0.0, spacing = 0.04;
  int samples = 1000, extent = 9, decay_count = 0;
  double decay_umin = 1e2, decay_umax = 1e4;
  std::string out_path, format = "json", input, profile_kind = "hyperbolic", background =
      "hyperbolic", dump_path;

  auto* solve = app.add_subcommand("profile-solve", "solve the cone-angle matching problem");
  solve->add_option("--n", n, "dimension (>= 4)")->required();
  solve->add_option("--d", d, "branch degree (>= 1)")->required();
  solve->add_option("--out", out_path, "report path (default stdout)");

  auto* scan = app.add_subcommand("curvature-scan", "curvature extremes of a profile");
  scan->add_option("--n", n)->required();
  scan->add_option("--profile", profile_kind, "hyperbolic | model | glued");
  scan->add_option("--d", d, "branch degree fixing a = a(d)");
  auto* a_opt = scan->add_option("--a", a_flag, "explicit family parameter");
  scan->add_option("--uglue", uglue);
  scan->add_option("--umin", umin, "default: profile domain lower bound");
  scan->add_option("--umax", umax)->required();
  scan->add_option("--samples", samples);
  scan->add_option("--out", out_path);

  auto* glue = app.add_subcommand("glue-verify", "support, sup norm, negativity, decay");
  glue->add_option("--n", n)->required();
  glue->add_option("--d", d)->required();
  glue->add_option("--uglue", uglue)->required();
  glue->add_option("--ucap", ucap, "scan cap (default 2 U_glue)");
  glue->add_option("--samples", samples);
  glue->add_option("--decay-count", decay_count, "fit decay over this many U_glue values");
  glue->add_option("--decay-umin", decay_umin);
  glue->add_option("--decay-umax", decay_umax);
  glue->add_option("--out", out_path);

  auto* table = app.add_subcommand("scenario-table", "estimate chain over a scenario sequence");
  table->add_option("--input", input, "scenario JSON file")->required();
  table->add_option("--out", out_path);
  table->add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

  auto* tcheck = app.add_subcommand("tensorlab-check", "finite-difference engine self-test");
  tcheck->add_option("--n", n);
  tcheck->add_option("--background", background, "hyperbolic | model");
  tcheck->add_option("--d", d);
  tcheck->add_option("--extent", extent, "grid points per axis (>= 9)");
  tcheck->add_option("--spacing", spacing);
  tcheck->add_option("--dump", dump_path, "CSV slice of the Einstein operator field");
  tcheck->add_option("--out", out_path);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << EINGLUE_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", e.what()}, {"exit", 2}}.dump() << "\n";
    return 2;
  }

  try {
    if (n < 4) throw std::invalid_argument("dimension must satisfy n >= 4");
    if (d < 1) throw std::invalid_argument("branch degree must satisfy d >= 1");
    if (samples < 2) throw std::invalid_argument("samples must be >= 2");
    if (solve->parsed()) return cmd_profile_solve(n, d, out_path, out);
    if (scan->parsed())
      return cmd_curvature_scan(profile_kind, n, d, a_flag, a_opt->count() > 0, uglue, umin,
                                umax, samples, out_path, out);
    if (glue->parsed())
      return cmd_glue_verify(n, d, uglue, ucap, samples, decay_count, decay_umin, decay_umax,
                             out_path, out);
    if (table->parsed()) return cmd_scenario_table(input, out_path, format, out);
    if (tcheck->parsed()) {
      if (extent < 9) throw std::invalid_argument("tensorlab-check requires extent >= 9");
      return cmd_tensorlab_check(n, background, d, extent, spacing, dump_path, out_path, out);
    }
    throw std::invalid_argument("no subcommand selected");
  } catch (const CLI::ValidationError& e) {
    err << json{{"error", e.what()}, {"exit", 2}}.dump() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << json{{"error", e.what()}, {"exit", 2}}.dump() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    err << json{{"error", e.what()}, {"exit", 2}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << json{{"error", e.what()}, {"exit", 3}}.dump() << "\n";
    return 3;
  }
}

}  // namespace einglue::cli
