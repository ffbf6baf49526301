#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "einglue/estimates.hpp"
#include "einglue/geometry.hpp"
#include "einglue/gluing.hpp"
#include "einglue/profiles.hpp"
#include "einglue/tensorlab.hpp"
#include "einglue/version.hpp"

namespace py = pybind11;
using namespace einglue;

namespace {

gluing::GluedMetricSpec make_spec(int n, int d, double u_glue) {
  return gluing::GluedMetricSpec::make(n, d, u_glue);
}

estimates::ScenarioInputs scenario_from_kwargs(int n, int d, double R_nu, double diam_sigma,
                                               std::optional<double> vol_sigma,
                                               std::optional<double> vol_cap_constant) {
  estimates::ScenarioInputs s;
  s.n = n;
  s.d = d;
  s.R_nu = R_nu;
  s.diam_sigma = diam_sigma;
  s.vol_sigma = vol_sigma;
  s.vol_cap_constant = vol_cap_constant;
  return s;
}

py::dict report_to_dict(const estimates::EstimateReport& r) {
  py::dict row;
  row["n"] = r.inputs.n;
  row["d"] = r.inputs.d;
  row["R_nu"] = r.inputs.R_nu;
  row["diam_sigma"] = r.inputs.diam_sigma;
  row["U_max"] = r.params.U_max;
  row["U_glue"] = r.params.U_glue;
  row["log_U_glue"] = r.params.log_U_glue;
  row["sup_error"] = r.sup_error;
  row["C_sup"] = r.C_sup;
  row["measured_C_vol"] = r.measured_C_vol;
  row["vol_sigma_cap"] = r.vol_sigma_cap;
  row["vol_cap_provenance"] = r.vol_cap_provenance;
  row["gluing_volume"] = r.chain.gluing_volume;
  row["l2_bound"] = r.chain.l2_bound;
  row["log_l2_bound"] = r.chain.log_l2_bound;
  row["epsilon"] = r.chain.epsilon;
  row["net_exponent"] = r.chain.net_exponent;
  row["decay_certified"] = r.chain.decay_certified;
  if (r.l2_numeric_computed) row["l2_numeric"] = r.l2_numeric_value;
  return row;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "glued approximately-Einstein metrics on branched covers: "
            "profiles, curvature, gluing checks, estimate chains";
  m.attr("__version__") = EINGLUE_VERSION;

  m.def("eval_model_profile",
        [](int n, double a, double u) {
          const auto e = profiles::eval_model_profile(n, a, u);
          return py::make_tuple(e.V, e.Vp, e.Vpp);
        },
        py::arg("n"), py::arg("a"), py::arg("u"),
        "V, V', V'' of the Einstein family profile u^2 - 1 + a u^{3-n}");
  m.def("a_max_and_v", &profiles::a_max_and_v, py::arg("n"));
  m.def("largest_root", &profiles::largest_root, py::arg("n"), py::arg("a"));
  m.def("cone_angle", &profiles::cone_angle, py::arg("n"), py::arg("a"));
  m.def("solve_cone_angle",
        [](int n, int d) {
          const auto s = profiles::solve_cone_angle(n, d);
          py::dict out;
          out["d"] = s.d;
          out["a"] = s.a_of_d;
          out["u_a"] = s.u_of_d;
          out["residual_V"] = s.residuals[0];
          out["residual_Vp"] = s.residuals[1];
          return out;
        },
        py::arg("n"), py::arg("d"));

  py::class_<profiles::ProfileSpec>(m, "Profile")
      .def_property_readonly("dim", &profiles::ProfileSpec::dim)
      .def_property_readonly("a", &profiles::ProfileSpec::a)
      .def_property_readonly("domain_lower", &profiles::ProfileSpec::domain_lower)
      .def("eval",
           [](const profiles::ProfileSpec& p, double u) {
             const auto e = p.eval(u);
             return py::make_tuple(e.V, e.Vp, e.Vpp);
           },
           py::arg("u"));

  m.def("hyperbolic_profile", &profiles::ProfileSpec::hyperbolic, py::arg("n"));
  m.def("model_profile", &profiles::ProfileSpec::model, py::arg("n"), py::arg("a"));
  m.def("glued_profile",
        [](int n, int d, double u_glue) { return gluing::glued_profile(make_spec(n, d, u_glue)); },
        py::arg("n"), py::arg("d"), py::arg("u_glue"));

  m.def("frame_curvature",
        [](const profiles::ProfileSpec& p, double u) {
          const auto fc = geometry::frame_curvature(p, p.dim(), u);
          py::dict out;
          out["k_base"] = fc.k_base;
          out["k_mixed"] = fc.k_mixed;
          out["k_fiber"] = fc.k_fiber;
          out["ric_diag"] = fc.ric_diag;
          out["err_diag"] = fc.err_diag;
          out["err_norm"] = geometry::frame_err_norm(fc, p.dim());
          return out;
        },
        py::arg("profile"), py::arg("u"));
  m.def("curvature_scan",
        [](const profiles::ProfileSpec& p, double u_lo, double u_hi, int samples) {
          const auto r = geometry::curvature_scan(p, p.dim(), u_lo, u_hi, samples);
          py::dict out;
          out["min_sec"] = r.min_sec;
          out["max_sec"] = r.max_sec;
          out["max_err_norm"] = r.max_err_norm;
          out["u_min_sec"] = r.u_min_sec;
          out["u_max_sec"] = r.u_max_sec;
          out["u_max_err"] = r.u_max_err;
          return out;
        },
        py::arg("profile"), py::arg("u_lo"), py::arg("u_hi"), py::arg("samples") = 1000);
  m.def("region_volume",
        [](const profiles::ProfileSpec& p, double U, int d, double vol_sigma) {
          return geometry::region_volume(p, {U, p.dim(), d, vol_sigma});
        },
        py::arg("profile"), py::arg("U"), py::arg("d") = 1, py::arg("vol_sigma") = 1.0);

  m.def("error_support_check",
        [](int n, int d, double u_glue, int samples) {
          const auto c = gluing::error_support_check(make_spec(n, d, u_glue), samples);
          py::dict out;
          out["support_ok"] = c.support_ok;
          out["max_err_inner"] = c.max_err_inner;
          out["max_err_outer"] = c.max_err_outer;
          out["witness_inner"] = c.witness_inner;
          out["witness_outer"] = c.witness_outer;
          return out;
        },
        py::arg("n"), py::arg("d"), py::arg("u_glue"), py::arg("samples") = 1000);
  m.def("error_sup_norm",
        [](int n, int d, double u_glue, int samples) {
          return gluing::error_sup_norm(make_spec(n, d, u_glue), samples);
        },
        py::arg("n"), py::arg("d"), py::arg("u_glue"), py::arg("samples") = 1000);
  m.def("decay_exponent_fit",
        [](int n, int d, const std::vector<double>& u_glues, int samples) {
          std::vector<gluing::GluedMetricSpec> family;
          for (double U : u_glues) family.push_back(make_spec(n, d, U));
          return gluing::decay_exponent_fit(family, samples);
        },
        py::arg("n"), py::arg("d"), py::arg("u_glues"), py::arg("samples") = 1000);
  m.def("negativity_certificate",
        [](int n, int d, double u_glue, double u_cap, int samples) {
          const auto c = gluing::negativity_certificate(make_spec(n, d, u_glue),
                                                        u_cap > 0 ? u_cap : 2.0 * u_glue, samples);
          py::dict out;
          out["max_sec"] = c.max_sec;
          out["witness_u"] = c.witness_u;
          if (c.min_required_Uglue) out["min_required_uglue"] = *c.min_required_Uglue;
          return out;
        },
        py::arg("n"), py::arg("d"), py::arg("u_glue"), py::arg("u_cap") = 0.0,
        py::arg("samples") = 4000);
  m.def("cutoff_shape_constants", &gluing::cutoff_shape_constants,
        py::arg("samples") = 200001);

  m.def("derive_parameters",
        [](int n, int d, double R_nu, double diam_sigma, std::optional<double> vol_sigma,
           std::optional<double> vol_cap_constant) {
          const auto p = estimates::derive_parameters(
              scenario_from_kwargs(n, d, R_nu, diam_sigma, vol_sigma, vol_cap_constant));
          py::dict out;
          out["U_max"] = p.U_max;
          out["U_glue"] = p.U_glue;
          out["log_U_max"] = p.log_U_max;
          out["log_U_glue"] = p.log_U_glue;
          return out;
        },
        py::arg("n"), py::arg("d"), py::arg("R_nu"), py::arg("diam_sigma") = 0.0,
        py::arg("vol_sigma") = std::nullopt, py::arg("vol_cap_constant") = std::nullopt);
  m.def("l2_bound_chain",
        [](int n, int d, double R_nu, double diam_sigma, double measured_sup,
           double measured_C_vol, std::optional<double> vol_sigma,
           std::optional<double> vol_cap_constant) {
          const auto c = estimates::l2_bound_chain(
              scenario_from_kwargs(n, d, R_nu, diam_sigma, vol_sigma, vol_cap_constant),
              measured_sup, measured_C_vol);
          py::dict out;
          out["l2_bound"] = c.l2_bound;
          out["log_l2_bound"] = c.log_l2_bound;
          out["gluing_volume"] = c.gluing_volume;
          out["epsilon"] = c.epsilon;
          out["net_exponent"] = c.net_exponent;
          out["decay_certified"] = c.decay_certified;
          return out;
        },
        py::arg("n"), py::arg("d"), py::arg("R_nu"), py::arg("diam_sigma"),
        py::arg("measured_sup"), py::arg("measured_C_vol"), py::arg("vol_sigma") = std::nullopt,
        py::arg("vol_cap_constant") = std::nullopt);
  m.def("l2_numeric",
        [](int n, int d, double u_glue, double vol_sigma) {
          return estimates::l2_numeric(make_spec(n, d, u_glue), vol_sigma);
        },
        py::arg("n"), py::arg("d"), py::arg("u_glue"), py::arg("vol_sigma") = 1.0);
  m.def("scenario_report",
        [](int n, int d, double R_nu, double diam_sigma, std::optional<double> vol_sigma,
           std::optional<double> vol_cap_constant, int sup_samples) {
          return report_to_dict(estimates::scenario_report(
              scenario_from_kwargs(n, d, R_nu, diam_sigma, vol_sigma, vol_cap_constant),
              sup_samples));
        },
        py::arg("n"), py::arg("d"), py::arg("R_nu"), py::arg("diam_sigma") = 0.0,
        py::arg("vol_sigma") = std::nullopt, py::arg("vol_cap_constant") = std::nullopt,
        py::arg("sup_samples") = 1000);
  m.def("convergence_table",
        [](const std::vector<py::dict>& rows, int sup_samples) {
          std::vector<estimates::ScenarioInputs> seq;
          for (const auto& r : rows) {
            estimates::ScenarioInputs s;
            s.n = r["n"].cast<int>();
            s.d = r["d"].cast<int>();
            s.R_nu = r["R_nu"].cast<double>();
            if (r.contains("diam_sigma")) s.diam_sigma = r["diam_sigma"].cast<double>();
            if (r.contains("vol_sigma")) s.vol_sigma = r["vol_sigma"].cast<double>();
            if (r.contains("vol_cap_constant"))
              s.vol_cap_constant = r["vol_cap_constant"].cast<double>();
            seq.push_back(s);
          }
          py::list out;
          for (const auto& rep : estimates::convergence_table(seq, sup_samples))
            out.append(report_to_dict(rep));
          return out;
        },
        py::arg("rows"), py::arg("sup_samples") = 1000);

  m.def("linearization_selftest",
        [](int n, const std::string& background, int d, int extent, double spacing) {
          profiles::ProfileSpec prof = background == "model"
              ? profiles::ProfileSpec::model(n, profiles::solve_cone_angle(n, d).a_of_d)
              : profiles::ProfileSpec::hyperbolic(n);
          const auto rep = tensorlab::ansatz_selftest(prof, extent, spacing);
          py::dict out;
          out["ricci_einstein_residual"] = rep.ricci_einstein_residual;
          out["convergence_order"] = rep.convergence_order;
          out["bianchi_gauge_residual"] = rep.bianchi_gauge_residual;
          out["lichnerowicz_of_metric_residual"] = rep.lichnerowicz_metric_residual;
          out["linearization_residual"] = rep.linearization.pointwise_max_residual;
          out["linearization_order"] = rep.linearization.convergence_order;
          return out;
        },
        py::arg("n") = 4, py::arg("background") = "hyperbolic", py::arg("d") = 2,
        py::arg("extent") = 9, py::arg("spacing") = 0.04);
}
