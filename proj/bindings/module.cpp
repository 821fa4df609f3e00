#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rrsens/boot.hpp"
#include "rrsens/csv.hpp"
#include "rrsens/gps.hpp"
#include "rrsens/sens.hpp"
#include "rrsens/sim.hpp"

namespace py = pybind11;
using namespace rrsens;

namespace {

CsvSchema schema_from_dict(const py::dict& d) {
  CsvSchema schema;
  schema.treatment_column = d["treatment"].cast<std::string>();
  schema.outcome_column = d["outcome"].cast<std::string>();
  if (d.contains("ordinal")) schema.ordinal_treatment = d["ordinal"].cast<bool>();
  if (d.contains("intercept_present"))
    schema.intercept_present = d["intercept_present"].cast<bool>();
  if (d.contains("treatment_levels"))
    schema.treatment_levels = d["treatment_levels"].cast<std::vector<std::string>>();
  for (const auto& item : d["covariates"]) {
    CovariateSpec cov;
    if (py::isinstance<py::str>(item)) {
      cov.name = item.cast<std::string>();
    } else {
      const py::dict cd = item.cast<py::dict>();
      cov.name = cd["name"].cast<std::string>();
      if (cd.contains("levels")) cov.levels = cd["levels"].cast<std::vector<std::string>>();
      if (cd.contains("discover_levels")) cov.discover_levels = cd["discover_levels"].cast<bool>();
    }
    schema.covariates.push_back(std::move(cov));
  }
  return schema;
}

py::dict interval_to_dict(const IntervalEstimate& est) {
  py::dict d;
  d["point_lower"] = est.point_lower;
  d["point_upper"] = est.point_upper;
  d["ci_lower"] = est.ci_lower ? py::object(py::float_(*est.ci_lower)) : py::none();
  d["ci_upper"] = est.ci_upper ? py::object(py::float_(*est.ci_upper)) : py::none();
  d["alpha"] = est.alpha ? py::object(py::float_(*est.alpha)) : py::none();
  d["bootstrap_reps"] =
      est.bootstrap_reps ? py::object(py::int_(*est.bootstrap_reps)) : py::none();
  d["gamma0"] = est.gamma0;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Risk-ratio sensitivity analysis for IPW causal effect estimates";

  py::register_exception<SchemaError>(m, "SchemaError");
  py::register_exception<ParseError>(m, "CsvParseError");
  py::register_exception<ValidationError>(m, "DatasetValidationError");
  py::register_exception<FitError>(m, "FitError");
  py::register_exception<PositivityError>(m, "PositivityError");
  py::register_exception<InstabilityError>(m, "InstabilityError");

  py::class_<ObservationalDataset>(m, "Dataset")
      .def(py::init([](Eigen::MatrixXd covariates, Eigen::VectorXi treatment,
                       Eigen::VectorXd outcome, int num_arms, bool has_intercept, bool ordinal) {
             return ObservationalDataset::create(std::move(covariates), std::move(treatment),
                                                 std::move(outcome), num_arms, has_intercept,
                                                 ordinal);
           }),
           py::arg("covariates"), py::arg("treatment"), py::arg("outcome"), py::arg("num_arms") = 0,
           py::arg("has_intercept") = false, py::arg("ordinal") = false)
      .def_readonly("covariates", &ObservationalDataset::covariates)
      .def_readonly("treatment", &ObservationalDataset::treatment)
      .def_readonly("outcome", &ObservationalDataset::outcome)
      .def_readonly("num_arms", &ObservationalDataset::num_arms)
      .def_readonly("has_intercept", &ObservationalDataset::has_intercept)
      .def_readonly("ordinal_treatment", &ObservationalDataset::ordinal_treatment)
      .def_readonly("covariate_names", &ObservationalDataset::covariate_names)
      .def_readonly("treatment_levels", &ObservationalDataset::treatment_levels)
      .def_property_readonly("n", &ObservationalDataset::n)
      .def_property_readonly("dim", &ObservationalDataset::dim)
      .def("arm_sizes", &ObservationalDataset::arm_sizes)
      .def("validate", [](const ObservationalDataset& data) {
        std::vector<std::string> messages;
        for (const auto& f : validate(data)) messages.push_back(f.message);
        return messages;
      });

  m.def(
      "load_csv",
      [](const std::string& path, const py::dict& schema) {
        return load_csv(path, schema_from_dict(schema));
      },
      py::arg("path"), py::arg("schema"));
  m.def("save_csv", &save_csv, py::arg("dataset"), py::arg("path"));

  py::class_<GpsModel>(m, "GpsModel")
      .def_property_readonly("family", [](const GpsModel& model) { return to_string(model.family); })
      .def_readonly("coefficients", &GpsModel::coefficients)
      .def_readonly("num_arms", &GpsModel::num_arms)
      .def_readonly("converged", &GpsModel::converged)
      .def_readonly("iterations", &GpsModel::iterations)
      .def_readonly("log_likelihood", &GpsModel::log_likelihood)
      .def_readonly("loglik_trace", &GpsModel::loglik_trace)
      .def_property_readonly("warnings",
                             [](const GpsModel& model) {
                               std::vector<std::string> messages;
                               for (const auto& w : model.warnings) messages.push_back(w.message);
                               return messages;
                             })
      .def("to_json", [](const GpsModel& model) { return model.to_json().dump(2); })
      .def_static("from_json", [](const std::string& text) {
        return GpsModel::from_json(nlohmann::json::parse(text));
      });

  m.def(
      "fit_binary_logistic",
      [](const ObservationalDataset& data, double ridge) {
        FitOptions opts;
        opts.ridge = ridge;
        return fit_binary_logistic(data, opts);
      },
      py::arg("dataset"), py::arg("ridge") = 0.0);
  m.def(
      "fit_multinomial_logit",
      [](const ObservationalDataset& data, double ridge) {
        FitOptions opts;
        opts.ridge = ridge;
        return fit_multinomial_logit(data, opts);
      },
      py::arg("dataset"), py::arg("ridge") = 0.0);
  m.def(
      "fit_continuation_ratio",
      [](const ObservationalDataset& data, bool shared_slopes, bool backward_stages, double ridge) {
        CratioOptions cr{shared_slopes, backward_stages};
        FitOptions opts;
        opts.ridge = ridge;
        return fit_continuation_ratio(data, cr, opts);
      },
      py::arg("dataset"), py::arg("shared_slopes") = false, py::arg("backward_stages") = false,
      py::arg("ridge") = 0.0);
  m.def("predict_gps", &predict_gps, py::arg("model"), py::arg("covariates"),
        py::arg("allow_unconverged") = false);

  m.def(
      "compute_z_bounds",
      [](const Eigen::VectorXd& gps_received, double gamma0, const std::string& family) {
        const SensitivitySpec spec{gamma0, sensitivity_family_from_string(family)};
        const UnitBounds bounds = compute_z_bounds(gps_received, spec);
        return py::make_tuple(bounds.z_lo, bounds.z_hi);
      },
      py::arg("gps_received"), py::arg("gamma0"), py::arg("family") = "risk_ratio");
  m.def("shifted_propensity", &shifted_propensity, py::arg("e_beta"), py::arg("z"));
  m.def(
      "extremize_weighted_mean",
      [](const Eigen::VectorXd& y, const Eigen::VectorXd& u, const Eigen::VectorXd& z_lo,
         const Eigen::VectorXd& z_hi, const std::string& direction) {
        const Direction dir = direction == "max" ? Direction::maximize : Direction::minimize;
        const ExtremizeResult result = extremize_weighted_mean(y, u, z_lo, z_hi, dir);
        return py::make_tuple(result.value, result.z);
      },
      py::arg("y"), py::arg("u"), py::arg("z_lo"), py::arg("z_hi"), py::arg("direction") = "max");

  m.def(
      "pairwise_contrast",
      [](int arm_i, int arm_j, int num_arms) {
        return ContrastSpec::pairwise(arm_i, arm_j, num_arms).coefficients;
      },
      py::arg("arm_i"), py::arg("arm_j"), py::arg("num_arms"));
  m.def(
      "sipw_point_estimate",
      [](const ObservationalDataset& data, const Eigen::MatrixXd& gps,
         const Eigen::VectorXd& contrast) {
        return sipw_point_estimate(data, gps, ContrastSpec{contrast});
      },
      py::arg("dataset"), py::arg("gps"), py::arg("contrast"));
  m.def(
      "estimate_interval",
      [](const ObservationalDataset& data, const Eigen::MatrixXd& gps,
         const Eigen::VectorXd& contrast, double gamma0, const std::string& family) {
        const SensitivitySpec spec{gamma0, sensitivity_family_from_string(family)};
        return interval_to_dict(estimate_interval(data, gps, ContrastSpec{contrast}, spec));
      },
      py::arg("dataset"), py::arg("gps"), py::arg("contrast"), py::arg("gamma0"),
      py::arg("family") = "risk_ratio");

  m.def(
      "percentile_bootstrap_ci",
      [](const ObservationalDataset& data, const std::string& gps_family,
         const Eigen::VectorXd& contrast, double gamma0, const std::string& family, int reps,
         double alpha, std::uint64_t seed, bool refit_gps, int threads) {
        GpsSpec gps_spec;
        gps_spec.family = gps_family_from_string(gps_family);
        const SensitivitySpec spec{gamma0, sensitivity_family_from_string(family)};
        const BootstrapConfig config{reps, alpha, seed, refit_gps, threads};
        return interval_to_dict(
            percentile_bootstrap_ci(data, gps_spec, ContrastSpec{contrast}, spec, config));
      },
      py::arg("dataset"), py::arg("gps_family"), py::arg("contrast"), py::arg("gamma0"),
      py::arg("family") = "risk_ratio", py::arg("reps") = 1000, py::arg("alpha") = 0.10,
      py::arg("seed") = 0, py::arg("refit_gps") = true, py::arg("threads") = 0);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("n", &ScenarioConfig::n)
      .def_readwrite("k2", &ScenarioConfig::k2)
      .def_readwrite("k3", &ScenarioConfig::k3)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("gamma0_grid", &ScenarioConfig::gamma0_grid)
      .def_readwrite("reps", &ScenarioConfig::reps)
      .def_readwrite("oracle_n", &ScenarioConfig::oracle_n)
      .def_readwrite("oracle_seed", &ScenarioConfig::oracle_seed)
      .def_readwrite("threads", &ScenarioConfig::threads)
      .def_property(
          "bootstrap_reps", [](const ScenarioConfig& c) { return c.bootstrap.reps; },
          [](ScenarioConfig& c, int reps) { c.bootstrap.reps = reps; })
      .def_property(
          "alpha", [](const ScenarioConfig& c) { return c.bootstrap.alpha; },
          [](ScenarioConfig& c, double alpha) { c.bootstrap.alpha = alpha; })
      .def_property(
          "x3_reading",
          [](const ScenarioConfig& c) {
            return c.x3_reading == NormalReading::sd ? "sd" : "variance";
          },
          [](ScenarioConfig& c, const std::string& reading) {
            if (reading == "sd") c.x3_reading = NormalReading::sd;
            else if (reading == "variance") c.x3_reading = NormalReading::variance;
            else throw ValidationError("x3_reading must be 'sd' or 'variance'");
          });

  m.def("scenario_preset", &scenario_preset, py::arg("scenario"));
  m.def(
      "generate_scenario",
      [](const ScenarioConfig& config, int replicate) {
        const ScenarioDraw draw = generate_scenario(config, replicate);
        return py::make_tuple(draw.data, draw.true_gps, draw.potential_outcomes);
      },
      py::arg("config"), py::arg("replicate") = 0);
  m.def(
      "true_partially_identified_interval",
      [](const Eigen::VectorXd& contrast, double gamma0, double k2, double k3, long long n_oracle,
         std::uint64_t seed, const std::string& x3_reading) {
        const NormalReading reading =
            x3_reading == "variance" ? NormalReading::variance : NormalReading::sd;
        const auto [lo, hi] = true_partially_identified_interval(ContrastSpec{contrast}, gamma0,
                                                                 k2, k3, n_oracle, seed, reading);
        return py::make_tuple(lo, hi);
      },
      py::arg("contrast"), py::arg("gamma0"), py::arg("k2"), py::arg("k3"),
      py::arg("n_oracle") = 1000000, py::arg("seed") = 20260809, py::arg("x3_reading") = "sd");
  m.def(
      "run_study",
      [](const ScenarioConfig& config, const std::vector<std::pair<int, int>>& pairs) {
        std::vector<ContrastSpec> contrasts;
        for (const auto& [i, j] : pairs) contrasts.push_back(ContrastSpec::pairwise(i, j, 3));
        const StudyReport report = run_study(config, contrasts);
        py::list rows;
        for (const auto& row : report.rows) {
          py::dict d;
          d["contrast"] = row.contrast;
          d["gamma0"] = row.gamma0;
          d["Gamma0"] = row.Gamma0;
          d["pct_bias_lower"] =
              row.pct_bias_lower ? py::object(py::float_(*row.pct_bias_lower)) : py::none();
          d["pct_bias_upper"] =
              row.pct_bias_upper ? py::object(py::float_(*row.pct_bias_upper)) : py::none();
          d["non_coverage"] = row.non_coverage;
          d["true_interval"] = py::make_tuple(row.true_lower, row.true_upper);
          d["med_point_interval"] = py::make_tuple(row.med_point_lower, row.med_point_upper);
          d["med_ci"] = py::make_tuple(row.med_ci_lower, row.med_ci_upper);
          d["overlap_warning"] = row.overlap_warning;
          rows.append(std::move(d));
        }
        py::dict out;
        out["rows"] = rows;
        out["csv"] = report.to_csv();
        out["json"] = report.to_json().dump(2);
        return out;
      },
      py::arg("config"),
      py::arg("contrasts") = std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 3}});

  m.attr("__version__") = kVersion;
}
