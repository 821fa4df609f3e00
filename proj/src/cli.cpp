#include "rrsens/cli.hpp"

#include "rrsens/boot.hpp"
#include "rrsens/csv.hpp"
#include "rrsens/gps.hpp"
#include "rrsens/sens.hpp"
#include "rrsens/sim.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

namespace rrsens::cli {

namespace {

using nlohmann::json;

struct CommonConfig {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 0;
  std::set<std::string> formats = {"csv", "json", "plotdata"};
};

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  if (values.empty()) throw ValidationError("empty numeric list '" + text + "'");
  return values;
}

std::pair<int, int> parse_contrast(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ValidationError("contrast must look like 'i:j', got '" + text + "'");
  return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
}

// Covariate flag syntax: "name" (numeric), "name:cat" (categorical, levels in
// first-appearance order), "name:cat=a|b|c" (explicit level order).
CovariateSpec parse_covariate_flag(const std::string& text) {
  CovariateSpec cov;
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    cov.name = text;
    return cov;
  }
  cov.name = text.substr(0, colon);
  std::string rest = text.substr(colon + 1);
  if (rest == "cat") {
    cov.discover_levels = true;
    return cov;
  }
  if (rest.rfind("cat=", 0) == 0) {
    std::istringstream in(rest.substr(4));
    std::string level;
    while (std::getline(in, level, '|')) cov.levels.push_back(level);
    if (cov.levels.size() < 2)
      throw ValidationError("categorical covariate '" + cov.name + "' needs >= 2 levels");
    return cov;
  }
  throw ValidationError("cannot parse covariate spec '" + text + "'");
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  json doc;
  in >> doc;
  return doc;
}

CsvSchema schema_from_json(const json& doc) {
  CsvSchema schema;
  schema.treatment_column = doc.value("treatment", "");
  schema.outcome_column = doc.value("outcome", "");
  schema.ordinal_treatment = doc.value("ordinal", false);
  schema.intercept_present = doc.value("intercept_present", false);
  for (const auto& level : doc.value("treatment_levels", json::array()))
    schema.treatment_levels.push_back(level.get<std::string>());
  for (const auto& entry : doc.value("covariates", json::array())) {
    if (entry.is_string()) {
      schema.covariates.push_back({entry.get<std::string>(), {}, false});
    } else {
      CovariateSpec cov;
      cov.name = entry.at("name").get<std::string>();
      for (const auto& level : entry.value("levels", json::array()))
        cov.levels.push_back(level.get<std::string>());
      cov.discover_levels = entry.value("discover_levels", false);
      schema.covariates.push_back(std::move(cov));
    }
  }
  return schema;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << content;
}

void write_json(const std::string& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void gps_range_report(const ObservationalDataset& data, const Eigen::MatrixXd& gps,
                      std::ostream& out) {
  out << "fitted GPS range per arm:\n";
  double overall_min = 1.0, overall_max = 0.0, overall_sum = 0.0;
  for (int a = 1; a <= data.num_arms; ++a) {
    const auto col = gps.col(a - 1);
    const std::string label = static_cast<size_t>(a - 1) < data.treatment_levels.size()
                                  ? data.treatment_levels[a - 1]
                                  : std::to_string(a);
    char line[160];
    std::snprintf(line, sizeof(line), "  arm %d (%s): min %.4f  mean %.4f  max %.4f\n", a,
                  label.c_str(), col.minCoeff(), col.mean(), col.maxCoeff());
    out << line;
    overall_min = std::min(overall_min, col.minCoeff());
    overall_max = std::max(overall_max, col.maxCoeff());
    overall_sum += col.sum();
  }
  char line[160];
  std::snprintf(line, sizeof(line), "  overall: min %.4f  mean %.4f  max %.4f\n", overall_min,
                overall_sum / (gps.rows() * gps.cols()), overall_max);
  out << line;
  if (overall_min < 0.01)
    out << "warning: some fitted GPS fall below 0.01 (weak overlap); interpret the"
           " sensitivity results with caution\n";
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeConfig {
  CommonConfig common;
  std::string data_path;
  CsvSchema schema;
  std::string model = "auto";  // logistic | mlogit | cratio | auto
  std::vector<std::pair<int, int>> contrasts;
  std::vector<double> gamma0_grid;  // log scale; default set after load
  double alpha = 0.10;
  int boot_reps = 1000;
  bool refit_gps = true;
  bool or_baseline = false;
  double ridge = 0.0;
  bool shared_slopes = false;
  bool backward_stages = false;
};

int run_analyze(const AnalyzeConfig& cfg_in) {
  AnalyzeConfig cfg = cfg_in;
  if (cfg.data_path.empty()) throw ValidationError("analyze needs --data or config 'data'");
  if (cfg.schema.treatment_column.empty() || cfg.schema.outcome_column.empty() ||
      cfg.schema.covariates.empty())
    throw SchemaError("schema must name a treatment column, an outcome column and covariates");

  const ObservationalDataset data = load_csv(cfg.data_path, cfg.schema);
  for (const auto& finding : validate(data))
    std::cerr << (finding.severity == Finding::Severity::error ? "error: " : "warning: ")
              << finding.message << "\n";

  std::cout << "loaded " << data.n() << " units, " << data.num_arms << " arms, " << data.dim()
            << " design columns\n";
  std::cout << "arm encoding:";
  for (int a = 1; a <= data.num_arms; ++a) std::cout << " " << a << "='" << data.treatment_levels[a - 1] << "'";
  std::cout << "\n";

  if (cfg.model == "auto") cfg.model = data.num_arms == 2 ? "logistic" : "mlogit";
  GpsSpec gps_spec;
  gps_spec.family = gps_family_from_string(cfg.model);
  gps_spec.fit.ridge = cfg.ridge;
  gps_spec.cratio.shared_slopes = cfg.shared_slopes;
  gps_spec.cratio.backward_stages = cfg.backward_stages;

  const GpsModel model = fit_gps(data, gps_spec);
  for (const auto& w : model.warnings) std::cerr << "warning: " << w.message << "\n";
  if (!model.converged)
    throw FitError("GPS model did not converge (" + std::to_string(model.iterations) +
                   " iterations); see warnings above, or try --ridge");
  const Eigen::MatrixXd gps = predict_gps(model, data.covariates);
  gps_range_report(data, gps, std::cout);

  if (cfg.contrasts.empty()) {
    for (int a = 1; a < data.num_arms; ++a) cfg.contrasts.push_back({a, data.num_arms});
  }
  std::vector<ContrastSpec> contrasts;
  for (const auto& [i, j] : cfg.contrasts)
    contrasts.push_back(ContrastSpec::pairwise(i, j, data.num_arms));

  if (cfg.gamma0_grid.empty()) {
    for (double Gamma0 : {1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75})
      cfg.gamma0_grid.push_back(std::log(Gamma0));
  }

  std::vector<SensitivityFamily> families = {SensitivityFamily::risk_ratio};
  if (cfg.or_baseline) families.push_back(SensitivityFamily::odds_ratio);

  struct Row {
    std::string estimand, family;
    IntervalEstimate est;
  };
  std::vector<Row> rows;
  for (const auto family : families) {
    std::vector<SensitivitySpec> specs;
    for (double g : cfg.gamma0_grid) specs.push_back({g, family});

    if (cfg.boot_reps >= 2) {
      BootstrapConfig boot;
      boot.reps = cfg.boot_reps;
      boot.alpha = cfg.alpha;
      boot.seed = cfg.common.seed;
      boot.refit_gps = cfg.refit_gps;
      boot.threads = cfg.common.threads;
      const auto grid = bootstrap_grid(data, gps_spec, contrasts, specs, boot);
      for (size_t c = 0; c < contrasts.size(); ++c)
        for (size_t s = 0; s < specs.size(); ++s)
          rows.push_back({contrasts[c].label(), to_string(family), grid[c][s]});
    } else {
      for (const auto& contrast : contrasts)
        for (const auto& spec : specs)
          rows.push_back({contrast.label(), to_string(family),
                          estimate_interval(data, gps, contrast, spec)});
    }
  }

  std::filesystem::create_directories(cfg.common.out_dir);
  const auto& formats = cfg.common.formats;
  auto opt_str = [](const std::optional<double>& v) { return v ? format_double(*v) : "NA"; };

  if (formats.count("csv")) {
    std::ostringstream out;
    out << "estimand,family,Gamma0,gamma0,point_lower,point_upper,ci_lower,ci_upper,alpha,"
           "bootstrap_reps\n";
    for (const auto& row : rows) {
      out << row.estimand << ',' << row.family << ',' << format_double(std::exp(row.est.gamma0))
          << ',' << format_double(row.est.gamma0) << ',' << format_double(row.est.point_lower)
          << ',' << format_double(row.est.point_upper) << ',' << opt_str(row.est.ci_lower) << ','
          << opt_str(row.est.ci_upper) << ','
          << (row.est.alpha ? format_double(*row.est.alpha) : "NA") << ','
          << (row.est.bootstrap_reps ? std::to_string(*row.est.bootstrap_reps) : "NA") << '\n';
    }
    write_text(join_path(cfg.common.out_dir, "results.csv"), out.str());
  }

  if (formats.count("json")) {
    json rows_json = json::array();
    for (const auto& row : rows) {
      json j{{"estimand", row.estimand},
             {"family", row.family},
             {"Gamma0", std::exp(row.est.gamma0)},
             {"gamma0", row.est.gamma0},
             {"point_lower", row.est.point_lower},
             {"point_upper", row.est.point_upper}};
      j["ci_lower"] = row.est.ci_lower ? json(*row.est.ci_lower) : json(nullptr);
      j["ci_upper"] = row.est.ci_upper ? json(*row.est.ci_upper) : json(nullptr);
      j["alpha"] = row.est.alpha ? json(*row.est.alpha) : json(nullptr);
      j["bootstrap_reps"] = row.est.bootstrap_reps ? json(*row.est.bootstrap_reps) : json(nullptr);
      rows_json.push_back(std::move(j));
    }
    json levels = json::array();
    for (const auto& level : data.treatment_levels) levels.push_back(level);
    const json doc{{"schema_version", kSchemaVersion},
                   {"type", "analysis"},
                   {"metadata",
                    {{"data", cfg.data_path},
                     {"model", to_string(gps_spec.family)},
                     {"n", data.n()},
                     {"num_arms", data.num_arms},
                     {"arm_levels", levels},
                     {"alpha", cfg.alpha},
                     {"bootstrap_reps", cfg.boot_reps},
                     {"refit_gps", cfg.refit_gps},
                     {"seed", cfg.common.seed},
                     {"quantile", "linear interpolation between order statistics (type 7)"}}},
                   {"rows", rows_json}};
    write_json(join_path(cfg.common.out_dir, "results.json"), doc);
    write_json(join_path(cfg.common.out_dir, "gps_model.json"), model.to_json());
  }

  if (formats.count("plotdata")) {
    std::ostringstream out;
    out << "estimand,family,Gamma0,solid_lower,solid_upper,dashed_lower,dashed_upper,midpoint\n";
    for (const auto& row : rows) {
      const double mid = 0.5 * (row.est.point_lower + row.est.point_upper);
      out << row.estimand << ',' << row.family << ',' << format_double(std::exp(row.est.gamma0))
          << ',' << format_double(row.est.point_lower) << ','
          << format_double(row.est.point_upper) << ',' << opt_str(row.est.ci_lower) << ','
          << opt_str(row.est.ci_upper) << ',' << format_double(mid) << '\n';
    }
    write_text(join_path(cfg.common.out_dir, "plotdata.csv"), out.str());
  }

  // console summary
  for (const auto& row : rows) {
    char line[200];
    if (row.est.ci_lower) {
      std::snprintf(line, sizeof(line),
                    "%s [%s] Gamma0=%.2f  point (%.3f, %.3f)  CI (%.3f, %.3f)\n",
                    row.estimand.c_str(), row.family.c_str(), std::exp(row.est.gamma0),
                    row.est.point_lower, row.est.point_upper, *row.est.ci_lower,
                    *row.est.ci_upper);
    } else {
      std::snprintf(line, sizeof(line), "%s [%s] Gamma0=%.2f  point (%.3f, %.3f)\n",
                    row.estimand.c_str(), row.family.c_str(), std::exp(row.est.gamma0),
                    row.est.point_lower, row.est.point_upper);
    }
    std::cout << line;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate / oracle

std::vector<ContrastSpec> default_three_arm_contrasts() {
  return {ContrastSpec::pairwise(1, 2, 3), ContrastSpec::pairwise(1, 3, 3),
          ContrastSpec::pairwise(2, 3, 3)};
}

int run_simulate(const ScenarioConfig& scenario, const std::vector<std::pair<int, int>>& pairs,
                 const CommonConfig& common) {
  std::vector<ContrastSpec> contrasts;
  if (pairs.empty()) {
    contrasts = default_three_arm_contrasts();
  } else {
    for (const auto& [i, j] : pairs) contrasts.push_back(ContrastSpec::pairwise(i, j, 3));
  }

  ScenarioConfig config = scenario;
  config.threads = common.threads;
  const StudyReport report = run_study(config, contrasts);

  std::filesystem::create_directories(common.out_dir);
  if (common.formats.count("csv"))
    write_text(join_path(common.out_dir, "results.csv"), report.to_csv());
  if (common.formats.count("json"))
    write_json(join_path(common.out_dir, "results.json"), report.to_json());

  if (report.failed_replicates > 0)
    std::cerr << "warning: " << report.failed_replicates << " replicates failed and were skipped\n";
  for (const auto& row : report.rows) {
    char line[240];
    std::snprintf(line, sizeof(line),
                  "%s gamma0=%.2f  non-coverage %.3f  median point (%.3f, %.3f)  true (%.3f, %.3f)%s\n",
                  row.contrast.c_str(), row.gamma0, row.non_coverage, row.med_point_lower,
                  row.med_point_upper, row.true_lower, row.true_upper,
                  row.overlap_warning ? "  [overlap warning]" : "");
    std::cout << line;
  }
  return 0;
}

int run_oracle(const ScenarioConfig& scenario, const std::vector<std::pair<int, int>>& pairs,
               const CommonConfig& common) {
  std::vector<ContrastSpec> contrasts;
  if (pairs.empty()) {
    contrasts = default_three_arm_contrasts();
  } else {
    for (const auto& [i, j] : pairs) contrasts.push_back(ContrastSpec::pairwise(i, j, 3));
  }

  const auto rows = oracle_table(scenario.k2, scenario.k3, scenario.oracle_n, scenario.oracle_seed,
                                 scenario.x3_reading, contrasts, scenario.gamma0_grid);

  std::filesystem::create_directories(common.out_dir);
  if (common.formats.count("csv")) {
    std::ostringstream out;
    out << "estimand,gamma0,Gamma0,true_lower,true_upper\n";
    for (const auto& row : rows)
      out << row.contrast << ',' << format_double(row.gamma0) << ',' << format_double(row.Gamma0)
          << ',' << format_double(row.lower) << ',' << format_double(row.upper) << '\n';
    write_text(join_path(common.out_dir, "results.csv"), out.str());
  }
  if (common.formats.count("json")) {
    json rows_json = json::array();
    for (const auto& row : rows)
      rows_json.push_back({{"estimand", row.contrast},
                           {"gamma0", row.gamma0},
                           {"Gamma0", row.Gamma0},
                           {"true_lower", row.lower},
                           {"true_upper", row.upper}});
    const json doc{{"schema_version", kSchemaVersion},
                   {"type", "oracle"},
                   {"metadata",
                    {{"k2", scenario.k2},
                     {"k3", scenario.k3},
                     {"oracle_n", scenario.oracle_n},
                     {"oracle_seed", scenario.oracle_seed},
                     {"x3_normal_reading",
                      scenario.x3_reading == NormalReading::sd ? "sd" : "variance"}}},
                   {"rows", rows_json}};
    write_json(join_path(common.out_dir, "results.json"), doc);
  }

  for (const auto& row : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%s gamma0=%.2f  true interval (%.4f, %.4f)\n",
                  row.contrast.c_str(), row.gamma0, row.lower, row.upper);
    std::cout << line;
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Risk-ratio sensitivity analysis for IPW causal effect estimates"};
  app.require_subcommand(1);

  // common flags, registered per subcommand so they can appear after it
  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> format_list;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    sub->add_option("--out", out_dir, "output directory (default '.')");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--threads", threads, "worker threads (0 = auto)");
    sub->add_option("--formats", format_list, "subset of csv,json,plotdata")->delimiter(',');
  };

  // analyze
  auto* analyze = app.add_subcommand("analyze", "sensitivity analysis of a CSV dataset");
  add_common(analyze);
  std::string data_path, treatment_col, outcome_col, model;
  std::vector<std::string> covariate_flags, contrast_flags, treatment_level_flags;
  std::string gamma_list, Gamma_list;
  double alpha = -1.0, ridge = -1.0;
  int boot_reps = -1;
  bool ordinal = false, or_baseline = false, no_refit = false, shared_slopes = false,
       backward_stages = false;
  analyze->add_option("--data", data_path, "input CSV file");
  analyze->add_option("--treatment-col", treatment_col, "treatment column name");
  analyze->add_option("--outcome-col", outcome_col, "outcome column name");
  analyze->add_option("--covariates", covariate_flags,
                      "covariate columns; name, name:cat, or name:cat=a|b|c")
      ->delimiter(',');
  analyze->add_option("--treatment-levels", treatment_level_flags,
                      "explicit arm label order (sets the 1..J encoding)")
      ->delimiter(',');
  analyze->add_flag("--ordinal", ordinal, "treat the treatment as ordinal");
  analyze->add_option("--model", model, "logistic | mlogit | cratio (default by arm count)");
  analyze->add_option("--contrast", contrast_flags, "pairwise contrast i:j (repeatable)");
  analyze->add_option("--gamma0", gamma_list, "comma list of gamma0 values (log scale)");
  analyze->add_option("--Gamma0", Gamma_list, "comma list of Gamma0 values (>= 1)");
  analyze->add_option("--alpha", alpha, "CI level alpha (default 0.10)");
  analyze->add_option("--boot", boot_reps, "bootstrap replicates B (0 disables CIs)");
  analyze->add_flag("--or-baseline", or_baseline, "also run the odds-ratio comparison model");
  analyze->add_flag("--no-refit", no_refit, "reuse the original GPS fit inside resamples");
  analyze->add_option("--ridge", ridge, "ridge penalty on non-intercept coefficients");
  analyze->add_flag("--shared-slopes", shared_slopes, "continuation-ratio: share slopes across stages");
  analyze->add_flag("--backward-stages", backward_stages, "continuation-ratio: fit stages high-to-low");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study on the built-in scenario");
  add_common(simulate);
  int sim_scenario = 1, sim_n = -1, sim_reps = -1, sim_boot = -1;
  double sim_k2 = NAN, sim_k3 = NAN, sim_alpha = -1.0;
  long long sim_oracle_n = -1;
  std::string sim_gamma_list, sim_x3 = "", sim_contrasts;
  std::vector<std::string> sim_contrast_flags;
  simulate->add_option("--scenario", sim_scenario, "preset 1 (overlap) or 2 (poor overlap)");
  simulate->add_option("--n", sim_n, "sample size per replicate");
  simulate->add_option("--reps", sim_reps, "Monte Carlo replicates");
  simulate->add_option("--k2", sim_k2, "overlap knob k2");
  simulate->add_option("--k3", sim_k3, "overlap knob k3");
  simulate->add_option("--boot", sim_boot, "bootstrap replicates per dataset");
  simulate->add_option("--alpha", sim_alpha, "CI level alpha");
  simulate->add_option("--gamma0", sim_gamma_list, "comma list of gamma0 values");
  simulate->add_option("--oracle-n", sim_oracle_n, "oracle draw size for true intervals");
  simulate->add_option("--x3-reading", sim_x3, "sd | variance reading of N(0, 0.5)");
  simulate->add_option("--contrast", sim_contrast_flags, "pairwise contrast i:j (repeatable)");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "true partially identified intervals");
  add_common(oracle);
  int ora_scenario = 1;
  double ora_k2 = NAN, ora_k3 = NAN;
  long long ora_n = -1;
  std::string ora_gamma_list, ora_Gamma_list, ora_x3 = "";
  std::vector<std::string> ora_contrast_flags;
  oracle->add_option("--scenario", ora_scenario, "preset 1 or 2");
  oracle->add_option("--k2", ora_k2, "overlap knob k2");
  oracle->add_option("--k3", ora_k3, "overlap knob k3");
  oracle->add_option("--oracle-n", ora_n, "number of oracle draws (>= 1e5)");
  oracle->add_option("--gamma0", ora_gamma_list, "comma list of gamma0 values");
  oracle->add_option("--Gamma0", ora_Gamma_list, "comma list of Gamma0 values (>= 1)");
  oracle->add_option("--x3-reading", ora_x3, "sd | variance reading of N(0, 0.5)");
  oracle->add_option("--contrast", ora_contrast_flags, "pairwise contrast i:j (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const json config = load_config_file(config_path);
    CLI::App* active = app.get_subcommands().at(0);

    CommonConfig common;
    common.out_dir = active->count("--out") ? out_dir : config.value("out", ".");
    common.seed =
        active->count("--seed") ? seed : config.value("seed", static_cast<std::uint64_t>(0));
    common.threads = active->count("--threads") ? threads : config.value("threads", 0);
    if (!format_list.empty()) {
      common.formats = std::set<std::string>(format_list.begin(), format_list.end());
    } else if (config.contains("formats")) {
      common.formats.clear();
      for (const auto& f : config.at("formats")) common.formats.insert(f.get<std::string>());
    }

    if (app.got_subcommand(analyze)) {
      AnalyzeConfig cfg;
      cfg.common = common;
      cfg.data_path = !data_path.empty() ? data_path : config.value("data", "");
      cfg.schema = schema_from_json(config.value("schema", json::object()));
      if (!treatment_col.empty()) cfg.schema.treatment_column = treatment_col;
      if (!outcome_col.empty()) cfg.schema.outcome_column = outcome_col;
      if (!covariate_flags.empty()) {
        cfg.schema.covariates.clear();
        for (const auto& flag : covariate_flags)
          cfg.schema.covariates.push_back(parse_covariate_flag(flag));
      }
      if (!treatment_level_flags.empty()) cfg.schema.treatment_levels = treatment_level_flags;
      if (ordinal) cfg.schema.ordinal_treatment = true;

      cfg.model = !model.empty() ? model : config.value("model", "auto");
      if (!contrast_flags.empty()) {
        for (const auto& flag : contrast_flags) cfg.contrasts.push_back(parse_contrast(flag));
      } else {
        for (const auto& pair : config.value("contrasts", json::array()))
          cfg.contrasts.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
      }
      if (!gamma_list.empty() && !Gamma_list.empty())
        throw ValidationError("--gamma0 and --Gamma0 are mutually exclusive");
      if (!gamma_list.empty()) {
        cfg.gamma0_grid = parse_double_list(gamma_list);
      } else if (!Gamma_list.empty()) {
        for (double Gamma0 : parse_double_list(Gamma_list))
          cfg.gamma0_grid.push_back(SensitivitySpec::from_Gamma0(Gamma0).gamma0);
      } else if (config.contains("gamma0_grid")) {
        for (const auto& g : config.at("gamma0_grid")) cfg.gamma0_grid.push_back(g.get<double>());
      } else if (config.contains("Gamma0_grid")) {
        for (const auto& G : config.at("Gamma0_grid"))
          cfg.gamma0_grid.push_back(SensitivitySpec::from_Gamma0(G.get<double>()).gamma0);
      }
      for (double g : cfg.gamma0_grid)
        if (!(g >= 0.0)) throw ValidationError("gamma0 values must be >= 0 (Gamma0 >= 1)");

      cfg.alpha = alpha > 0 ? alpha : config.value("alpha", 0.10);
      cfg.boot_reps = boot_reps >= 0 ? boot_reps
                                     : config.value("bootstrap", json::object()).value("reps", 1000);
      cfg.refit_gps = no_refit ? false
                               : config.value("bootstrap", json::object()).value("refit_gps", true);
      cfg.or_baseline = or_baseline || config.value("or_baseline", false);
      cfg.ridge = ridge >= 0 ? ridge : config.value("ridge", 0.0);
      cfg.shared_slopes = shared_slopes || config.value("shared_slopes", false);
      cfg.backward_stages = backward_stages || config.value("backward_stages", false);
      return run_analyze(cfg);
    }

    if (app.got_subcommand(simulate) || app.got_subcommand(oracle)) {
      const bool is_sim = app.got_subcommand(simulate);
      ScenarioConfig scenario = scenario_preset(
          is_sim ? (simulate->count("--scenario") ? sim_scenario : config.value("scenario", 1))
                 : (oracle->count("--scenario") ? ora_scenario : config.value("scenario", 1)));
      scenario.seed = common.seed;

      const double k2 = is_sim ? sim_k2 : ora_k2;
      const double k3 = is_sim ? sim_k3 : ora_k3;
      if (!std::isnan(k2)) scenario.k2 = k2;
      else if (config.contains("k2")) scenario.k2 = config.at("k2").get<double>();
      if (!std::isnan(k3)) scenario.k3 = k3;
      else if (config.contains("k3")) scenario.k3 = config.at("k3").get<double>();

      const std::string gammas = is_sim ? sim_gamma_list : ora_gamma_list;
      if (!gammas.empty()) {
        scenario.gamma0_grid = parse_double_list(gammas);
      } else if (!is_sim && !ora_Gamma_list.empty()) {
        scenario.gamma0_grid.clear();
        for (double Gamma0 : parse_double_list(ora_Gamma_list))
          scenario.gamma0_grid.push_back(SensitivitySpec::from_Gamma0(Gamma0).gamma0);
      } else if (config.contains("gamma0_grid")) {
        scenario.gamma0_grid.clear();
        for (const auto& g : config.at("gamma0_grid"))
          scenario.gamma0_grid.push_back(g.get<double>());
      }

      const long long oracle_n = is_sim ? sim_oracle_n : ora_n;
      if (oracle_n > 0) scenario.oracle_n = oracle_n;
      else if (config.contains("oracle_n")) scenario.oracle_n = config.at("oracle_n").get<long long>();
      scenario.oracle_seed = config.value("oracle_seed", scenario.oracle_seed);

      const std::string x3 = is_sim ? sim_x3 : ora_x3;
      const std::string x3_cfg = !x3.empty() ? x3 : config.value("x3_reading", "sd");
      if (x3_cfg == "sd") scenario.x3_reading = NormalReading::sd;
      else if (x3_cfg == "variance") scenario.x3_reading = NormalReading::variance;
      else throw ValidationError("--x3-reading must be 'sd' or 'variance'");

      std::vector<std::pair<int, int>> pairs;
      const auto& flags = is_sim ? sim_contrast_flags : ora_contrast_flags;
      if (!flags.empty()) {
        for (const auto& flag : flags) pairs.push_back(parse_contrast(flag));
      } else {
        for (const auto& pair : config.value("contrasts", json::array()))
          pairs.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
      }

      if (is_sim) {
        if (sim_n > 0) scenario.n = sim_n;
        else if (config.contains("n")) scenario.n = config.at("n").get<int>();
        if (sim_reps > 0) scenario.reps = sim_reps;
        else if (config.contains("reps")) scenario.reps = config.at("reps").get<int>();
        scenario.bootstrap.reps =
            sim_boot >= 2 ? sim_boot
                          : config.value("bootstrap", json::object()).value("reps", 1000);
        scenario.bootstrap.alpha =
            sim_alpha > 0 ? sim_alpha
                          : config.value("bootstrap", json::object()).value("alpha", 0.10);
        scenario.bootstrap.refit_gps =
            config.value("bootstrap", json::object()).value("refit_gps", true);
        return run_simulate(scenario, pairs, common);
      }
      return run_oracle(scenario, pairs, common);
    }

    return 1;  // unreachable: require_subcommand(1)
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rrsens::cli
