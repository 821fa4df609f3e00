#include "rrsens/sim.hpp"

#include "rrsens/csv.hpp"
#include "rrsens/parallel.hpp"
#include "rrsens/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace rrsens {

namespace {

constexpr std::uint64_t kScenarioSalt = 0x5c3a'a21fULL;
constexpr std::uint64_t kOracleSalt = 0x0aac'1e00ULL;
constexpr std::uint64_t kReplicateBootSalt = 0x0b00'75edULL;
constexpr double kOverlapWarnThreshold = 0.01;

void check_config(const ScenarioConfig& config) {
  if (config.n < 1) throw ValidationError("scenario n must be >= 1");
  if (config.reps < 1) throw ValidationError("scenario reps must be >= 1");
  if (config.gamma0_grid.empty()) throw ValidationError("gamma0 grid must be non-empty");
  for (double g : config.gamma0_grid)
    if (!(g >= 0.0)) throw ValidationError("gamma0 values must be >= 0");
}

Eigen::Vector3d softmax3(const Eigen::Vector3d& v) {
  const double top = v.maxCoeff();
  Eigen::Vector3d e = (v.array() - top).exp();
  return e / e.sum();
}

ScenarioDraw generate_impl(const ScenarioConfig& config, int replicate, std::uint64_t salt,
                           long long n_override) {
  const long long n = n_override > 0 ? n_override : config.n;
  const double x3_sd =
      config.x3_reading == NormalReading::sd ? 0.5 : std::sqrt(0.5);

  Eigen::Matrix<double, 4, 3> beta = Eigen::Matrix<double, 4, 3>::Zero();
  beta.col(1) = config.k2 * Eigen::Vector4d(0, 1, 1, 1);
  beta.col(2) = config.k3 * Eigen::Vector4d(0, 1, 1, -1);
  Eigen::Matrix<double, 4, 3> delta;
  delta.col(0) = Eigen::Vector4d(1, 1, 1, 1);
  delta.col(1) = Eigen::Vector4d(1, 1, -1, 1);
  delta.col(2) = Eigen::Vector4d(1, 1, 1, -1);

  Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(replicate), salt);

  ScenarioDraw draw;
  draw.data.covariates.resize(n, 4);
  draw.data.treatment.resize(n);
  draw.data.outcome.resize(n);
  draw.true_gps.resize(n, 3);
  draw.potential_outcomes.resize(n, 3);

  for (long long i = 0; i < n; ++i) {
    draw.data.covariates(i, 0) = 1.0;
    draw.data.covariates(i, 1) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    draw.data.covariates(i, 2) = rng.uniform(-1.0, 1.0);
    draw.data.covariates(i, 3) = rng.normal(0.0, x3_sd);
  }
  for (long long i = 0; i < n; ++i) {
    const Eigen::Vector4d x = draw.data.covariates.row(i).transpose();
    const Eigen::Vector3d r = softmax3(beta.transpose() * x);
    draw.true_gps.row(i) = r.transpose();
    draw.data.treatment[i] = rng.categorical(r.data(), 3) + 1;
  }
  for (long long i = 0; i < n; ++i) {
    const Eigen::Vector4d x = draw.data.covariates.row(i).transpose();
    const Eigen::Vector3d p_y = softmax3(delta.transpose() * x);
    const int category = rng.categorical(p_y.data(), 3) + 1;
    for (int a = 1; a <= 3; ++a) draw.potential_outcomes(i, a - 1) = (category == a) ? 1.0 : 0.0;
    draw.data.outcome[i] = draw.potential_outcomes(i, draw.data.treatment[i] - 1);
  }

  draw.data.num_arms = 3;
  draw.data.has_intercept = true;
  draw.data.ordinal_treatment = false;
  draw.data.covariate_names = {"(Intercept)", "x1", "x2", "x3"};
  draw.data.treatment_levels = {"1", "2", "3"};
  return draw;
}

double sample_sd(const std::vector<double>& values) {
  const size_t n = values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return quantile_linear(values, 0.5);
}

}  // namespace

ScenarioConfig scenario_preset(int scenario) {
  ScenarioConfig config;
  if (scenario == 1) {
    config.k2 = 0.1;
    config.k3 = -0.1;
  } else if (scenario == 2) {
    config.k2 = 3.0;
    config.k3 = 3.0;
  } else {
    throw ValidationError("scenario preset must be 1 or 2");
  }
  return config;
}

ScenarioDraw generate_scenario(const ScenarioConfig& config, int replicate) {
  check_config(config);
  return generate_impl(config, replicate, kScenarioSalt, 0);
}

std::pair<double, double> true_partially_identified_interval(const ContrastSpec& contrast,
                                                             double gamma0, double k2, double k3,
                                                             long long n_oracle,
                                                             std::uint64_t seed,
                                                             NormalReading x3_reading) {
  const auto rows = oracle_table(k2, k3, n_oracle, seed, x3_reading, {contrast}, {gamma0});
  return {rows[0].lower, rows[0].upper};
}

std::vector<OracleRow> oracle_table(double k2, double k3, long long n_oracle, std::uint64_t seed,
                                    NormalReading x3_reading,
                                    const std::vector<ContrastSpec>& contrasts,
                                    const std::vector<double>& gamma0_grid) {
  if (n_oracle < 100000)
    throw ValidationError("oracle approximation needs at least 1e5 draws");
  ScenarioConfig config;
  config.n = 1;  // unused; generate_impl takes the override
  config.k2 = k2;
  config.k3 = k3;
  config.seed = seed;
  config.x3_reading = x3_reading;
  const ScenarioDraw draw = generate_impl(config, 0, kOracleSalt, n_oracle);

  std::vector<OracleRow> rows;
  for (const auto& contrast : contrasts) {
    for (double gamma0 : gamma0_grid) {
      const SensitivitySpec spec{gamma0, SensitivityFamily::risk_ratio};
      const IntervalEstimate est = estimate_interval(draw.data, draw.true_gps, contrast, spec);
      rows.push_back(
          {contrast.label(), gamma0, std::exp(gamma0), est.point_lower, est.point_upper});
    }
  }
  return rows;
}

StudyReport run_study(const ScenarioConfig& config, const std::vector<ContrastSpec>& contrasts) {
  check_config(config);
  if (contrasts.empty()) throw ValidationError("run_study needs at least one contrast");

  const size_t n_gamma = config.gamma0_grid.size();
  const size_t cells = contrasts.size() * n_gamma;

  const std::vector<OracleRow> truth =
      oracle_table(config.k2, config.k3, config.oracle_n, config.oracle_seed, config.x3_reading,
                   contrasts, config.gamma0_grid);

  std::vector<SensitivitySpec> specs;
  for (double g : config.gamma0_grid) specs.push_back({g, SensitivityFamily::risk_ratio});

  const int reps = config.reps;
  std::vector<double> est_lo(cells * reps), est_hi(cells * reps), ci_lo(cells * reps),
      ci_hi(cells * reps);
  std::vector<double> replicate_min_gps(reps, 1.0);
  std::vector<char> failed(reps, 0);
  std::vector<std::string> failure_reason(reps);

  GpsSpec gps_spec;
  gps_spec.family = GpsFamily::multinomial_logit;

  parallel_for(reps, config.threads, [&](int r) {
    try {
      const ScenarioDraw draw = generate_scenario(config, r);

      const GpsModel model = fit_gps(draw.data, gps_spec);
      if (!model.converged) throw FitError("GPS fit did not converge on the replicate draw");
      replicate_min_gps[r] = predict_gps(model, draw.data.covariates).minCoeff();

      BootstrapConfig boot = config.bootstrap;
      boot.seed = derive_seed(config.seed, static_cast<std::uint64_t>(r), kReplicateBootSalt);
      boot.threads = 1;
      const auto grid = bootstrap_grid(draw.data, gps_spec, contrasts, specs, boot);

      for (size_t c = 0; c < contrasts.size(); ++c) {
        for (size_t g = 0; g < n_gamma; ++g) {
          const IntervalEstimate& est = grid[c][g];
          const size_t cell = c * n_gamma + g;
          est_lo[cell * reps + r] = est.point_lower;
          est_hi[cell * reps + r] = est.point_upper;
          ci_lo[cell * reps + r] = *est.ci_lower;
          ci_hi[cell * reps + r] = *est.ci_upper;
        }
      }
    } catch (const std::exception& e) {
      failed[r] = 1;
      failure_reason[r] = e.what();
    }
  });

  const int failures = static_cast<int>(std::count(failed.begin(), failed.end(), char(1)));
  if (failures > config.max_failure_rate * reps) {
    std::map<std::string, int> reasons;
    for (int r = 0; r < reps; ++r)
      if (failed[r]) ++reasons[failure_reason[r]];
    std::ostringstream msg;
    msg << "simulation aborted: " << failures << " of " << reps << " replicates failed:";
    for (const auto& [reason, count] : reasons) msg << "\n  " << count << "x " << reason;
    throw InstabilityError(msg.str());
  }

  double min_gps_overall = 1.0;
  for (int r = 0; r < reps; ++r)
    if (!failed[r]) min_gps_overall = std::min(min_gps_overall, replicate_min_gps[r]);
  const bool overlap_warning = min_gps_overall < kOverlapWarnThreshold;

  StudyReport report;
  report.failed_replicates = failures;
  for (size_t c = 0; c < contrasts.size(); ++c) {
    for (size_t g = 0; g < n_gamma; ++g) {
      const size_t cell = c * n_gamma + g;
      const OracleRow& truth_row = truth[cell];

      std::vector<double> lo, hi, clo, chi;
      for (int r = 0; r < reps; ++r) {
        if (failed[r]) continue;
        lo.push_back(est_lo[cell * reps + r]);
        hi.push_back(est_hi[cell * reps + r]);
        clo.push_back(ci_lo[cell * reps + r]);
        chi.push_back(ci_hi[cell * reps + r]);
      }

      StudyRow row;
      row.contrast = contrasts[c].label();
      row.gamma0 = config.gamma0_grid[g];
      row.Gamma0 = std::exp(row.gamma0);
      row.true_lower = truth_row.lower;
      row.true_upper = truth_row.upper;

      const double sd_lo = sample_sd(lo);
      const double sd_hi = sample_sd(hi);
      if (lo.size() >= 2 && sd_lo > 0.0) {
        double bias = 0.0;
        for (double v : lo) bias += v - truth_row.lower;
        row.pct_bias_lower = 100.0 * (bias / static_cast<double>(lo.size())) / sd_lo;
      }
      if (hi.size() >= 2 && sd_hi > 0.0) {
        double bias = 0.0;
        for (double v : hi) bias += v - truth_row.upper;
        row.pct_bias_upper = 100.0 * (bias / static_cast<double>(hi.size())) / sd_hi;
      }

      int misses = 0;
      for (size_t r = 0; r < clo.size(); ++r)
        if (clo[r] > truth_row.lower || chi[r] < truth_row.upper) ++misses;
      row.non_coverage = clo.empty() ? 0.0 : static_cast<double>(misses) / clo.size();

      row.med_point_lower = median_of(lo);
      row.med_point_upper = median_of(hi);
      row.med_ci_lower = median_of(clo);
      row.med_ci_upper = median_of(chi);
      row.overlap_warning = overlap_warning;
      report.rows.push_back(std::move(row));
    }
  }

  nlohmann::json grid_json = nlohmann::json::array();
  for (double g : config.gamma0_grid) grid_json.push_back(g);
  report.metadata = nlohmann::json{
      {"n", config.n},
      {"k2", config.k2},
      {"k3", config.k3},
      {"seed", config.seed},
      {"reps", config.reps},
      {"gamma0_grid", std::move(grid_json)},
      {"bootstrap",
       {{"reps", config.bootstrap.reps},
        {"alpha", config.bootstrap.alpha},
        {"refit_gps", config.bootstrap.refit_gps}}},
      {"oracle_n", config.oracle_n},
      {"oracle_seed", config.oracle_seed},
      {"x3_normal_reading", config.x3_reading == NormalReading::sd ? "sd" : "variance"},
      {"failed_replicates", failures},
      {"min_fitted_gps", min_gps_overall},
      {"definitions",
       {{"pct_bias", "100 * mean(estimated bound - true bound) / sample SD of estimated bound"},
        {"non_coverage", "share of replicates with ci_lower > true_lower or ci_upper < true_upper"},
        {"quantile", "linear interpolation between order statistics (type 7)"}}}};
  return report;
}

std::string StudyReport::to_csv() const {
  std::ostringstream out;
  out << "contrast,gamma0,Gamma0,pct_bias_lower,pct_bias_upper,non_coverage,true_lower,"
         "true_upper,med_point_lower,med_point_upper,med_ci_lower,med_ci_upper,overlap_warning\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : "NA"; };
  for (const auto& row : rows) {
    out << row.contrast << ',' << format_double(row.gamma0) << ',' << format_double(row.Gamma0)
        << ',' << opt(row.pct_bias_lower) << ',' << opt(row.pct_bias_upper) << ','
        << format_double(row.non_coverage) << ',' << format_double(row.true_lower) << ','
        << format_double(row.true_upper) << ',' << format_double(row.med_point_lower) << ','
        << format_double(row.med_point_upper) << ',' << format_double(row.med_ci_lower) << ','
        << format_double(row.med_ci_upper) << ',' << (row.overlap_warning ? 1 : 0) << '\n';
  }
  return out.str();
}

nlohmann::json StudyReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json j{{"contrast", row.contrast},
                     {"gamma0", row.gamma0},
                     {"Gamma0", row.Gamma0},
                     {"non_coverage", row.non_coverage},
                     {"true_lower", row.true_lower},
                     {"true_upper", row.true_upper},
                     {"med_point_lower", row.med_point_lower},
                     {"med_point_upper", row.med_point_upper},
                     {"med_ci_lower", row.med_ci_lower},
                     {"med_ci_upper", row.med_ci_upper},
                     {"overlap_warning", row.overlap_warning}};
    j["pct_bias_lower"] = row.pct_bias_lower ? nlohmann::json(*row.pct_bias_lower)
                                             : nlohmann::json(nullptr);
    j["pct_bias_upper"] = row.pct_bias_upper ? nlohmann::json(*row.pct_bias_upper)
                                             : nlohmann::json(nullptr);
    rows_json.push_back(std::move(j));
  }
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"type", "study_report"},
                        {"metadata", metadata},
                        {"rows", std::move(rows_json)}};
}

}  // namespace rrsens
