#pragma once

#include "rrsens/boot.hpp"
#include "rrsens/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <vector>

namespace rrsens {

/// How to read the scale parameter of the x3 ~ N(0, 0.5) covariate.
enum class NormalReading { sd, variance };

/// Three-arm benchmark scenario: treatment assignment and a categorical
/// potential-outcome draw, both softmax-linear in (1, x1, x2, x3). k2 and k3
/// steer the overlap between arms.
struct ScenarioConfig {
  int n = 750;
  double k2 = 0.1;
  double k3 = -0.1;
  std::uint64_t seed = 0;
  std::vector<double> gamma0_grid = {0.0, 0.1, 0.2, 0.5, 1.0, 2.0};
  int reps = 1000;
  BootstrapConfig bootstrap;
  NormalReading x3_reading = NormalReading::sd;
  long long oracle_n = 1000000;
  std::uint64_t oracle_seed = 20260809;
  double max_failure_rate = 0.05;
  int threads = 0;  // replicate-level parallelism; never echoed into outputs
};

/// Preset overlap scenarios: 1 = adequate overlap (k2, k3) = (0.1, -0.1),
/// 2 = poor overlap (3, 3).
ScenarioConfig scenario_preset(int scenario);

struct ScenarioDraw {
  ObservationalDataset data;
  Eigen::MatrixXd true_gps;            // n x 3
  Eigen::MatrixXd potential_outcomes;  // n x 3, Y(a) = 1{C == a}
};

/// Draws one replicate; the stream is a pure function of (config.seed,
/// replicate), so replicates are independent and reproducible in any order.
ScenarioDraw generate_scenario(const ScenarioConfig& config, int replicate);

/// Large-sample numerical approximation of the partially identified interval,
/// extremizing with the true (not fitted) generalized propensity scores.
/// Requires n_oracle >= 1e5.
std::pair<double, double> true_partially_identified_interval(
    const ContrastSpec& contrast, double gamma0, double k2, double k3, long long n_oracle,
    std::uint64_t seed, NormalReading x3_reading = NormalReading::sd);

struct OracleRow {
  std::string contrast;
  double gamma0 = 0.0;
  double Gamma0 = 1.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// One oracle draw shared across the whole (contrast, gamma0) grid.
std::vector<OracleRow> oracle_table(double k2, double k3, long long n_oracle, std::uint64_t seed,
                                    NormalReading x3_reading,
                                    const std::vector<ContrastSpec>& contrasts,
                                    const std::vector<double>& gamma0_grid);

struct StudyRow {
  std::string contrast;
  double gamma0 = 0.0;
  double Gamma0 = 1.0;
  std::optional<double> pct_bias_lower;  // 100 * mean(est - true) / sd(est)
  std::optional<double> pct_bias_upper;
  double non_coverage = 0.0;  // share of replicates whose CI misses part of the true interval
  double true_lower = 0.0, true_upper = 0.0;
  double med_point_lower = 0.0, med_point_upper = 0.0;
  double med_ci_lower = 0.0, med_ci_upper = 0.0;
  bool overlap_warning = false;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  nlohmann::json metadata;
  int failed_replicates = 0;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Monte Carlo study over the gamma0 grid: per replicate, draw data, fit the
/// multinomial-logit GPS, compute point intervals and bootstrap CIs, then
/// aggregate bias (in SD units), non-coverage against the oracle interval,
/// and median endpoints. Aborts when more than max_failure_rate of the
/// replicates fail to produce an estimate.
StudyReport run_study(const ScenarioConfig& config, const std::vector<ContrastSpec>& contrasts);

}  // namespace rrsens
