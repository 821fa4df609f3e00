#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrsens {

inline constexpr int kSchemaVersion = 1;  // stamped into every JSON artifact
inline constexpr const char* kVersion = "0.1.0";

struct SchemaError : std::runtime_error { using std::runtime_error::runtime_error; };
struct ParseError : std::runtime_error { using std::runtime_error::runtime_error; };
struct ValidationError : std::runtime_error { using std::runtime_error::runtime_error; };
struct FitError : std::runtime_error { using std::runtime_error::runtime_error; };
struct PositivityError : std::runtime_error { using std::runtime_error::runtime_error; };
struct InstabilityError : std::runtime_error { using std::runtime_error::runtime_error; };

struct Finding {
  enum class Severity { warning, error };
  Severity severity = Severity::error;
  std::string message;
  std::optional<int> row;  // 1-based data row, when the finding points at one
};

/// Units of an observational study: covariates (optionally led by a constant
/// intercept column), integer arm labels in 1..num_arms, and real outcomes.
/// Immutable after construction; safe to share across threads.
struct ObservationalDataset {
  Eigen::MatrixXd covariates;
  Eigen::VectorXi treatment;
  Eigen::VectorXd outcome;
  int num_arms = 0;
  bool has_intercept = false;
  bool ordinal_treatment = false;
  std::vector<std::string> covariate_names;   // empty for programmatic datasets
  std::vector<std::string> treatment_levels;  // original label of arm a at index a-1

  int n() const { return static_cast<int>(outcome.size()); }
  int dim() const { return static_cast<int>(covariates.cols()); }

  Eigen::VectorXi arm_sizes() const;
  std::vector<int> arm_indices(int arm) const;

  /// Validating factory; throws ValidationError when any invariant fails
  /// (row counts, label range, empty arms, non-finite values).
  static ObservationalDataset create(Eigen::MatrixXd covariates, Eigen::VectorXi treatment,
                                     Eigen::VectorXd outcome, int num_arms = 0,
                                     bool has_intercept = false, bool ordinal = false);
};

/// Invariant check as a report: one finding per violation, empty when clean.
std::vector<Finding> validate(const ObservationalDataset& data);

/// Contrast vector c over arms defining the additive estimand
/// sum_a c[a] * E[Y(a)].
struct ContrastSpec {
  Eigen::VectorXd coefficients;

  /// +1 at arm_i, -1 at arm_j (1-based): the pairwise effect E[Y(i)]-E[Y(j)].
  static ContrastSpec pairwise(int arm_i, int arm_j, int num_arms);

  std::string label() const;  // "tau_{i,j}" for pairwise contrasts
};

/// Partially identified point-estimate interval, optionally with a
/// percentile-bootstrap confidence interval around it.
struct IntervalEstimate {
  double point_lower = 0.0;
  double point_upper = 0.0;
  std::optional<double> ci_lower;
  std::optional<double> ci_upper;
  std::optional<double> alpha;
  std::optional<int> bootstrap_reps;
  double gamma0 = 0.0;  // log-scale sensitivity parameter the interval was computed at
};

}  // namespace rrsens
