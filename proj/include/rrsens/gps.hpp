#pragma once

#include "rrsens/types.hpp"

#include <nlohmann/json.hpp>

namespace rrsens {

enum class GpsFamily { binary_logistic, multinomial_logit, continuation_ratio };

std::string to_string(GpsFamily family);
GpsFamily gps_family_from_string(const std::string& name);

struct FitOptions {
  int max_iterations = 100;
  double coef_tol = 1e-8;         // max absolute coefficient change
  double loglik_rel_tol = 1e-10;  // relative log-likelihood change
  int max_step_halvings = 20;
  double ridge = 0.0;  // optional penalty on non-intercept terms (separation escape hatch)
};

/// Fitted (generalized) propensity score model. Coefficient layout by family:
///   binary_logistic     1 x d, log-odds of arm 2 vs arm 1
///   multinomial_logit   (J-1) x d, rows are arms 2..J against reference arm 1
///   continuation_ratio  (J-1) x d, row s is the stage-s exit model
///                       (shared-slope variant: per-stage intercept, common slopes)
struct GpsModel {
  GpsFamily family = GpsFamily::binary_logistic;
  Eigen::MatrixXd coefficients;
  int num_arms = 2;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  bool shared_slopes = false;  // continuation-ratio only
  bool backward_stages = false;
  std::vector<Finding> warnings;
  std::vector<double> loglik_trace;  // one entry per accepted iteration

  nlohmann::json to_json() const;
  static GpsModel from_json(const nlohmann::json& doc);
};

struct CratioOptions {
  bool shared_slopes = false;
  bool backward_stages = false;  // fit stages from the highest arm downwards
};

GpsModel fit_binary_logistic(const ObservationalDataset& data, const FitOptions& opts = {});
GpsModel fit_multinomial_logit(const ObservationalDataset& data, const FitOptions& opts = {});
GpsModel fit_continuation_ratio(const ObservationalDataset& data, const CratioOptions& cr = {},
                                const FitOptions& opts = {});

/// Family selector used by callers that refit on resampled data.
struct GpsSpec {
  GpsFamily family = GpsFamily::multinomial_logit;
  CratioOptions cratio;
  FitOptions fit;
};

GpsModel fit_gps(const ObservationalDataset& data, const GpsSpec& spec);

/// Per-unit arm probabilities, row-stochastic, clamped to [1e-12, 1-1e-12]
/// so downstream log transforms stay finite. Refuses unconverged models
/// unless allow_unconverged is set.
Eigen::MatrixXd predict_gps(const GpsModel& model, const Eigen::MatrixXd& covariates,
                            bool allow_unconverged = false);

// Exact likelihood surfaces. The fitters climb these; tests difference them.
double binary_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y01,
                     const Eigen::VectorXd& beta);
Eigen::VectorXd binary_loglik_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y01,
                                       const Eigen::VectorXd& beta);
double multinomial_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXi& arm,
                          const Eigen::MatrixXd& beta);
Eigen::MatrixXd multinomial_loglik_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXi& arm,
                                            const Eigen::MatrixXd& beta);
/// Forward stage-specific continuation-ratio likelihood; stage_coefs is
/// (J-1) x d as in GpsModel.
double cratio_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXi& arm, int num_arms,
                     const Eigen::MatrixXd& stage_coefs);
Eigen::MatrixXd cratio_loglik_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXi& arm,
                                       int num_arms, const Eigen::MatrixXd& stage_coefs);

}  // namespace rrsens
