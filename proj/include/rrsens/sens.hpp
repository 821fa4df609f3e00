#pragma once

#include "rrsens/types.hpp"

namespace rrsens {

enum class SensitivityFamily { risk_ratio, odds_ratio };

std::string to_string(SensitivityFamily family);
SensitivityFamily sensitivity_family_from_string(const std::string& name);

/// Magnitude of unmeasured confounding on the log scale: Gamma0 = exp(gamma0)
/// bounds the risk ratio (or odds ratio, for the baseline family) between the
/// observed propensity score and any admissible true propensity score.
struct SensitivitySpec {
  double gamma0 = 0.0;
  SensitivityFamily family = SensitivityFamily::risk_ratio;

  double Gamma0() const;
  static SensitivitySpec from_Gamma0(double Gamma0,
                                     SensitivityFamily family = SensitivityFamily::risk_ratio);
};

/// Admissible range of z_i = exp(l(X_i, Y_i)), the per-unit multiplicative
/// shift of the observed propensity score. The implied true propensity is
/// e_i / z_i, kept inside (0, 1] by the unit-specific lower bound.
struct UnitBounds {
  Eigen::VectorXd z_lo;
  Eigen::VectorXd z_hi;
};

/// Bounds for each unit's received-arm propensity. Risk-ratio family:
/// z in [max(e_i, 1/Gamma0), Gamma0]. Odds-ratio family: the true propensity
/// ranges over [sigmoid(logit e_i - gamma0), sigmoid(logit e_i + gamma0)],
/// re-expressed as bounds on z = e_i / e.
UnitBounds compute_z_bounds(const Eigen::VectorXd& gps_received, const SensitivitySpec& spec);

/// Candidate true propensity implied by shift z: e_beta / z.
double shifted_propensity(double e_beta, double z);

enum class Direction { minimize, maximize };

struct ExtremizeResult {
  double value = 0.0;
  Eigen::VectorXd z;  // optimizer, in input order
};

/// Exact optimum of the weighted mean sum(y*u*z) / sum(u*z) over the box
/// z_lo <= z <= z_hi. The optimizer has threshold form in the order of y, so
/// sorting once and scanning the m+1 prefix splits finds the global optimum
/// in O(m log m); ties in y cannot change the optimal value.
ExtremizeResult extremize_weighted_mean(const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& z_lo, const Eigen::VectorXd& z_hi,
                                        Direction direction);

/// Plain stabilized-IPW point estimate of the contrast (the gamma0 = 0 value).
double sipw_point_estimate(const ObservationalDataset& data, const Eigen::MatrixXd& gps,
                           const ContrastSpec& contrast);

/// Partially identified interval of the contrast under the sensitivity model:
/// each arm's stabilized weighted mean is extremized over its own box and the
/// endpoints combine by the sign of the contrast coefficients.
IntervalEstimate estimate_interval(const ObservationalDataset& data, const Eigen::MatrixXd& gps,
                                   const ContrastSpec& contrast, const SensitivitySpec& spec);

}  // namespace rrsens
