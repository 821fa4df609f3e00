#include "rrsens/sens.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace rrsens {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(SensitivityFamily family) {
  return family == SensitivityFamily::risk_ratio ? "risk_ratio" : "odds_ratio";
}

SensitivityFamily sensitivity_family_from_string(const std::string& name) {
  if (name == "risk_ratio" || name == "rr") return SensitivityFamily::risk_ratio;
  if (name == "odds_ratio" || name == "or") return SensitivityFamily::odds_ratio;
  throw ValidationError("unknown sensitivity family '" + name + "'");
}

double SensitivitySpec::Gamma0() const { return std::exp(gamma0); }

SensitivitySpec SensitivitySpec::from_Gamma0(double Gamma0, SensitivityFamily family) {
  if (!(Gamma0 >= 1.0)) throw ValidationError("Gamma0 must be >= 1");
  return SensitivitySpec{std::log(Gamma0), family};
}

UnitBounds compute_z_bounds(const Eigen::VectorXd& gps_received, const SensitivitySpec& spec) {
  if (!(spec.gamma0 >= 0.0)) throw ValidationError("gamma0 must be >= 0");
  const int n = static_cast<int>(gps_received.size());
  for (int i = 0; i < n; ++i) {
    const double e = gps_received[i];
    if (!(e > 0.0) || !(e < 1.0)) {
      std::ostringstream msg;
      msg << "propensity score " << e << " at position " << i << " must lie strictly in (0,1)";
      throw std::domain_error(msg.str());
    }
  }

  const double Gamma0 = spec.Gamma0();
  UnitBounds bounds;
  bounds.z_lo.resize(n);
  bounds.z_hi.resize(n);
  if (spec.family == SensitivityFamily::risk_ratio) {
    for (int i = 0; i < n; ++i) {
      // Gamma1 = max(e, 1/Gamma0) keeps the implied true propensity <= 1.
      bounds.z_lo[i] = std::max(gps_received[i], 1.0 / Gamma0);
      bounds.z_hi[i] = Gamma0;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double e = gps_received[i];
      const double e_hi = sigmoid(logit(e) + spec.gamma0);
      const double e_lo = sigmoid(logit(e) - spec.gamma0);
      bounds.z_lo[i] = e / e_hi;
      bounds.z_hi[i] = e / e_lo;
    }
  }
  return bounds;
}

double shifted_propensity(double e_beta, double z) { return e_beta / z; }

ExtremizeResult extremize_weighted_mean(const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& z_lo, const Eigen::VectorXd& z_hi,
                                        Direction direction) {
  const int m = static_cast<int>(y.size());
  if (m < 1) throw ValidationError("extremize_weighted_mean needs at least one unit");
  if (u.size() != m || z_lo.size() != m || z_hi.size() != m)
    throw ValidationError("extremize_weighted_mean inputs must have equal length");
  for (int i = 0; i < m; ++i) {
    if (!(u[i] > 0.0)) throw ValidationError("weights u must be positive");
    if (!(z_lo[i] > 0.0) || !(z_lo[i] <= z_hi[i]))
      throw ValidationError("bounds must satisfy 0 < z_lo <= z_hi");
  }

  const bool maximize = direction == Direction::maximize;
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return maximize ? y[a] > y[b] : y[a] < y[b];
  });

  // Split k puts the k leading units (largest y when maximizing) at z_hi and
  // the rest at z_lo. Suffix sums make each of the m+1 candidates O(1).
  std::vector<double> num_lo_suffix(m + 1, 0.0), den_lo_suffix(m + 1, 0.0);
  for (int i = m - 1; i >= 0; --i) {
    const int idx = order[i];
    const double w = u[idx] * z_lo[idx];
    num_lo_suffix[i] = num_lo_suffix[i + 1] + y[idx] * w;
    den_lo_suffix[i] = den_lo_suffix[i + 1] + w;
  }

  double best_value = 0.0;
  int best_split = -1;
  double num_hi = 0.0, den_hi = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double value = (num_hi + num_lo_suffix[k]) / (den_hi + den_lo_suffix[k]);
    if (best_split < 0 || (maximize ? value > best_value : value < best_value)) {
      best_value = value;
      best_split = k;
    }
    if (k < m) {
      const int idx = order[k];
      const double w = u[idx] * z_hi[idx];
      num_hi += y[idx] * w;
      den_hi += w;
    }
  }

  ExtremizeResult result;
  result.value = best_value;
  result.z.resize(m);
  for (int i = 0; i < m; ++i) {
    const int idx = order[i];
    result.z[idx] = i < best_split ? z_hi[idx] : z_lo[idx];
  }
  return result;
}

namespace {

struct ArmSlice {
  Eigen::VectorXd y;
  Eigen::VectorXd u;  // 1 / e_hat for the received arm
  Eigen::VectorXd e;
};

ArmSlice slice_arm(const ObservationalDataset& data, const Eigen::MatrixXd& gps, int arm) {
  const auto idx = data.arm_indices(arm);
  if (idx.empty()) {
    std::ostringstream msg;
    msg << "arm " << arm << " is referenced by the contrast but has no units";
    throw PositivityError(msg.str());
  }
  ArmSlice slice;
  slice.y.resize(idx.size());
  slice.u.resize(idx.size());
  slice.e.resize(idx.size());
  for (size_t r = 0; r < idx.size(); ++r) {
    slice.y[r] = data.outcome[idx[r]];
    slice.e[r] = gps(idx[r], arm - 1);
    slice.u[r] = 1.0 / slice.e[r];
  }
  return slice;
}

void check_inputs(const ObservationalDataset& data, const Eigen::MatrixXd& gps,
                  const ContrastSpec& contrast) {
  if (gps.rows() != data.n())
    throw ValidationError("GPS matrix row count does not match the dataset");
  if (gps.cols() != data.num_arms)
    throw ValidationError("GPS matrix column count does not match the number of arms");
  if (contrast.coefficients.size() != data.num_arms)
    throw ValidationError("contrast length does not match the number of arms");
  if ((contrast.coefficients.array() == 0.0).all())
    throw ValidationError("contrast must have at least one nonzero entry");
}

}  // namespace

double sipw_point_estimate(const ObservationalDataset& data, const Eigen::MatrixXd& gps,
                           const ContrastSpec& contrast) {
  check_inputs(data, gps, contrast);
  double total = 0.0;
  for (int arm = 1; arm <= data.num_arms; ++arm) {
    const double c = contrast.coefficients[arm - 1];
    if (c == 0.0) continue;
    const ArmSlice slice = slice_arm(data, gps, arm);
    const double num = (slice.y.array() * slice.u.array()).sum();
    const double den = slice.u.sum();
    total += c * num / den;
  }
  return total;
}

IntervalEstimate estimate_interval(const ObservationalDataset& data, const Eigen::MatrixXd& gps,
                                   const ContrastSpec& contrast, const SensitivitySpec& spec) {
  check_inputs(data, gps, contrast);

  double lower = 0.0, upper = 0.0;
  for (int arm = 1; arm <= data.num_arms; ++arm) {
    const double c = contrast.coefficients[arm - 1];
    if (c == 0.0) continue;
    const ArmSlice slice = slice_arm(data, gps, arm);
    const UnitBounds bounds = compute_z_bounds(slice.e, spec);
    const double arm_min =
        extremize_weighted_mean(slice.y, slice.u, bounds.z_lo, bounds.z_hi, Direction::minimize)
            .value;
    const double arm_max =
        extremize_weighted_mean(slice.y, slice.u, bounds.z_lo, bounds.z_hi, Direction::maximize)
            .value;
    // Arms are disjoint, so the contrast extremes separate across arms.
    if (c > 0.0) {
      lower += c * arm_min;
      upper += c * arm_max;
    } else {
      lower += c * arm_max;
      upper += c * arm_min;
    }
  }

  IntervalEstimate interval;
  interval.point_lower = lower;
  interval.point_upper = upper;
  interval.gamma0 = spec.gamma0;
  return interval;
}

}  // namespace rrsens
