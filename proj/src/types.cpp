#include "rrsens/types.hpp"

#include <cmath>
#include <sstream>

namespace rrsens {

Eigen::VectorXi ObservationalDataset::arm_sizes() const {
  Eigen::VectorXi sizes = Eigen::VectorXi::Zero(num_arms);
  for (int i = 0; i < treatment.size(); ++i) {
    const int a = treatment[i];
    if (a >= 1 && a <= num_arms) ++sizes[a - 1];
  }
  return sizes;
}

std::vector<int> ObservationalDataset::arm_indices(int arm) const {
  std::vector<int> idx;
  for (int i = 0; i < treatment.size(); ++i)
    if (treatment[i] == arm) idx.push_back(i);
  return idx;
}

ObservationalDataset ObservationalDataset::create(Eigen::MatrixXd covariates,
                                                  Eigen::VectorXi treatment,
                                                  Eigen::VectorXd outcome, int num_arms,
                                                  bool has_intercept, bool ordinal) {
  ObservationalDataset data;
  data.covariates = std::move(covariates);
  data.treatment = std::move(treatment);
  data.outcome = std::move(outcome);
  data.num_arms = num_arms > 0 ? num_arms : (data.treatment.size() ? data.treatment.maxCoeff() : 0);
  data.has_intercept = has_intercept;
  data.ordinal_treatment = ordinal;

  const auto findings = validate(data);
  for (const auto& f : findings) {
    if (f.severity == Finding::Severity::error) throw ValidationError(f.message);
  }
  return data;
}

std::vector<Finding> validate(const ObservationalDataset& data) {
  std::vector<Finding> findings;
  auto error = [&](std::string msg, std::optional<int> row = std::nullopt) {
    findings.push_back({Finding::Severity::error, std::move(msg), row});
  };

  const auto n = data.outcome.size();
  if (n < 1) error("dataset has no units");
  if (data.treatment.size() != n || data.covariates.rows() != n) {
    std::ostringstream msg;
    msg << "row counts disagree: covariates " << data.covariates.rows() << ", treatment "
        << data.treatment.size() << ", outcome " << n;
    error(msg.str());
    return findings;  // further checks assume aligned rows
  }
  if (data.num_arms < 1) error("number of arms must be at least 1");

  for (int i = 0; i < n; ++i) {
    const int a = data.treatment[i];
    if (a < 1 || a > data.num_arms) {
      std::ostringstream msg;
      msg << "row " << (i + 1) << ": treatment label " << a << " outside 1.." << data.num_arms;
      error(msg.str(), i + 1);
    }
    if (!std::isfinite(data.outcome[i])) {
      std::ostringstream msg;
      msg << "row " << (i + 1) << ": non-finite outcome";
      error(msg.str(), i + 1);
    }
    for (int j = 0; j < data.covariates.cols(); ++j) {
      if (!std::isfinite(data.covariates(i, j))) {
        std::ostringstream msg;
        msg << "row " << (i + 1) << ": non-finite covariate in column " << (j + 1);
        error(msg.str(), i + 1);
        break;
      }
    }
  }

  if (data.num_arms >= 1 && data.treatment.size() == n && n >= 1) {
    const Eigen::VectorXi sizes = data.arm_sizes();
    for (int a = 1; a <= data.num_arms; ++a) {
      if (sizes[a - 1] == 0) {
        std::ostringstream msg;
        msg << "arm " << a << " has 0 units";
        error(msg.str());
      }
    }
  }

  if (data.has_intercept && data.covariates.cols() >= 1 && data.covariates.rows() == n) {
    for (int i = 0; i < n; ++i) {
      if (data.covariates(i, 0) != 1.0) {
        error("intercept flag set but first covariate column is not constant 1");
        break;
      }
    }
  }

  return findings;
}

ContrastSpec ContrastSpec::pairwise(int arm_i, int arm_j, int num_arms) {
  if (arm_i < 1 || arm_i > num_arms || arm_j < 1 || arm_j > num_arms || arm_i == arm_j)
    throw ValidationError("pairwise contrast needs two distinct arms in 1..J");
  ContrastSpec c;
  c.coefficients = Eigen::VectorXd::Zero(num_arms);
  c.coefficients[arm_i - 1] = 1.0;
  c.coefficients[arm_j - 1] = -1.0;
  return c;
}

std::string ContrastSpec::label() const {
  int pos = -1, neg = -1, nonzero = 0;
  for (int a = 0; a < coefficients.size(); ++a) {
    if (coefficients[a] == 0.0) continue;
    ++nonzero;
    if (coefficients[a] == 1.0) pos = a + 1;
    if (coefficients[a] == -1.0) neg = a + 1;
  }
  if (nonzero == 2 && pos > 0 && neg > 0) {
    return "tau_" + std::to_string(pos) + "_" + std::to_string(neg);
  }
  // pipe-separated so the label stays a single CSV field
  std::ostringstream out;
  out << "c=(";
  for (int a = 0; a < coefficients.size(); ++a) {
    if (a) out << "|";
    out << coefficients[a];
  }
  out << ")";
  return out.str();
}

}  // namespace rrsens
