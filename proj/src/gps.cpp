#include "rrsens/gps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rrsens {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kSeparationThreshold = 30.0;  // |coef| on standardized covariates

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow
double log1pexp(double eta) {
  if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

void check_full_rank(const Eigen::MatrixXd& X, const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    std::ostringstream msg;
    msg << "singular system: " << what << " design matrix has rank " << qr.rank() << " < "
        << X.cols() << " columns";
    throw FitError(msg.str());
  }
}

Eigen::VectorXd column_sds(const Eigen::MatrixXd& X) {
  Eigen::VectorXd sds(X.cols());
  for (int j = 0; j < X.cols(); ++j) {
    const double mean = X.col(j).mean();
    sds[j] = std::sqrt((X.col(j).array() - mean).square().mean());
  }
  return sds;
}

bool separation_suspected(const Eigen::VectorXd& beta, const Eigen::VectorXd& sds) {
  for (int j = 0; j < beta.size(); ++j) {
    if (sds[j] > 0.0 && std::abs(beta[j]) * sds[j] > kSeparationThreshold) return true;
  }
  return false;
}

struct CoreFit {
  Eigen::VectorXd theta;
  bool converged = false;
  bool diverged = false;  // separation detector tripped
  int iterations = 0;
  double loglik = 0.0;
  std::vector<double> trace;
};

// Newton ascent with step halving, shared by every family. `loglik` and
// `gradient` evaluate the (possibly ridge-penalized) objective; `hessian_solve`
// returns the ascent direction H^{-1} g for the current point. `diverged`
// is checked after every accepted step so runaway coefficients cut the run
// short. One extra iteration runs after the stopping rule first fires, which
// squeezes the gradient to quadratic-convergence levels.
template <class LogLik, class Gradient, class Solve, class Diverged>
CoreFit newton_ascent(Eigen::VectorXd theta0, const FitOptions& opts, LogLik&& loglik,
                      Gradient&& gradient, Solve&& hessian_solve, Diverged&& diverged) {
  CoreFit fit;
  fit.theta = std::move(theta0);
  double ll = loglik(fit.theta);
  fit.trace.push_back(ll);
  bool stop_armed = false;

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const Eigen::VectorXd g = gradient(fit.theta);
    const Eigen::VectorXd direction = hessian_solve(fit.theta, g);

    double scale = 1.0;
    Eigen::VectorXd candidate;
    double ll_new = ll;
    bool accepted = false;
    for (int h = 0; h <= opts.max_step_halvings; ++h) {
      candidate = fit.theta + scale * direction;
      ll_new = loglik(candidate);
      if (ll_new >= ll) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) {
      // Flat to within noise means we are already at the optimum.
      if (ll_new >= ll - 1e-12 * (1.0 + std::abs(ll))) {
        accepted = true;
      } else {
        fit.converged = gradient(fit.theta).cwiseAbs().maxCoeff() < 1e-6;
        break;
      }
    }

    const double max_change = (candidate - fit.theta).cwiseAbs().maxCoeff();
    const double rel_ll_change = std::abs(ll_new - ll) / (std::abs(ll) + 1e-10);
    fit.theta = candidate;
    ll = ll_new;
    fit.trace.push_back(ll);
    fit.iterations = iter;

    if (diverged(fit.theta)) {
      fit.diverged = true;
      break;
    }
    if (max_change < opts.coef_tol || rel_ll_change < opts.loglik_rel_tol) {
      if (stop_armed) {
        fit.converged = true;
        break;
      }
      stop_armed = true;
    }
  }
  fit.loglik = loglik(fit.theta);
  return fit;
}

struct BinaryFit {
  Eigen::VectorXd beta;
  bool converged = false;
  int iterations = 0;
  double loglik = 0.0;
  std::vector<double> trace;
  bool separation = false;
};

// IRLS for the log-odds of y == 1; `penalize` masks which coordinates the
// ridge option applies to (intercepts stay unpenalized).
BinaryFit fit_binary_core(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const FitOptions& opts, const std::vector<bool>& penalize) {
  check_full_rank(X, "logistic");
  const int d = static_cast<int>(X.cols());
  const Eigen::VectorXd sds = column_sds(X);

  Eigen::VectorXd ridge_diag = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; ++j)
    if (opts.ridge > 0.0 && penalize[j]) ridge_diag[j] = opts.ridge;

  auto loglik = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = X * beta;
    double ll = 0.0;
    for (int i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - log1pexp(eta[i]);
    return ll - 0.5 * (ridge_diag.array() * beta.array().square()).sum();
  };
  auto gradient = [&](const Eigen::VectorXd& beta) -> Eigen::VectorXd {
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd p(eta.size());
    for (int i = 0; i < eta.size(); ++i) p[i] = sigmoid(eta[i]);
    return X.transpose() * (y - p) - ridge_diag.asDiagonal() * beta;
  };
  auto solve = [&](const Eigen::VectorXd& beta, const Eigen::VectorXd& g) -> Eigen::VectorXd {
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd w(eta.size());
    for (int i = 0; i < eta.size(); ++i) {
      const double p = sigmoid(eta[i]);
      w[i] = std::max(p * (1.0 - p), 1e-10);
    }
    Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
    info.diagonal() += ridge_diag;
    return info.ldlt().solve(g);
  };

  CoreFit core =
      newton_ascent(Eigen::VectorXd::Zero(d), opts, loglik, gradient, solve,
                    [&](const Eigen::VectorXd& beta) { return separation_suspected(beta, sds); });

  BinaryFit fit;
  fit.beta = std::move(core.theta);
  fit.converged = core.converged;
  fit.iterations = core.iterations;
  fit.loglik = core.loglik;
  fit.trace = std::move(core.trace);
  fit.separation = core.diverged || separation_suspected(fit.beta, sds);
  if (fit.separation) fit.converged = false;
  return fit;
}

Eigen::MatrixXd clamp_probabilities(Eigen::MatrixXd probs) {
  return probs.cwiseMax(kProbClamp).cwiseMin(1.0 - kProbClamp);
}

// Row-stochastic softmax of [0 | X * beta'] (reference arm first).
Eigen::MatrixXd multinomial_probs(const Eigen::MatrixXd& X, const Eigen::MatrixXd& beta) {
  const int n = static_cast<int>(X.rows());
  const int num_arms = static_cast<int>(beta.rows()) + 1;
  Eigen::MatrixXd logits(n, num_arms);
  logits.col(0).setZero();
  logits.rightCols(num_arms - 1) = X * beta.transpose();
  Eigen::MatrixXd probs(n, num_arms);
  for (int i = 0; i < n; ++i) {
    const double top = logits.row(i).maxCoeff();
    const Eigen::ArrayXd e = (logits.row(i).array() - top).exp();
    probs.row(i) = (e / e.sum()).matrix();
  }
  return probs;
}

std::vector<bool> intercept_mask(const ObservationalDataset& data) {
  std::vector<bool> penalize(data.dim(), true);
  if (data.has_intercept && data.dim() > 0) penalize[0] = false;
  return penalize;
}

Eigen::VectorXi relabel_backward(const Eigen::VectorXi& arm, int num_arms) {
  Eigen::VectorXi out(arm.size());
  for (int i = 0; i < arm.size(); ++i) out[i] = num_arms + 1 - arm[i];
  return out;
}

}  // namespace

std::string to_string(GpsFamily family) {
  switch (family) {
    case GpsFamily::binary_logistic: return "binary_logistic";
    case GpsFamily::multinomial_logit: return "multinomial_logit";
    case GpsFamily::continuation_ratio: return "continuation_ratio";
  }
  return "unknown";
}

GpsFamily gps_family_from_string(const std::string& name) {
  if (name == "binary_logistic" || name == "logistic") return GpsFamily::binary_logistic;
  if (name == "multinomial_logit" || name == "mlogit") return GpsFamily::multinomial_logit;
  if (name == "continuation_ratio" || name == "cratio") return GpsFamily::continuation_ratio;
  throw ValidationError("unknown GPS family '" + name + "'");
}

double binary_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y01,
                     const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (int i = 0; i < eta.size(); ++i) ll += y01[i] * eta[i] - log1pexp(eta[i]);
  return ll;
}

Eigen::VectorXd binary_loglik_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y01,
                                       const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd p(eta.size());
  for (int i = 0; i < eta.size(); ++i) p[i] = sigmoid(eta[i]);
  return X.transpose() * (y01 - p);
}

double multinomial_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXi& arm,
                          const Eigen::MatrixXd& beta) {
  const int n = static_cast<int>(X.rows());
  const int num_arms = static_cast<int>(beta.rows()) + 1;
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd logits(num_arms);
    logits[0] = 0.0;
    for (int a = 2; a <= num_arms; ++a) logits[a - 1] = X.row(i).dot(beta.row(a - 2));
    const double top = logits.maxCoeff();
    const double lse = top + std::log((logits.array() - top).exp().sum());
    ll += logits[arm[i] - 1] - lse;
  }
  return ll;
}

Eigen::MatrixXd multinomial_loglik_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXi& arm,
                                            const Eigen::MatrixXd& beta) {
  const int num_arms = static_cast<int>(beta.rows()) + 1;
  const Eigen::MatrixXd probs = multinomial_probs(X, beta);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(beta.rows(), beta.cols());
  for (int a = 2; a <= num_arms; ++a) {
    Eigen::VectorXd residual(X.rows());
    for (int i = 0; i < X.rows(); ++i) residual[i] = (arm[i] == a ? 1.0 : 0.0) - probs(i, a - 1);
    grad.row(a - 2) = (X.transpose() * residual).transpose();
  }
  return grad;
}

double cratio_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXi& arm, int num_arms,
                     const Eigen::MatrixXd& stage_coefs) {
  double ll = 0.0;
  for (int i = 0; i < X.rows(); ++i) {
    const int a = arm[i];
    const int last_stage = std::min(a, num_arms - 1);
    for (int s = 1; s <= last_stage; ++s) {
      const double eta = X.row(i).dot(stage_coefs.row(s - 1));
      const double y = (a == s) ? 1.0 : 0.0;
      ll += y * eta - log1pexp(eta);
    }
  }
  return ll;
}

Eigen::MatrixXd cratio_loglik_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXi& arm,
                                       int num_arms, const Eigen::MatrixXd& stage_coefs) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(stage_coefs.rows(), stage_coefs.cols());
  for (int i = 0; i < X.rows(); ++i) {
    const int a = arm[i];
    const int last_stage = std::min(a, num_arms - 1);
    for (int s = 1; s <= last_stage; ++s) {
      const double p = sigmoid(X.row(i).dot(stage_coefs.row(s - 1)));
      const double y = (a == s) ? 1.0 : 0.0;
      grad.row(s - 1) += (y - p) * X.row(i);
    }
  }
  return grad;
}

GpsModel fit_binary_logistic(const ObservationalDataset& data, const FitOptions& opts) {
  if (data.num_arms != 2) throw FitError("binary logistic fit requires exactly 2 arms");
  Eigen::VectorXd y(data.n());
  for (int i = 0; i < data.n(); ++i) y[i] = data.treatment[i] == 2 ? 1.0 : 0.0;

  const BinaryFit fit = fit_binary_core(data.covariates, y, opts, intercept_mask(data));

  GpsModel model;
  model.family = GpsFamily::binary_logistic;
  model.num_arms = 2;
  model.coefficients = fit.beta.transpose();
  model.converged = fit.converged;
  model.iterations = fit.iterations;
  model.log_likelihood = fit.loglik;
  model.loglik_trace = fit.trace;
  if (fit.separation)
    model.warnings.push_back(
        {Finding::Severity::warning,
         "possible complete separation: a standardized coefficient exceeds 30", std::nullopt});
  return model;
}

GpsModel fit_multinomial_logit(const ObservationalDataset& data, const FitOptions& opts) {
  if (data.num_arms < 2) throw FitError("multinomial logit fit requires at least 2 arms");
  check_full_rank(data.covariates, "multinomial");
  const int d = data.dim();
  const int k = data.num_arms - 1;  // free arms
  const Eigen::MatrixXd& X = data.covariates;
  const Eigen::VectorXi& arm = data.treatment;

  const std::vector<bool> col_penalize = intercept_mask(data);
  Eigen::VectorXd ridge_diag = Eigen::VectorXd::Zero(k * d);
  for (int a = 0; a < k; ++a)
    for (int j = 0; j < d; ++j)
      if (opts.ridge > 0.0 && col_penalize[j]) ridge_diag[a * d + j] = opts.ridge;

  auto unpack = [&](const Eigen::VectorXd& theta) {
    Eigen::MatrixXd beta(k, d);
    for (int a = 0; a < k; ++a) beta.row(a) = theta.segment(a * d, d).transpose();
    return beta;
  };

  auto loglik = [&](const Eigen::VectorXd& theta) {
    return multinomial_loglik(X, arm, unpack(theta)) -
           0.5 * (ridge_diag.array() * theta.array().square()).sum();
  };
  auto gradient = [&](const Eigen::VectorXd& theta) -> Eigen::VectorXd {
    const Eigen::MatrixXd g = multinomial_loglik_gradient(X, arm, unpack(theta));
    Eigen::VectorXd out(k * d);
    for (int a = 0; a < k; ++a) out.segment(a * d, d) = g.row(a).transpose();
    return out - ridge_diag.asDiagonal() * theta;
  };
  auto solve = [&](const Eigen::VectorXd& theta, const Eigen::VectorXd& g) -> Eigen::VectorXd {
    const Eigen::MatrixXd probs = multinomial_probs(X, unpack(theta));
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(k * d, k * d);
    for (int a = 0; a < k; ++a) {
      for (int b = a; b < k; ++b) {
        Eigen::VectorXd w(X.rows());
        for (int i = 0; i < X.rows(); ++i) {
          const double pa = probs(i, a + 1);
          const double pb = probs(i, b + 1);
          w[i] = pa * ((a == b ? 1.0 : 0.0) - pb);
        }
        const Eigen::MatrixXd block = X.transpose() * w.asDiagonal() * X;
        info.block(a * d, b * d, d, d) = block;
        if (a != b) info.block(b * d, a * d, d, d) = block;
      }
    }
    info.diagonal() += ridge_diag;
    return info.ldlt().solve(g);
  };

  const Eigen::VectorXd sds = column_sds(X);
  auto any_row_separated = [&](const Eigen::VectorXd& theta) {
    const Eigen::MatrixXd beta = unpack(theta);
    for (int a = 0; a < k; ++a)
      if (separation_suspected(beta.row(a).transpose(), sds)) return true;
    return false;
  };
  CoreFit core =
      newton_ascent(Eigen::VectorXd::Zero(k * d), opts, loglik, gradient, solve, any_row_separated);

  GpsModel model;
  model.family = GpsFamily::multinomial_logit;
  model.num_arms = data.num_arms;
  model.coefficients = unpack(core.theta);
  model.converged = core.converged;
  model.iterations = core.iterations;
  model.log_likelihood = core.loglik;
  model.loglik_trace = std::move(core.trace);

  if (core.diverged || any_row_separated(core.theta)) {
    model.converged = false;
    model.warnings.push_back(
        {Finding::Severity::warning,
         "possible complete separation: a standardized coefficient exceeds 30", std::nullopt});
  }
  return model;
}

GpsModel fit_continuation_ratio(const ObservationalDataset& data, const CratioOptions& cr,
                                const FitOptions& opts) {
  if (data.num_arms < 3) throw FitError("continuation-ratio fit requires at least 3 arms");
  if (!data.ordinal_treatment)
    throw FitError("continuation-ratio fit requires an ordinal treatment (see schema/--ordinal)");
  if (cr.shared_slopes && !data.has_intercept)
    throw FitError("shared-slope continuation ratio requires an intercept column");

  const int num_arms = data.num_arms;
  const int num_stages = num_arms - 1;
  const int d = data.dim();
  const Eigen::VectorXi arm =
      cr.backward_stages ? relabel_backward(data.treatment, num_arms) : data.treatment;

  GpsModel model;
  model.family = GpsFamily::continuation_ratio;
  model.num_arms = num_arms;
  model.shared_slopes = cr.shared_slopes;
  model.backward_stages = cr.backward_stages;
  model.coefficients = Eigen::MatrixXd::Zero(num_stages, d);

  // Stage s models P(A = s | A >= s); a one-class stage response cannot be fit.
  for (int s = 1; s <= num_stages; ++s) {
    int exits = 0, stays = 0;
    for (int i = 0; i < data.n(); ++i) {
      if (arm[i] < s) continue;
      (arm[i] == s ? exits : stays)++;
    }
    if (exits == 0 || stays == 0) {
      std::ostringstream msg;
      msg << "continuation-ratio stage " << s << " is degenerate: all units on one side";
      throw FitError(msg.str());
    }
  }

  if (!cr.shared_slopes) {
    model.converged = true;
    bool separation = false;
    double total_ll = 0.0;
    int max_iters = 0;
    for (int s = 1; s <= num_stages; ++s) {
      std::vector<int> subset;
      for (int i = 0; i < data.n(); ++i)
        if (arm[i] >= s) subset.push_back(i);
      Eigen::MatrixXd Xs(subset.size(), d);
      Eigen::VectorXd ys(subset.size());
      for (size_t r = 0; r < subset.size(); ++r) {
        Xs.row(r) = data.covariates.row(subset[r]);
        ys[r] = arm[subset[r]] == s ? 1.0 : 0.0;
      }
      const BinaryFit fit = fit_binary_core(Xs, ys, opts, intercept_mask(data));
      model.coefficients.row(s - 1) = fit.beta.transpose();
      model.converged = model.converged && fit.converged;
      max_iters = std::max(max_iters, fit.iterations);
      total_ll += fit.loglik;
      separation = separation || fit.separation;
    }
    model.iterations = max_iters;
    model.log_likelihood = total_ll;
    if (separation)
      model.warnings.push_back(
          {Finding::Severity::warning,
           "possible complete separation: a standardized coefficient exceeds 30", std::nullopt});
    return model;
  }

  // Shared slopes: one logistic fit on the stacked (unit, stage) rows with
  // stage-specific intercept dummies followed by the common covariates.
  const int expanded_dim = num_stages + (d - 1);
  std::vector<int> row_unit, row_stage;
  for (int s = 1; s <= num_stages; ++s)
    for (int i = 0; i < data.n(); ++i)
      if (arm[i] >= s) {
        row_unit.push_back(i);
        row_stage.push_back(s);
      }
  Eigen::MatrixXd Xe = Eigen::MatrixXd::Zero(row_unit.size(), expanded_dim);
  Eigen::VectorXd ye(row_unit.size());
  for (size_t r = 0; r < row_unit.size(); ++r) {
    Xe(r, row_stage[r] - 1) = 1.0;
    for (int j = 1; j < d; ++j) Xe(r, num_stages + j - 1) = data.covariates(row_unit[r], j);
    ye[r] = arm[row_unit[r]] == row_stage[r] ? 1.0 : 0.0;
  }
  std::vector<bool> penalize(expanded_dim, true);
  for (int s = 0; s < num_stages; ++s) penalize[s] = false;

  const BinaryFit fit = fit_binary_core(Xe, ye, opts, penalize);
  for (int s = 0; s < num_stages; ++s) {
    model.coefficients(s, 0) = fit.beta[s];
    for (int j = 1; j < d; ++j) model.coefficients(s, j) = fit.beta[num_stages + j - 1];
  }
  model.converged = fit.converged;
  model.iterations = fit.iterations;
  model.log_likelihood = fit.loglik;
  model.loglik_trace = fit.trace;
  if (fit.separation)
    model.warnings.push_back(
        {Finding::Severity::warning,
         "possible complete separation: a standardized coefficient exceeds 30", std::nullopt});
  return model;
}

GpsModel fit_gps(const ObservationalDataset& data, const GpsSpec& spec) {
  switch (spec.family) {
    case GpsFamily::binary_logistic: return fit_binary_logistic(data, spec.fit);
    case GpsFamily::multinomial_logit: return fit_multinomial_logit(data, spec.fit);
    case GpsFamily::continuation_ratio: return fit_continuation_ratio(data, spec.cratio, spec.fit);
  }
  throw FitError("unknown GPS family selector");
}

Eigen::MatrixXd predict_gps(const GpsModel& model, const Eigen::MatrixXd& covariates,
                            bool allow_unconverged) {
  if (!model.converged && !allow_unconverged)
    throw FitError("refusing to predict from an unconverged GPS model");
  if (covariates.cols() != model.coefficients.cols())
    throw ValidationError("covariate dimension does not match the fitted model");

  const int n = static_cast<int>(covariates.rows());
  switch (model.family) {
    case GpsFamily::binary_logistic: {
      Eigen::MatrixXd probs(n, 2);
      const Eigen::VectorXd eta = covariates * model.coefficients.row(0).transpose();
      for (int i = 0; i < n; ++i) {
        const double p = sigmoid(eta[i]);
        probs(i, 0) = 1.0 - p;
        probs(i, 1) = p;
      }
      return clamp_probabilities(std::move(probs));
    }
    case GpsFamily::multinomial_logit:
      return clamp_probabilities(multinomial_probs(covariates, model.coefficients));
    case GpsFamily::continuation_ratio: {
      const int num_arms = model.num_arms;
      Eigen::MatrixXd probs(n, num_arms);
      for (int i = 0; i < n; ++i) {
        double survive = 1.0;
        for (int s = 1; s < num_arms; ++s) {
          const double p = sigmoid(covariates.row(i).dot(model.coefficients.row(s - 1)));
          probs(i, s - 1) = survive * p;
          survive *= (1.0 - p);
        }
        probs(i, num_arms - 1) = survive;
      }
      if (model.backward_stages) probs.rowwise().reverseInPlace();
      return clamp_probabilities(std::move(probs));
    }
  }
  throw FitError("unknown GPS family in model");
}

nlohmann::json GpsModel::to_json() const {
  nlohmann::json coefs = nlohmann::json::array();
  for (int a = 0; a < coefficients.rows(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < coefficients.cols(); ++j) row.push_back(coefficients(a, j));
    coefs.push_back(std::move(row));
  }
  nlohmann::json warn = nlohmann::json::array();
  for (const auto& w : warnings) warn.push_back(w.message);
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"type", "gps_model"},
                        {"family", to_string(family)},
                        {"num_arms", num_arms},
                        {"coefficients", std::move(coefs)},
                        {"converged", converged},
                        {"iterations", iterations},
                        {"log_likelihood", log_likelihood},
                        {"shared_slopes", shared_slopes},
                        {"backward_stages", backward_stages},
                        {"warnings", std::move(warn)}};
}

GpsModel GpsModel::from_json(const nlohmann::json& doc) {
  if (!doc.contains("type") || doc.at("type") != "gps_model")
    throw ParseError("JSON document is not a gps_model");
  if (doc.at("schema_version").get<int>() != kSchemaVersion)
    throw ParseError("unsupported gps_model schema version");
  GpsModel model;
  model.family = gps_family_from_string(doc.at("family").get<std::string>());
  model.num_arms = doc.at("num_arms").get<int>();
  const auto& coefs = doc.at("coefficients");
  const int rows = static_cast<int>(coefs.size());
  const int cols = rows ? static_cast<int>(coefs.at(0).size()) : 0;
  model.coefficients.resize(rows, cols);
  for (int a = 0; a < rows; ++a)
    for (int j = 0; j < cols; ++j) model.coefficients(a, j) = coefs.at(a).at(j).get<double>();
  model.converged = doc.at("converged").get<bool>();
  model.iterations = doc.at("iterations").get<int>();
  model.log_likelihood = doc.at("log_likelihood").get<double>();
  model.shared_slopes = doc.value("shared_slopes", false);
  model.backward_stages = doc.value("backward_stages", false);
  for (const auto& w : doc.value("warnings", nlohmann::json::array()))
    model.warnings.push_back({Finding::Severity::warning, w.get<std::string>(), std::nullopt});
  return model;
}

}  // namespace rrsens
