#include "rrsens/boot.hpp"

#include "rrsens/parallel.hpp"
#include "rrsens/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

namespace rrsens {

namespace {

constexpr std::uint64_t kResampleSalt = 0xb001'57a9ULL;
constexpr int kMaxAttemptsPerReplicate = 10;

struct Resample {
  ObservationalDataset data;
  Eigen::MatrixXd gps;
  bool ok = false;
  int attempts = 0;
};

bool all_arms_present(const Eigen::VectorXi& treatment, int num_arms) {
  std::vector<bool> seen(num_arms, false);
  int remaining = num_arms;
  for (int i = 0; i < treatment.size(); ++i) {
    const int a = treatment[i] - 1;
    if (!seen[a]) {
      seen[a] = true;
      if (--remaining == 0) return true;
    }
  }
  return false;
}

// Draws until the resample is estimable: every arm occupied and, when
// refitting, a converged GPS model. Each replicate consumes only its own
// stream, so the schedule cannot change the result.
Resample draw_resample(const ObservationalDataset& data, const Eigen::MatrixXd& original_gps,
                       const GpsSpec& gps_spec, bool refit, std::uint64_t seed,
                       std::uint64_t replicate) {
  const int n = data.n();
  Rng rng = Rng::stream(seed, replicate, kResampleSalt);
  Resample out;

  for (out.attempts = 1; out.attempts <= kMaxAttemptsPerReplicate; ++out.attempts) {
    std::vector<int> rows(n);
    for (int i = 0; i < n; ++i) rows[i] = static_cast<int>(rng.uniform_int(n));

    Eigen::VectorXi treatment(n);
    for (int i = 0; i < n; ++i) treatment[i] = data.treatment[rows[i]];
    if (!all_arms_present(treatment, data.num_arms)) continue;

    ObservationalDataset sample;
    sample.covariates.resize(n, data.dim());
    sample.outcome.resize(n);
    for (int i = 0; i < n; ++i) {
      sample.covariates.row(i) = data.covariates.row(rows[i]);
      sample.outcome[i] = data.outcome[rows[i]];
    }
    sample.treatment = std::move(treatment);
    sample.num_arms = data.num_arms;
    sample.has_intercept = data.has_intercept;
    sample.ordinal_treatment = data.ordinal_treatment;

    if (refit) {
      try {
        const GpsModel model = fit_gps(sample, gps_spec);
        if (!model.converged) continue;
        out.gps = predict_gps(model, sample.covariates);
      } catch (const FitError&) {
        continue;
      }
    } else {
      out.gps.resize(n, data.num_arms);
      for (int i = 0; i < n; ++i) out.gps.row(i) = original_gps.row(rows[i]);
    }
    out.data = std::move(sample);
    out.ok = true;
    return out;
  }
  return out;  // exhausted the attempt budget
}

}  // namespace

double quantile_linear(const std::vector<double>& sorted, double p) {
  const size_t n = sorted.size();
  if (n == 0) throw ValidationError("quantile of an empty sample");
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const size_t lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<std::vector<IntervalEstimate>> bootstrap_grid(
    const ObservationalDataset& data, const GpsSpec& gps_spec,
    const std::vector<ContrastSpec>& contrasts, const std::vector<SensitivitySpec>& specs,
    const BootstrapConfig& config) {
  if (config.reps < 2) throw ValidationError("bootstrap needs at least 2 replicates");
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    throw ValidationError("alpha must lie in (0,1)");
  const double tail = std::min(config.alpha / 2.0, 1.0 - config.alpha / 2.0);
  if (config.reps * tail < 1.0)
    throw ValidationError("too few replicates to resolve the requested alpha");
  if (contrasts.empty() || specs.empty())
    throw ValidationError("bootstrap grid needs at least one contrast and one spec");

  const GpsModel base_model = fit_gps(data, gps_spec);
  if (!base_model.converged)
    throw FitError("GPS model did not converge on the original data; cannot bootstrap");
  const Eigen::MatrixXd base_gps = predict_gps(base_model, data.covariates);

  const size_t cells = contrasts.size() * specs.size();
  std::vector<IntervalEstimate> points(cells);
  for (size_t c = 0; c < contrasts.size(); ++c)
    for (size_t s = 0; s < specs.size(); ++s)
      points[c * specs.size() + s] = estimate_interval(data, base_gps, contrasts[c], specs[s]);

  const int reps = config.reps;
  std::vector<double> lower(cells * reps), upper(cells * reps);
  std::vector<char> failed(reps, 0);
  std::atomic<long long> total_attempts{0};

  parallel_for(reps, config.threads, [&](int b) {
    const Resample resample = draw_resample(data, base_gps, gps_spec, config.refit_gps,
                                            config.seed, static_cast<std::uint64_t>(b));
    total_attempts += resample.attempts;
    if (!resample.ok) {
      failed[b] = 1;
      return;
    }
    for (size_t c = 0; c < contrasts.size(); ++c) {
      for (size_t s = 0; s < specs.size(); ++s) {
        const IntervalEstimate est =
            estimate_interval(resample.data, resample.gps, contrasts[c], specs[s]);
        const size_t cell = c * specs.size() + s;
        lower[cell * reps + b] = est.point_lower;
        upper[cell * reps + b] = est.point_upper;
      }
    }
  });

  const long long failures = std::count(failed.begin(), failed.end(), char(1));
  if (failures > 0) {
    std::ostringstream msg;
    msg << "bootstrap instability: " << failures << " of " << reps
        << " replicates found no estimable resample in " << kMaxAttemptsPerReplicate
        << " attempts (" << total_attempts.load()
        << " draws total); consider a larger sample or fewer arms";
    throw InstabilityError(msg.str());
  }

  std::vector<std::vector<IntervalEstimate>> result(contrasts.size());
  for (size_t c = 0; c < contrasts.size(); ++c) {
    result[c].resize(specs.size());
    for (size_t s = 0; s < specs.size(); ++s) {
      const size_t cell = c * specs.size() + s;
      std::vector<double> lo(lower.begin() + cell * reps, lower.begin() + (cell + 1) * reps);
      std::vector<double> hi(upper.begin() + cell * reps, upper.begin() + (cell + 1) * reps);
      std::sort(lo.begin(), lo.end());
      std::sort(hi.begin(), hi.end());

      IntervalEstimate est = points[cell];
      est.ci_lower = quantile_linear(lo, config.alpha / 2.0);
      est.ci_upper = quantile_linear(hi, 1.0 - config.alpha / 2.0);
      est.alpha = config.alpha;
      est.bootstrap_reps = reps;
      result[c][s] = est;
    }
  }
  return result;
}

IntervalEstimate percentile_bootstrap_ci(const ObservationalDataset& data, const GpsSpec& gps_spec,
                                         const ContrastSpec& contrast, const SensitivitySpec& spec,
                                         const BootstrapConfig& config) {
  return bootstrap_grid(data, gps_spec, {contrast}, {spec}, config)[0][0];
}

}  // namespace rrsens
