#pragma once

#include "rrsens/gps.hpp"
#include "rrsens/sens.hpp"
#include "rrsens/types.hpp"

#include <cstdint>
#include <vector>

namespace rrsens {

struct BootstrapConfig {
  int reps = 1000;
  double alpha = 0.10;
  std::uint64_t seed = 0;
  bool refit_gps = true;  // refit the GPS model inside each resample
  int threads = 0;        // 0 = hardware threads
};

/// Empirical quantile with linear interpolation between order statistics
/// (R type 7). `sorted` must be ascending.
double quantile_linear(const std::vector<double>& sorted, double p);

/// Percentile-bootstrap confidence intervals for every (contrast, spec) cell,
/// sharing one set of resamples and GPS refits across the whole grid. Point
/// endpoints come from the original data; ci_lower is the alpha/2 quantile of
/// the resampled lower endpoints and ci_upper the 1-alpha/2 quantile of the
/// resampled upper endpoints. Resamples with an empty arm or a failed GPS fit
/// are redrawn from the replicate's own stream, at most 10 attempts each
/// (so at most 10*B draws in total).
std::vector<std::vector<IntervalEstimate>> bootstrap_grid(
    const ObservationalDataset& data, const GpsSpec& gps_spec,
    const std::vector<ContrastSpec>& contrasts, const std::vector<SensitivitySpec>& specs,
    const BootstrapConfig& config);

IntervalEstimate percentile_bootstrap_ci(const ObservationalDataset& data, const GpsSpec& gps_spec,
                                         const ContrastSpec& contrast, const SensitivitySpec& spec,
                                         const BootstrapConfig& config);

}  // namespace rrsens
