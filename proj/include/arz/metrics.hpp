#pragma once

#include <optional>
#include <vector>

#include "arz/linearize.hpp"
#include "arz/solver.hpp"

namespace arz::metrics {

/// Normalized spatial-L2 estimation errors over time.
struct ErrorSeries {
    std::vector<double> times;  // [s]
    std::vector<double> e_rho;  // [-]
    std::vector<double> e_v;    // [-]
};

/// E(t) = sqrt( (1/L_covered) \int ((f - f_hat)/f_star)^2 dx ), trapezoidal in x.
/// Truth and estimate must share grid and time samples.
ErrorSeries l2_error_series(const solver::Trajectory& truth, const solver::Trajectory& estimate,
                            const lin::ReferenceState& ref);

/// Pointwise variant for samples on a shared x-grid; NaN entries in `truth`
/// (empty data cells) are excluded with renormalization by the covered length.
double l2_error(const std::vector<double>& x, const std::vector<double>& truth,
                const std::vector<double>& estimate, double normalizer);

/// Earliest time after which `values` stays below `threshold` for the rest of
/// the series; nullopt if it never does.
std::optional<double> convergence_time(const std::vector<double>& times,
                                       const std::vector<double>& values, double threshold);

/// Channel-combined detection on max(e_rho, e_v).
std::optional<double> convergence_time(const ErrorSeries& series, double threshold);

}  // namespace arz::metrics
