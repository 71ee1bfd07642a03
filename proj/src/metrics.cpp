#include "arz/metrics.hpp"

#include <cmath>
#include <string>

#include "arz/errors.hpp"

namespace arz::metrics {

double l2_error(const std::vector<double>& x, const std::vector<double>& truth,
                const std::vector<double>& estimate, double normalizer) {
    if (x.size() != truth.size() || x.size() != estimate.size())
        throw DataError("l2_error: size mismatch");
    // trapezoid over the samples, skipping NaN truth cells and renormalizing
    double acc = 0.0, covered = 0.0;
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        const bool ok0 = std::isfinite(truth[j]), ok1 = std::isfinite(truth[j + 1]);
        if (!ok0 && !ok1) continue;
        const double h = x[j + 1] - x[j];
        const double d0 = ok0 ? (truth[j] - estimate[j]) / normalizer : 0.0;
        const double d1 = ok1 ? (truth[j + 1] - estimate[j + 1]) / normalizer : 0.0;
        if (ok0 && ok1) {
            acc += 0.5 * h * (d0 * d0 + d1 * d1);
            covered += h;
        } else {
            // half panel next to an empty cell
            const double d = ok0 ? d0 : d1;
            acc += 0.5 * h * d * d;
            covered += 0.5 * h;
        }
    }
    if (covered <= 0.0) throw DataError("l2_error: no covered cells");
    return std::sqrt(acc / covered);
}

ErrorSeries l2_error_series(const solver::Trajectory& truth, const solver::Trajectory& estimate,
                            const lin::ReferenceState& ref) {
    if (truth.grid.num_cells != estimate.grid.num_cells ||
        truth.times.size() != estimate.times.size())
        throw DataError("l2_error_series: trajectories on different grids or time samples");
    for (std::size_t k = 0; k < truth.times.size(); ++k) {
        if (std::abs(truth.times[k] - estimate.times[k]) > 1e-9)
            throw DataError("l2_error_series: time sample mismatch at index " +
                            std::to_string(k));
    }
    const auto x = truth.grid.cell_centers();
    ErrorSeries out;
    for (std::size_t k = 0; k < truth.times.size(); ++k) {
        out.times.push_back(truth.times[k]);
        out.e_rho.push_back(
            l2_error(x, truth.fields[k].rho, estimate.fields[k].rho, ref.rho_star));
        out.e_v.push_back(l2_error(x, truth.fields[k].v, estimate.fields[k].v, ref.v_star));
    }
    return out;
}

std::optional<double> convergence_time(const std::vector<double>& times,
                                       const std::vector<double>& values, double threshold) {
    if (times.empty() || times.size() != values.size())
        throw DataError("convergence_time: empty or mismatched series");
    // last index at or above the threshold decides the earliest settling time
    std::optional<double> result;
    for (std::size_t i = times.size(); i-- > 0;) {
        if (values[i] >= threshold) break;
        result = times[i];
    }
    return result;
}

std::optional<double> convergence_time(const ErrorSeries& series, double threshold) {
    std::vector<double> worst(series.times.size());
    for (std::size_t i = 0; i < worst.size(); ++i)
        worst[i] = std::max(series.e_rho[i], series.e_v[i]);
    return convergence_time(series.times, worst, threshold);
}

}  // namespace arz::metrics
