#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "arz/config.hpp"
#include "arz/ingest.hpp"
#include "arz/metrics.hpp"
#include "arz/observer.hpp"
#include "arz/solver.hpp"

namespace arz::pipeline {

/// Twin experiment: simulate the plant, feed its outlet traces (and the
/// setpoint inlet flux) to the observer on the same grid and step, compare.
struct TwinResult {
    solver::Trajectory plant;
    solver::Trajectory estimate;
    metrics::ErrorSeries errors;
};

TwinResult run_twin(const config::RunConfig& cfg);

/// End-to-end synthetic data run: simulate -> sample a full fleet ->
/// Edie-aggregate -> boundary series -> observer from the series alone;
/// errors are against the plant resampled onto the estimate samples.
struct SyntheticResult {
    solver::Trajectory plant;
    ingest::TrajectoryDataset fleet;
    ingest::AggregatedGrid aggregate;          // reporting grid
    ingest::DatasetAverages averages;
    solver::Trajectory estimate;
    metrics::ErrorSeries errors;
    std::optional<double> convergence_time;    // detection at `threshold`
    std::pair<double, double> aggregation_error;  // grid vs plant (E_rho, E_v)
};

SyntheticResult run_synthetic(const config::RunConfig& cfg, double detection_threshold);

/// Data-driven run on externally supplied trajectories: aggregate, average,
/// observe from the boundary series, compare against the reconstruction.
struct DataResult {
    ingest::AggregatedGrid aggregate;
    ingest::DatasetAverages averages;
    lin::ReferenceState ref;
    solver::Trajectory estimate;
    metrics::ErrorSeries errors;               // per reconstruction row
    std::optional<double> convergence_time;
    ingest::GapReport gaps;
};

DataResult run_data(const config::RunConfig& cfg, const ingest::TrajectoryDataset& data,
                    double detection_threshold);

/// Global RMS discrepancy between an aggregated grid and a trajectory sampled
/// at the cell centers, over non-empty cells, normalized by the reference.
std::pair<double, double> grid_vs_trajectory_error(const ingest::AggregatedGrid& agg,
                                                   const solver::Trajectory& truth,
                                                   const lin::ReferenceState& ref);

/// Relaxation-time selection: forward-simulate from the data's first row with
/// data-driven boundaries for each candidate tau; the error functional is the
/// time-mean of E_rho + E_v against the data rows.
struct TauSelection {
    std::vector<std::pair<double, double>> errors;  // (tau, mean error)
    double best_tau;
};

TauSelection select_tau(const config::RunConfig& cfg, const ingest::AggregatedGrid& data);

}  // namespace arz::pipeline
