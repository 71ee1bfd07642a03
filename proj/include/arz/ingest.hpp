#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arz/observer.hpp"

namespace arz::ingest {

/// One vehicle's time-sorted trace.
struct VehicleTrace {
    std::int64_t id;
    std::vector<double> t;  // [s]
    std::vector<double> x;  // [m]
};

struct TrajectoryDataset {
    std::vector<VehicleTrace> vehicles;
    double resolution = 0.1;  // [s] nominal sampling interval
};

/// CSV schema: vehicle_id, time_s, position_m (header required).
TrajectoryDataset read_trajectory_csv(const std::string& path);
void write_trajectory_csv(const std::string& path, const TrajectoryDataset& data);

/// Space-time window to aggregate over.
struct Domain {
    double t0, t1;  // [s]
    double x0, x1;  // [m]
};

/// Edie cell grid: rho = vehicle-time / cell area, q = vehicle-distance / cell
/// area, v = q / rho. Cells no trace crossed are flagged (count 0, v = NaN).
struct AggregatedGrid {
    Domain domain{};
    int n_t = 0, n_x = 0;
    std::vector<double> rho;    // [veh/m], row-major [i * n_x + j]
    std::vector<double> q;     // [veh/s]
    std::vector<double> v;     // [m/s], NaN in empty cells
    std::vector<int> count;    // traces crossing each cell

    double dt() const { return (domain.t1 - domain.t0) / n_t; }
    double dx() const { return (domain.x1 - domain.x0) / n_x; }
    double t_center(int i) const { return domain.t0 + (i + 0.5) * dt(); }
    double x_center(int j) const { return domain.x0 + (j + 0.5) * dx(); }
    std::size_t at(int i, int j) const { return static_cast<std::size_t>(i) * n_x + j; }
};

/// Exact piecewise-linear clipping of every trace against the cell rectangles.
AggregatedGrid edie_aggregate(const TrajectoryDataset& data, int n_time_cells, int n_space_cells,
                              const Domain& domain);

/// Per-dataset averages over non-empty cells; q_star is recomputed as
/// rho_star * v_star (the direct flow mean is reported alongside).
struct DatasetAverages {
    double rho_star;      // [veh/m]
    double v_star;        // [m/s]
    double q_star;        // [veh/s], = rho_star * v_star
    double q_mean_direct; // [veh/s], plain mean of cell flows
};

DatasetAverages dataset_averages(const AggregatedGrid& agg);

/// A gap in a boundary column that was bridged by interpolation.
struct GapReport {
    struct Gap {
        double t_lo, t_hi;  // [s]
        std::string column;
    };
    std::vector<Gap> gaps;
};

/// Boundary series: q_in from the first space column, q_out and v_out from the
/// last. Empty boundary cells are linearly interpolated across when the gap is
/// within max_gap (reported), otherwise DataError.
observer::BoundaryMeasurements boundary_series(const AggregatedGrid& agg, double max_gap,
                                               GapReport* report = nullptr);

}  // namespace arz::ingest
