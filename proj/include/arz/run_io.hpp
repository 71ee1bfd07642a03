#pragma once

#include <optional>
#include <string>

#include "arz/ingest.hpp"
#include "arz/linearize.hpp"
#include "arz/metrics.hpp"
#include "arz/observer.hpp"
#include "arz/solver.hpp"

namespace arz::run_io {

/// Field trajectory CSV: t_s, x_m, then density/velocity in the chosen units
/// (traffic: rho_veh_per_km, v_km_per_h; si: rho_veh_per_m, v_m_per_s).
/// One row per (sample time, cell).
void write_field_trajectory(const std::string& path, const solver::Trajectory& traj,
                            const std::string& units_mode);
solver::Trajectory read_field_trajectory(const std::string& path);

/// Gain profile CSV: x_m, r_per_s, s_per_s.
void write_gain_profile(const std::string& path, const lin::GainProfile& gains);

/// Error series CSV: t_s, e_rho, e_v, then a trailing comment summary line.
void write_error_series(const std::string& path, const metrics::ErrorSeries& series,
                        std::optional<double> convergence_time_s);

/// Aggregate CSV: t_index, x_index, t_center_s, x_center_m, rho_veh_per_km,
/// flow_veh_per_h, v_km_per_h, n_traces (empty cells keep n_traces = 0 and
/// empty-value sentinels of 0 density/flow with v = nan).
void write_aggregate(const std::string& path, const ingest::AggregatedGrid& agg);

/// Measurement CSV with unit-carrying headers. Accepted time column: t_s.
/// Accepted value columns: q_in_veh_per_s / q_in_veh_per_h, same for q_out,
/// v_out_m_per_s / v_out_km_per_h.
observer::BoundaryMeasurements read_measurements(const std::string& path, double max_gap);
void write_measurements(const std::string& path, const observer::BoundaryMeasurements& meas,
                        const std::string& units_mode);

}  // namespace arz::run_io
