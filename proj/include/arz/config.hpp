#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arz/fd.hpp"
#include "arz/linearize.hpp"
#include "arz/solver.hpp"

namespace arz::config {

/// Fully resolved run configuration. Defaults reproduce the reference
/// congested one-lane setup (Greenshield, rho_m = 160 veh/km, v_f = 40 m/s,
/// tau = 60 s, rho* = 120 veh/km, L = 400 m).
struct RunConfig {
    std::string schema = "arz-run-config/1";
    std::string units = "traffic";  // "traffic" or "si" output columns
    std::uint64_t seed = 1;

    // model
    fd::FundamentalDiagram diagram = fd::greenshield(40.0, 0.160, 1.0);
    double tau = 60.0;     // [s]
    double length = 400.0; // [m]

    // reference
    double rho_star = 0.120;             // [veh/m]
    std::optional<double> v_star;        // [m/s]; default V(rho_star)
    double eps_speed = 1e-6;             // [m/s] regime tolerance

    // grid / run
    int num_cells = 160;
    double total_time = 250.0;  // [s]
    int output_every = 1;
    double cfl_safety = 0.9;
    std::optional<double> fixed_dt;  // [s]

    // initial condition
    std::string ic_kind = "sinusoidal";  // sinusoidal | setpoint
    double ic_amplitude = 0.1;
    int ic_mode = 3;

    // boundary conditions (defaults: constant inlet flux q*, outlet bc2)
    std::optional<double> inlet_flux;    // [veh/s]; default q*
    std::string outlet_kind = "coupled_density";  // coupled_density|fixed_velocity|fixed_density
    std::optional<double> outlet_value;  // [veh/m] or [m/s]; default rho* / v*

    // observer
    std::string observer_init = "setpoint";
    lin::GainFormulation gain_formulation = lin::GainFormulation::Exact;
    bool x_varying_exponent = false;
    double speed_headroom = 1.3;
    double observer_max_gap = 2.0;       // [s] simulation-sourced measurements
    double data_max_gap = 30.0;          // [s] data-sourced measurements
    double v_floor = 0.1;                // [m/s]
    bool twin_setpoint_inlet = true;

    // aggregation
    int agg_time_cells = 41;
    int agg_space_cells = 41;
    int agg_boundary_time_cells = 96;    // finer time rows for the boundary series
    std::optional<double> crop_t0, crop_t1, crop_x0, crop_x1;  // domain crop

    // calibration
    std::vector<double> tau_grid = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};  // [s]

    lin::ReferenceState reference() const;
    solver::Grid grid() const;
    solver::BoundarySpec boundary_spec() const;
    solver::StateField initial_condition() const;
};

/// Parses a JSON config file; bad values raise ConfigError with the offending
/// field path. All values are range-checked.
RunConfig load(const std::string& path);
RunConfig from_json_text(const std::string& text);

/// Serialized resolved config (emitted next to run outputs for reproducibility).
std::string resolved_json(const RunConfig& cfg);

}  // namespace arz::config
