#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "arz/fd.hpp"

namespace arz::solver {

/// Uniform cell-centered grid over [0, length].
struct Grid {
    double length;  // [m]
    int num_cells;

    double dx() const { return length / num_cells; }
    std::vector<double> cell_centers() const;
};

/// Primitive fields (density, velocity) at one instant.
struct StateField {
    std::vector<double> rho;  // [veh/m]
    std::vector<double> v;    // [m/s]
};

/// Conservative fields: y = rho (v - V(rho)).
struct ConservativeField {
    std::vector<double> rho;  // [veh/m]
    std::vector<double> y;    // [veh/s]
};

/// Equilibrium speed law the finite-volume kernels run on. Production code
/// adapts a FundamentalDiagram; tests may supply anything (e.g. constant V).
struct SpeedLaw {
    std::function<double(double)> value;  // V(rho) [m/s]
    std::function<double(double)> slope;  // V'(rho) [m/s per veh/m]
};

SpeedLaw speed_law(const fd::FundamentalDiagram& fd);

/// Throws BlowupError (step -1) when any rho <= 0.
ConservativeField to_conservative(const StateField& state, const SpeedLaw& law);
StateField to_primitive(const ConservativeField& cons, const SpeedLaw& law);

/// Pointwise fluxes F_rho = y + rho V(rho), F_y = y^2/rho + y V(rho).
struct FluxPair {
    double f_rho;  // [veh/s]
    double f_y;    // [veh m/s^2]
};
FluxPair numerical_flux(double rho, double y, const SpeedLaw& law);

/// Ghost-cell values at both ends, in conservative variables.
struct GhostCells {
    double rho_left, y_left;
    double rho_right, y_right;
};

/// One two-stage Lax-Wendroff advance with the relaxation source. Pass
/// tau = infinity for the homogeneous model. Optionally reports the half-step
/// boundary fluxes used (for mass bookkeeping).
void lax_wendroff_step(ConservativeField& cons, const GhostCells& ghosts, double dt, double dx,
                       double tau, const SpeedLaw& law, double* flux_in = nullptr,
                       double* flux_out = nullptr);

/// Largest local characteristic speed max(|v|, |v + rho V'(rho)|).
double max_wave_speed(const StateField& state, const SpeedLaw& law);

/// dt = safety * dx / max wave speed. Throws BlowupError when the state has no
/// propagation speed.
double cfl_dt(const StateField& state, const SpeedLaw& law, double dx, double safety);

/// Boundary prescription. Inlet always prescribes flux q(0,t); the ghost takes
/// its density from the interior velocity. Outlet kinds:
///  - CoupledDensity: density pinned, ghost velocity = interior flux / density
///    (the constant-outgoing-density condition written in flux form);
///  - FixedVelocity: velocity prescribed, density extrapolated zero-order;
///  - FixedDensity: density prescribed, velocity extrapolated zero-order.
enum class OutletKind { CoupledDensity, FixedVelocity, FixedDensity };

struct BoundarySpec {
    std::function<double(double)> inlet_flux;    // q(0,t) [veh/s]
    OutletKind outlet_kind = OutletKind::CoupledDensity;
    std::function<double(double)> outlet_value;  // density [veh/m] or velocity [m/s]
};

GhostCells make_ghosts(const ConservativeField& cons, const BoundarySpec& bc, double t,
                       const SpeedLaw& law, double v_floor);

struct SimulateOptions {
    double total_time;           // [s]
    int output_every = 1;        // store every n-th step
    double cfl_safety = 0.9;
    double speed_headroom = 1.0; // extra margin on the initial wave speed
    double v_floor = 0.1;        // [m/s] guard for flux-to-density division
    double rho_ceiling = 0.05;   // admissible overshoot above rho_m (fraction)
    std::optional<double> fixed_dt;  // overrides the CFL-derived step
};

/// Sampled solution of one run.
struct Trajectory {
    Grid grid;
    double dt = 0.0;             // [s] step actually used
    std::vector<double> times;   // [s] sample instants (includes t=0)
    std::vector<StateField> fields;
    double mass_in = 0.0;        // [veh] cumulative boundary inflow
    double mass_out = 0.0;       // [veh] cumulative boundary outflow
};

/// Fixed-dt Lax-Wendroff run with per-step CFL and state-validity guards
/// (violations throw BlowupError; nothing is clamped).
Trajectory simulate_plant(const StateField& initial, const BoundarySpec& bc,
                          const fd::FundamentalDiagram& fd, double tau, const Grid& grid,
                          const SimulateOptions& options);

/// Same engine with an arbitrary speed law (test hook for manufactured laws).
Trajectory simulate_with_law(const StateField& initial, const BoundarySpec& bc,
                             const SpeedLaw& law, double rho_max, double tau, const Grid& grid,
                             const SimulateOptions& options);

/// Sinusoidal initial condition around a setpoint:
///   rho = rho*(1 + a sin(m pi x / L)), v = v*(1 - a sin(m pi x / L)).
StateField sinusoidal_ic(const Grid& grid, double rho_star, double v_star, double amplitude,
                         int mode = 3);

}  // namespace arz::solver
