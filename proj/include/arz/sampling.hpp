#pragma once

#include "arz/ingest.hpp"
#include "arz/solver.hpp"

namespace arz::sampling {

struct FleetOptions {
    double resolution = 0.1;  // [s] trajectory recording interval
    double inlet_flux;        // [veh/s] spawn rate at x = 0
};

/// Synthetic full-fleet trajectories riding a simulated velocity field:
/// initial vehicles at inverse-CDF positions of rho(x,0), inlet spawns each
/// time the cumulative inflow crosses an integer, midpoint integration of
/// dx/dt = v(x,t), exit segment clipped exactly at x = L. Deterministic.
ingest::TrajectoryDataset sample_fleet(const solver::Trajectory& plant,
                                       const FleetOptions& options);

}  // namespace arz::sampling
