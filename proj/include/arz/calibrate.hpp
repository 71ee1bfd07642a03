#pragma once

#include <array>
#include <functional>
#include <vector>

#include "arz/fd.hpp"

namespace arz::calibrate {

/// One density-flow observation in SI units.
struct ScatterPoint {
    double rho;  // [veh/m]
    double q;    // [veh/s]
};

struct FitResult {
    fd::FundamentalDiagram diagram;
    double residual;       // sum of squared flow errors [veh^2/s^2]
    int evaluations;
    bool converged;
};

/// Derivative-free Nelder-Mead with box clamping. Deterministic.
struct SimplexOptions {
    int max_evaluations = 20000;
    double f_tolerance = 1e-15;   // relative spread of simplex values
    double initial_step = 0.25;   // relative to parameter magnitude (or bound span)
};

struct SimplexResult {
    std::vector<double> x;
    double f;
    int evaluations;
    bool converged;
};

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          std::vector<double> start, const std::vector<double>& lower,
                          const std::vector<double>& upper, const SimplexOptions& options = {});

/// Least-squares fit of the three-parameter family with rho_m fixed externally.
/// Multi-start (8 fixed seeds) Nelder-Mead over (roundness, crit_shape, flow_scale).
/// Throws CalibrationError when no start converges to an admissible diagram.
FitResult calibrate_three_param(const std::vector<ScatterPoint>& scatter, double rho_m);

}  // namespace arz::calibrate
