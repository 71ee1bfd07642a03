#pragma once

#include <variant>

namespace arz::fd {

/// Greenshield equilibrium family: V(rho) = v_f (1 - (rho/rho_m)^gamma).
/// The matching pressure is p(rho) = v_f (rho/rho_m)^gamma, i.e. C0 = v_f / rho_m^gamma.
struct GreenshieldParams {
    double v_f;    // free-flow speed [m/s]
    double rho_m;  // maximum density [veh/m]
    double gamma;  // pressure exponent [-]
};

/// Three-parameter flow family
///   Q(rho) = alpha (a + (b-a) rho/rho_m - sqrt(1 + roundness^2 (rho/rho_m - crit_shape)^2))
/// with a = sqrt(1 + (roundness*crit_shape)^2), b = sqrt(1 + (roundness*(1-crit_shape))^2).
/// `roundness` and `crit_shape` are the shape parameters usually written lambda and p;
/// those letters are taken here by the characteristic speeds and the pressure.
struct ThreeParamFD {
    double roundness;   // curve roundness [-], > 0
    double crit_shape;  // critical-density tuner [-], in (0, 1)
    double flow_scale;  // flow magnitude [veh/s], > 0
    double rho_m;       // maximum density [veh/m]
};

enum class Family { Greenshield, ThreeParam };

/// Equilibrium velocity/flow/pressure family; all operations are pure.
struct FundamentalDiagram {
    std::variant<GreenshieldParams, ThreeParamFD> params;

    Family family() const {
        return std::holds_alternative<GreenshieldParams>(params) ? Family::Greenshield
                                                                 : Family::ThreeParam;
    }
    double rho_max() const;
};

FundamentalDiagram greenshield(double v_f, double rho_m, double gamma = 1.0);
FundamentalDiagram three_param(double roundness, double crit_shape, double flow_scale,
                               double rho_m);

/// Parameter-range check plus numeric hyperbolicity (Q'' < 0, V' < 0 on a sample grid).
/// Throws ConfigError when violated.
void validate(const FundamentalDiagram& fd, int grid_points = 10000);

/// V(rho). Domain [0, rho_m]; rho = 0 returns the analytic limit Q'(0).
double equilibrium_velocity(const FundamentalDiagram& fd, double rho);

/// V(rho) without the domain guard: evaluates the closed form past rho_m.
/// Finite-volume transients may overshoot rho_m slightly; the solver enforces
/// its own admissibility band.
double velocity_extended(const FundamentalDiagram& fd, double rho);

/// V'(rho), analytic.
double velocity_slope(const FundamentalDiagram& fd, double rho);

/// Q(rho) = rho V(rho).
double equilibrium_flow(const FundamentalDiagram& fd, double rho);

/// Q'(rho) and Q''(rho), analytic.
double flow_slope(const FundamentalDiagram& fd, double rho);
double flow_curvature(const FundamentalDiagram& fd, double rho);

/// Traffic pressure p(rho) = V(0) - V(rho). Domain [0, rho_m].
double pressure(const FundamentalDiagram& fd, double rho);

/// The unique rho_c in (0, rho_m) with Q'(rho_c) = 0, located by bisection on Q'.
/// Throws CalibrationError if Q' has no sign change on (0, rho_m).
double critical_density(const FundamentalDiagram& fd, double tol_rel = 1e-12);

/// Maximum-density prescription: lanes / (vehicle_length * (1 + safety_fraction)).
double prescribe_rho_m(int num_lanes, double vehicle_length_m, double safety_fraction);

}  // namespace arz::fd
