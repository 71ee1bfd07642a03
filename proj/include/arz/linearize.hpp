#pragma once

#include <span>
#include <vector>

#include "arz/fd.hpp"

namespace arz::lin {

/// Congested setpoint with derived characteristic speeds.
struct ReferenceState {
    double rho_star;  // [veh/m]
    double v_star;    // [m/s]
    double q_star;    // [veh/s], = rho_star * v_star
    double lambda1;   // [m/s], = v_star
    double lambda2;   // [m/s], = v_star + rho_star V'(rho_star)
};

/// Reference on the equilibrium curve: v* = V(rho*).
ReferenceState make_reference(const fd::FundamentalDiagram& fd, double rho_star);

/// Reference from measured averages; v* need not satisfy v* = V(rho*), the
/// speeds still follow Eq.-(15) form with the diagram's slope at rho*.
ReferenceState make_reference(const fd::FundamentalDiagram& fd, double rho_star, double v_star);

enum class Regime { FreeFlow, Congested, Critical };

/// Congested iff lambda2 < -eps; FreeFlow iff lambda2 > eps. Throws RegimeError
/// for lambda1 <= 0.
Regime classify_regime(double lambda1, double lambda2, double eps_speed = 1e-6);

/// Spatially varying coupling c(x) = -(1/tau) exp(-x / (tau lambda1)).
double c_of_x(double x, double tau, double lambda1);

/// Finite convergence time t_f = L/|lambda1| + L/|lambda2|.
double finite_time(double length, double lambda1, double lambda2);

/// Backstepping kernels in the closed forms
///   K(x) = -1/(l1-l2) c(-l2 (L-x)/(l1-l2)),   M(z) = -1/(l1-l2) c(z/(l1-l2)).
/// Both are bounded by 1/((l1-l2) tau).
double kernel_K(double x, const ReferenceState& ref, double tau, double length);
double kernel_M(double z, const ReferenceState& ref, double tau);

enum class GainFormulation {
    Exact,            // closed-form solution of the full transform conditions
    Simplified,       // r = lambda1 K, s from M; drops the integral coupling
};

/// Output-injection gains sampled on the solver grid. r and s multiply the
/// outlet mismatch w_bar(L,t) - w_hat(L,t) in the w- and v-estimate equations.
struct GainProfile {
    std::vector<double> x;  // sample positions [m]
    std::vector<double> r;  // [1/s]
    std::vector<double> s;  // [1/s]
    double t_f = 0.0;       // [s]
    GainFormulation formulation = GainFormulation::Exact;
};

/// Requires a congested reference (throws RegimeError otherwise).
GainProfile injection_gains(const ReferenceState& ref, double tau, double length,
                            std::span<const double> x_samples,
                            GainFormulation formulation = GainFormulation::Exact,
                            double eps_speed = 1e-6);

/// Riemann coordinates of a (flux, velocity) deviation pair.
struct RiemannPair {
    double xi1;  // [veh/s]
    double xi2;  // [veh/s]
};

RiemannPair to_riemann(double q_dev, double v_dev, const ReferenceState& ref);
/// Inverse: returns (q_dev, v_dev).
std::pair<double, double> from_riemann(double xi1, double xi2, const ReferenceState& ref);

/// Exponential scaling w_bar = exp(x/(tau lambda1)) xi1 (xi2 is unchanged).
double scale_state(double xi1, double x, double tau, double lambda1);
double unscale_state(double w_bar, double x, double tau, double lambda1);

/// w_bar(L, t) from outlet measurements:
///   exp(L/(tau l1)) (rho* l2/(l1-l2) Yv + Yq_out).
double outlet_scaled_deviation(double y_v_dev, double y_q_out_dev, const ReferenceState& ref,
                               double tau, double length);

}  // namespace arz::lin
