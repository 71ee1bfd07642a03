#include "arz/linearize.hpp"

#include <cmath>
#include <string>

#include "arz/errors.hpp"

namespace arz::lin {

ReferenceState make_reference(const fd::FundamentalDiagram& fd, double rho_star) {
    if (!(rho_star > 0.0 && rho_star < fd.rho_max()))
        throw ConfigError("reference density must lie in (0, rho_m)");
    return make_reference(fd, rho_star, fd::equilibrium_velocity(fd, rho_star));
}

ReferenceState make_reference(const fd::FundamentalDiagram& fd, double rho_star, double v_star) {
    if (!(rho_star > 0.0 && rho_star < fd.rho_max()))
        throw ConfigError("reference density must lie in (0, rho_m)");
    ReferenceState ref;
    ref.rho_star = rho_star;
    ref.v_star = v_star;
    ref.q_star = rho_star * v_star;
    ref.lambda1 = v_star;
    ref.lambda2 = v_star + rho_star * fd::velocity_slope(fd, rho_star);
    return ref;
}

Regime classify_regime(double lambda1, double lambda2, double eps_speed) {
    if (!(lambda1 > 0.0))
        throw RegimeError("invalid reference: lambda1 = " + std::to_string(lambda1) +
                          " must be positive");
    if (lambda2 < -eps_speed) return Regime::Congested;
    if (lambda2 > eps_speed) return Regime::FreeFlow;
    return Regime::Critical;
}

double c_of_x(double x, double tau, double lambda1) {
    return -std::exp(-x / (tau * lambda1)) / tau;
}

double finite_time(double length, double lambda1, double lambda2) {
    return length / std::abs(lambda1) + length / std::abs(lambda2);
}

double kernel_K(double x, const ReferenceState& ref, double tau, double length) {
    const double delta = ref.lambda1 - ref.lambda2;
    return -c_of_x(-ref.lambda2 / delta * (length - x), tau, ref.lambda1) / delta;
}

double kernel_M(double z, const ReferenceState& ref, double tau) {
    const double delta = ref.lambda1 - ref.lambda2;
    return -c_of_x(z / delta, tau, ref.lambda1) / delta;
}

GainProfile injection_gains(const ReferenceState& ref, double tau, double length,
                            std::span<const double> x_samples, GainFormulation formulation,
                            double eps_speed) {
    if (classify_regime(ref.lambda1, ref.lambda2, eps_speed) != Regime::Congested)
        throw RegimeError("output injection gains require the congested regime (lambda2 < 0)");
    const double l1 = ref.lambda1, l2 = ref.lambda2, delta = l1 - l2;
    GainProfile g;
    g.formulation = formulation;
    g.t_f = finite_time(length, l1, l2);
    g.x.assign(x_samples.begin(), x_samples.end());
    g.r.resize(g.x.size());
    g.s.resize(g.x.size());
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double x = g.x[i];
        if (formulation == GainFormulation::Simplified) {
            g.r[i] = l1 * kernel_K(x, ref, tau, length);
            g.s[i] = l1 / delta * c_of_x(x - l2 / delta * (length - x), tau, l1);
        } else {
            // Exact solution of the backstepping conditions for the error system:
            // the Volterra equation for the gain collapses to a constant r and
            // s proportional to c(x); signs are observer-side (they multiply the
            // outlet mismatch in the estimate equations).
            g.r[i] = -l2 / (delta * tau);
            g.s[i] = l1 * c_of_x(x, tau, l1) / delta;
        }
    }
    return g;
}

RiemannPair to_riemann(double q_dev, double v_dev, const ReferenceState& ref) {
    const double delta = ref.lambda1 - ref.lambda2;
    RiemannPair xi;
    xi.xi1 = ref.rho_star * ref.lambda2 / delta * v_dev + q_dev;
    xi.xi2 = ref.q_star / delta * v_dev;
    return xi;
}

std::pair<double, double> from_riemann(double xi1, double xi2, const ReferenceState& ref) {
    const double delta = ref.lambda1 - ref.lambda2;
    const double v_dev = delta / ref.q_star * xi2;
    const double q_dev = xi1 - ref.lambda2 / ref.lambda1 * xi2;
    return {q_dev, v_dev};
}

double scale_state(double xi1, double x, double tau, double lambda1) {
    return std::exp(x / (tau * lambda1)) * xi1;
}

double unscale_state(double w_bar, double x, double tau, double lambda1) {
    return std::exp(-x / (tau * lambda1)) * w_bar;
}

double outlet_scaled_deviation(double y_v_dev, double y_q_out_dev, const ReferenceState& ref,
                               double tau, double length) {
    const double delta = ref.lambda1 - ref.lambda2;
    const double xi1 = ref.rho_star * ref.lambda2 / delta * y_v_dev + y_q_out_dev;
    return scale_state(xi1, length, tau, ref.lambda1);
}

}  // namespace arz::lin
