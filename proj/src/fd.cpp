#include "arz/fd.hpp"

#include <cmath>
#include <string>

#include "arz/errors.hpp"

namespace arz::fd {

namespace {

constexpr double kDomainSlack = 1e-12;

// sqrt(1 + (roundness*(y - crit_shape))^2) and friends, y = rho/rho_m
struct ThreeParamTerms {
    double a, b, root, u;  // u = roundness*(y - crit_shape)
};

ThreeParamTerms terms(const ThreeParamFD& p, double y) {
    ThreeParamTerms t;
    t.a = std::hypot(1.0, p.roundness * p.crit_shape);
    t.b = std::hypot(1.0, p.roundness * (1.0 - p.crit_shape));
    t.u = p.roundness * (y - p.crit_shape);
    t.root = std::hypot(1.0, t.u);
    return t;
}

void check_domain(const FundamentalDiagram& fd, double rho, bool allow_zero) {
    const double rho_m = fd.rho_max();
    if (rho < (allow_zero ? 0.0 : -0.0) || rho > rho_m * (1.0 + kDomainSlack) ||
        (!allow_zero && rho <= 0.0)) {
        throw std::domain_error("density " + std::to_string(rho) +
                                " outside [0, rho_m=" + std::to_string(rho_m) + "]");
    }
}

}  // namespace

double FundamentalDiagram::rho_max() const {
    if (const auto* g = std::get_if<GreenshieldParams>(&params)) return g->rho_m;
    return std::get<ThreeParamFD>(params).rho_m;
}

FundamentalDiagram greenshield(double v_f, double rho_m, double gamma) {
    FundamentalDiagram fd{GreenshieldParams{v_f, rho_m, gamma}};
    validate(fd, 0);
    return fd;
}

FundamentalDiagram three_param(double roundness, double crit_shape, double flow_scale,
                               double rho_m) {
    FundamentalDiagram fd{ThreeParamFD{roundness, crit_shape, flow_scale, rho_m}};
    validate(fd, 0);
    return fd;
}

void validate(const FundamentalDiagram& fd, int grid_points) {
    if (const auto* g = std::get_if<GreenshieldParams>(&fd.params)) {
        if (!(g->v_f > 0.0)) throw ConfigError("greenshield: v_f must be > 0");
        if (!(g->rho_m > 0.0)) throw ConfigError("greenshield: rho_m must be > 0");
        if (!(g->gamma > 0.0)) throw ConfigError("greenshield: gamma must be > 0");
    } else {
        const auto& p = std::get<ThreeParamFD>(fd.params);
        if (!(p.roundness > 0.0)) throw ConfigError("three_param: roundness must be > 0");
        if (!(p.crit_shape > 0.0 && p.crit_shape < 1.0))
            throw ConfigError("three_param: crit_shape must be in (0, 1)");
        if (!(p.flow_scale > 0.0)) throw ConfigError("three_param: flow_scale must be > 0");
        if (!(p.rho_m > 0.0)) throw ConfigError("three_param: rho_m must be > 0");
    }
    // Hyperbolicity on a sample grid (both closed forms guarantee it, but a fit
    // is only accepted after this passes).
    const double rho_m = fd.rho_max();
    for (int i = 1; i < grid_points; ++i) {
        const double rho = rho_m * static_cast<double>(i) / grid_points;
        if (!(flow_curvature(fd, rho) < 0.0))
            throw ConfigError("diagram not strictly concave at rho=" + std::to_string(rho));
        if (!(velocity_slope(fd, rho) < 0.0))
            throw ConfigError("diagram velocity not strictly decreasing at rho=" +
                              std::to_string(rho));
    }
}

double equilibrium_velocity(const FundamentalDiagram& fd, double rho) {
    check_domain(fd, rho, true);
    return velocity_extended(fd, rho);
}

double velocity_extended(const FundamentalDiagram& fd, double rho) {
    if (const auto* g = std::get_if<GreenshieldParams>(&fd.params)) {
        return g->v_f * (1.0 - std::pow(rho / g->rho_m, g->gamma));
    }
    const auto& p = std::get<ThreeParamFD>(fd.params);
    if (rho == 0.0) return flow_slope(fd, 0.0);  // limit Q(rho)/rho as rho -> 0
    const auto t = terms(p, rho / p.rho_m);
    return p.flow_scale * (t.a + (t.b - t.a) * (rho / p.rho_m) - t.root) / rho;
}

double velocity_slope(const FundamentalDiagram& fd, double rho) {
    if (const auto* g = std::get_if<GreenshieldParams>(&fd.params)) {
        return -g->v_f * g->gamma * std::pow(rho / g->rho_m, g->gamma - 1.0) / g->rho_m;
    }
    if (rho == 0.0) return 0.5 * flow_curvature(fd, 0.0);
    return (flow_slope(fd, rho) - equilibrium_velocity(fd, rho)) / rho;
}

double equilibrium_flow(const FundamentalDiagram& fd, double rho) {
    check_domain(fd, rho, true);
    if (const auto* g = std::get_if<GreenshieldParams>(&fd.params)) {
        return rho * g->v_f * (1.0 - std::pow(rho / g->rho_m, g->gamma));
    }
    const auto& p = std::get<ThreeParamFD>(fd.params);
    const auto t = terms(p, rho / p.rho_m);
    return p.flow_scale * (t.a + (t.b - t.a) * (rho / p.rho_m) - t.root);
}

double flow_slope(const FundamentalDiagram& fd, double rho) {
    if (const auto* g = std::get_if<GreenshieldParams>(&fd.params)) {
        return g->v_f * (1.0 - (g->gamma + 1.0) * std::pow(rho / g->rho_m, g->gamma));
    }
    const auto& p = std::get<ThreeParamFD>(fd.params);
    const auto t = terms(p, rho / p.rho_m);
    return p.flow_scale / p.rho_m * ((t.b - t.a) - p.roundness * t.u / t.root);
}

double flow_curvature(const FundamentalDiagram& fd, double rho) {
    if (const auto* g = std::get_if<GreenshieldParams>(&fd.params)) {
        return -g->v_f * g->gamma * (g->gamma + 1.0) *
               std::pow(rho / g->rho_m, g->gamma - 1.0) / g->rho_m;
    }
    const auto& p = std::get<ThreeParamFD>(fd.params);
    const auto t = terms(p, rho / p.rho_m);
    const double r2 = t.root * t.root;
    return -p.flow_scale * p.roundness * p.roundness / (p.rho_m * p.rho_m * r2 * t.root);
}

double pressure(const FundamentalDiagram& fd, double rho) {
    check_domain(fd, rho, true);
    return equilibrium_velocity(fd, 0.0) - equilibrium_velocity(fd, rho);
}

double critical_density(const FundamentalDiagram& fd, double tol_rel) {
    const double rho_m = fd.rho_max();
    double lo = rho_m * 1e-12, hi = rho_m * (1.0 - 1e-12);
    double f_lo = flow_slope(fd, lo), f_hi = flow_slope(fd, hi);
    if (!(f_lo > 0.0 && f_hi < 0.0))
        throw CalibrationError("flow slope has no sign change on (0, rho_m)", 0.0);
    for (int iter = 0; iter < 200 && (hi - lo) > tol_rel * rho_m; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (flow_slope(fd, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double prescribe_rho_m(int num_lanes, double vehicle_length_m, double safety_fraction) {
    if (num_lanes <= 0 || !(vehicle_length_m > 0.0) || safety_fraction < 0.0)
        throw ConfigError("prescribe_rho_m: lanes and vehicle length must be positive");
    return static_cast<double>(num_lanes) / (vehicle_length_m * (1.0 + safety_fraction));
}

}  // namespace arz::fd
