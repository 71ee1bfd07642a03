#include "arz/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "arz/errors.hpp"

namespace arz::solver {

std::vector<double> Grid::cell_centers() const {
    std::vector<double> x(num_cells);
    const double h = dx();
    for (int j = 0; j < num_cells; ++j) x[j] = (j + 0.5) * h;
    return x;
}

SpeedLaw speed_law(const fd::FundamentalDiagram& fd) {
    return SpeedLaw{
        [fd](double rho) { return fd::velocity_extended(fd, rho); },
        [fd](double rho) { return fd::velocity_slope(fd, rho); },
    };
}

ConservativeField to_conservative(const StateField& state, const SpeedLaw& law) {
    ConservativeField cons;
    cons.rho = state.rho;
    cons.y.resize(state.rho.size());
    for (std::size_t j = 0; j < state.rho.size(); ++j) {
        if (!(state.rho[j] > 0.0))
            throw BlowupError("degenerate state: rho <= 0 in cell " + std::to_string(j), -1, 0.0);
        cons.y[j] = state.rho[j] * (state.v[j] - law.value(state.rho[j]));
    }
    return cons;
}

StateField to_primitive(const ConservativeField& cons, const SpeedLaw& law) {
    StateField state;
    state.rho = cons.rho;
    state.v.resize(cons.rho.size());
    for (std::size_t j = 0; j < cons.rho.size(); ++j) {
        if (!(cons.rho[j] > 0.0))
            throw BlowupError("degenerate state: rho <= 0 in cell " + std::to_string(j), -1, 0.0);
        state.v[j] = cons.y[j] / cons.rho[j] + law.value(cons.rho[j]);
    }
    return state;
}

FluxPair numerical_flux(double rho, double y, const SpeedLaw& law) {
    if (!(rho > 0.0)) throw BlowupError("degenerate state: rho <= 0 at flux evaluation", -1, 0.0);
    const double V = law.value(rho);
    return FluxPair{y + rho * V, y * y / rho + y * V};
}

void lax_wendroff_step(ConservativeField& cons, const GhostCells& ghosts, double dt, double dx,
                       double tau, const SpeedLaw& law, double* flux_in, double* flux_out) {
    const std::size_t m = cons.rho.size();
    const double inv_tau = std::isinf(tau) ? 0.0 : 1.0 / tau;

    // extended arrays with one ghost per side
    std::vector<double> re(m + 2), ye(m + 2);
    re[0] = ghosts.rho_left;
    ye[0] = ghosts.y_left;
    for (std::size_t j = 0; j < m; ++j) {
        re[j + 1] = cons.rho[j];
        ye[j + 1] = cons.y[j];
    }
    re[m + 1] = ghosts.rho_right;
    ye[m + 1] = ghosts.y_right;

    std::vector<double> fr(m + 2), fy(m + 2);
    for (std::size_t j = 0; j < m + 2; ++j) {
        const auto f = numerical_flux(re[j], ye[j], law);
        fr[j] = f.f_rho;
        fy[j] = f.f_y;
    }

    // first stage: interface states at t + dt/2
    const double lam = dt / (2.0 * dx);
    std::vector<double> frh(m + 1), fyh(m + 1), yhalf(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        const double rh = 0.5 * (re[j] + re[j + 1]) - lam * (fr[j + 1] - fr[j]);
        const double yh = 0.5 * (ye[j] + ye[j + 1]) - lam * (fy[j + 1] - fy[j]) -
                          dt * inv_tau * 0.25 * (ye[j] + ye[j + 1]);
        const auto f = numerical_flux(rh, yh, law);
        frh[j] = f.f_rho;
        fyh[j] = f.f_y;
        yhalf[j] = yh;
    }

    if (flux_in) *flux_in = frh[0];
    if (flux_out) *flux_out = frh[m];

    const double mu = dt / dx;
    for (std::size_t j = 0; j < m; ++j) {
        cons.rho[j] -= mu * (frh[j + 1] - frh[j]);
        cons.y[j] -= mu * (fyh[j + 1] - fyh[j]) + dt * inv_tau * 0.5 * (yhalf[j + 1] + yhalf[j]);
    }
}

double max_wave_speed(const StateField& state, const SpeedLaw& law) {
    double s = 0.0;
    for (std::size_t j = 0; j < state.rho.size(); ++j) {
        const double l1 = std::abs(state.v[j]);
        const double l2 = std::abs(state.v[j] + state.rho[j] * law.slope(state.rho[j]));
        s = std::max(s, std::max(l1, l2));
    }
    return s;
}

double cfl_dt(const StateField& state, const SpeedLaw& law, double dx, double safety) {
    const double s = max_wave_speed(state, law);
    if (!(s > 0.0)) throw BlowupError("CFL: maximum wave speed is zero", -1, 0.0);
    return safety * dx / s;
}

GhostCells make_ghosts(const ConservativeField& cons, const BoundarySpec& bc, double t,
                       const SpeedLaw& law, double v_floor) {
    const std::size_t m = cons.rho.size();
    GhostCells g;

    // inlet: prescribed flux; ghost density from the interior velocity
    const double v1 = std::max(cons.y[0] / cons.rho[0] + law.value(cons.rho[0]), v_floor);
    const double q_in = bc.inlet_flux(t);
    g.rho_left = q_in / v1;
    g.y_left = g.rho_left * (v1 - law.value(g.rho_left));

    const double rho_last = cons.rho[m - 1];
    const double v_last = cons.y[m - 1] / rho_last + law.value(rho_last);
    switch (bc.outlet_kind) {
        case OutletKind::CoupledDensity: {
            const double rho_out = bc.outlet_value(t);
            const double v_g = rho_last * v_last / rho_out;  // carries the interior flux
            g.rho_right = rho_out;
            g.y_right = rho_out * (v_g - law.value(rho_out));
            break;
        }
        case OutletKind::FixedVelocity: {
            const double v_out = bc.outlet_value(t);
            g.rho_right = rho_last;
            g.y_right = rho_last * (v_out - law.value(rho_last));
            break;
        }
        case OutletKind::FixedDensity: {
            const double rho_out = bc.outlet_value(t);
            g.rho_right = rho_out;
            g.y_right = rho_out * (v_last - law.value(rho_out));
            break;
        }
    }
    return g;
}

namespace {

void check_state(const ConservativeField& cons, const SpeedLaw& law, double rho_max,
                 double rho_ceiling, long step, double t) {
    for (std::size_t j = 0; j < cons.rho.size(); ++j) {
        const double rho = cons.rho[j];
        if (!std::isfinite(rho) || !std::isfinite(cons.y[j]))
            throw BlowupError("non-finite state in cell " + std::to_string(j), step, t);
        if (!(rho > 0.0))
            throw BlowupError("non-positive density in cell " + std::to_string(j), step, t);
        if (rho_max > 0.0 && rho > rho_max * (1.0 + rho_ceiling))
            throw BlowupError("density above rho_m in cell " + std::to_string(j), step, t);
        const double v = cons.y[j] / rho + law.value(rho);
        if (v < 0.0)
            throw BlowupError("negative velocity in cell " + std::to_string(j), step, t);
    }
}

}  // namespace

Trajectory simulate_with_law(const StateField& initial, const BoundarySpec& bc,
                             const SpeedLaw& law, double rho_max, double tau, const Grid& grid,
                             const SimulateOptions& options) {
    if (static_cast<int>(initial.rho.size()) != grid.num_cells ||
        initial.v.size() != initial.rho.size())
        throw ConfigError("initial state size does not match the grid");

    const double dx = grid.dx();
    double dt = options.fixed_dt
                    ? *options.fixed_dt
                    : cfl_dt(initial, law, dx, options.cfl_safety) / options.speed_headroom;
    // refuse a manual dt that violates CFL at t = 0
    if (max_wave_speed(initial, law) * dt > dx)
        throw BlowupError("requested dt exceeds the CFL bound at t=0", 0, 0.0);

    Trajectory out;
    out.grid = grid;
    out.dt = dt;
    out.times.push_back(0.0);
    out.fields.push_back(initial);

    ConservativeField cons = to_conservative(initial, law);
    const long n_steps = static_cast<long>(std::ceil(options.total_time / dt - 1e-12));
    for (long n = 0; n < n_steps; ++n) {
        const double t = n * dt;
        // fixed dt, re-checked every step; abort rather than adapt
        {
            StateField s = to_primitive(cons, law);
            if (max_wave_speed(s, law) * dt > dx)
                throw BlowupError("CFL bound violated", n, t);
        }
        const GhostCells ghosts = make_ghosts(cons, bc, t, law, options.v_floor);
        double f_in = 0.0, f_out = 0.0;
        lax_wendroff_step(cons, ghosts, dt, dx, tau, law, &f_in, &f_out);
        out.mass_in += dt * f_in;
        out.mass_out += dt * f_out;
        check_state(cons, law, rho_max, options.rho_ceiling, n, t + dt);
        if ((n + 1) % options.output_every == 0 || n + 1 == n_steps) {
            out.times.push_back((n + 1) * dt);
            out.fields.push_back(to_primitive(cons, law));
        }
    }
    return out;
}

Trajectory simulate_plant(const StateField& initial, const BoundarySpec& bc,
                          const fd::FundamentalDiagram& fd, double tau, const Grid& grid,
                          const SimulateOptions& options) {
    return simulate_with_law(initial, bc, speed_law(fd), fd.rho_max(), tau, grid, options);
}

StateField sinusoidal_ic(const Grid& grid, double rho_star, double v_star, double amplitude,
                         int mode) {
    StateField s;
    s.rho.resize(grid.num_cells);
    s.v.resize(grid.num_cells);
    const auto x = grid.cell_centers();
    for (int j = 0; j < grid.num_cells; ++j) {
        const double w = amplitude * std::sin(mode * M_PI * x[j] / grid.length);
        s.rho[j] = rho_star * (1.0 + w);
        s.v[j] = v_star * (1.0 - w);
    }
    return s;
}

}  // namespace arz::solver
