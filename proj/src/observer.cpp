#include "arz/observer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "arz/errors.hpp"

namespace arz::observer {

BoundaryMeasurements::BoundaryMeasurements(std::vector<double> times, std::vector<double> q_in,
                                           std::vector<double> q_out, std::vector<double> v_out,
                                           double max_gap)
    : times_(std::move(times)),
      q_in_(std::move(q_in)),
      q_out_(std::move(q_out)),
      v_out_(std::move(v_out)),
      max_gap_(max_gap) {
    if (times_.empty()) throw DataError("measurements: empty series");
    if (q_in_.size() != times_.size() || q_out_.size() != times_.size() ||
        v_out_.size() != times_.size())
        throw DataError("measurements: column lengths differ");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1]))
            throw DataError("measurements: times not strictly increasing at index " +
                            std::to_string(i));
    }
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (q_in_[i] < 0.0 || q_out_[i] < 0.0 || v_out_[i] < 0.0)
            throw DataError("measurements: negative flux or velocity at index " +
                            std::to_string(i));
    }
}

double BoundaryMeasurements::interp(const std::vector<double>& ys, double t) const {
    if (t <= times_.front()) return ys.front();
    if (t >= times_.back()) return ys.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin());
    const double t0 = times_[i - 1], t1 = times_[i];
    if (t1 - t0 > max_gap_)
        throw DataError("measurement gap of " + std::to_string(t1 - t0) + " s in [" +
                        std::to_string(t0) + ", " + std::to_string(t1) +
                        "] exceeds the configured maximum");
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * ys[i - 1] + w * ys[i];
}

double BoundaryMeasurements::q_in_at(double t) const { return interp(q_in_, t); }
double BoundaryMeasurements::q_out_at(double t) const { return interp(q_out_, t); }
double BoundaryMeasurements::v_out_at(double t) const { return interp(v_out_, t); }

InjectionTerms injection_terms(double w_bar_outlet, double w_hat_outlet,
                               const lin::GainProfile& gains) {
    const double mismatch = w_bar_outlet - w_hat_outlet;
    InjectionTerms inj;
    inj.e_w.resize(gains.r.size());
    inj.e_v.resize(gains.s.size());
    for (std::size_t i = 0; i < gains.r.size(); ++i) {
        inj.e_w[i] = gains.r[i] * mismatch;
        inj.e_v[i] = gains.s[i] * mismatch;
    }
    return inj;
}

double outlet_estimate_scaled(double rho_hat_last, double v_hat_last,
                              const lin::ReferenceState& ref, double tau, double length) {
    const double q_dev = rho_hat_last * v_hat_last - ref.q_star;
    const double v_dev = v_hat_last - ref.v_star;
    return lin::outlet_scaled_deviation(v_dev, q_dev, ref, tau, length);
}

void observer_step(ObserverState& state, const MeasurementSample& meas, double dt,
                   const solver::SpeedLaw& law, double tau, const solver::Grid& grid,
                   const ObserverOptions& options) {
    const std::size_t m = state.cons.rho.size();
    const double dx = grid.dx();

    // boundary ghosts: rho_hat(0,t) = y_q / v_hat(0,t), v_hat(L,t) = y_v(t)
    solver::BoundarySpec bc;
    bc.inlet_flux = [&](double) { return meas.q_in; };
    bc.outlet_kind = solver::OutletKind::FixedVelocity;
    bc.outlet_value = [&](double) { return meas.v_out; };
    const auto ghosts = solver::make_ghosts(state.cons, bc, state.t, law, options.v_floor);
    solver::lax_wendroff_step(state.cons, ghosts, dt, dx, tau, law);

    // output injections from the outlet mismatch, mapped to (rho, v) sources
    auto prim = solver::to_primitive(state.cons, law);
    const double w_bar =
        lin::outlet_scaled_deviation(meas.v_out - state.ref.v_star, meas.q_out - state.ref.q_star,
                                     state.ref, tau, grid.length);
    const double w_hat =
        outlet_estimate_scaled(prim.rho[m - 1], prim.v[m - 1], state.ref, tau, grid.length);
    const auto inj = injection_terms(w_bar, w_hat, state.gains);

    const double delta = state.ref.lambda1 - state.ref.lambda2;
    const double exp_L = std::exp(-grid.length / (tau * state.ref.lambda1));
    const auto x = grid.cell_centers();
    for (std::size_t j = 0; j < m; ++j) {
        const double exp_factor =
            options.x_varying_exponent ? std::exp(-x[j] / (tau * state.ref.lambda1)) : exp_L;
        const double s_rho = (exp_factor * inj.e_w[j] - inj.e_v[j]) / state.ref.v_star;
        const double s_v = delta / state.ref.q_star * inj.e_v[j];
        prim.rho[j] += dt * s_rho;
        prim.v[j] += dt * s_v;
    }
    state.cons = solver::to_conservative(prim, law);
    state.t += dt;
}

solver::Trajectory run_observer(const BoundaryMeasurements& meas,
                                const std::optional<solver::StateField>& init,
                                const fd::FundamentalDiagram& fd, double tau,
                                const lin::ReferenceState& ref, const solver::Grid& grid,
                                double total_time, const ObserverOptions& options) {
    const auto law = solver::speed_law(fd);

    solver::StateField start;
    if (init) {
        start = *init;
        if (static_cast<int>(start.rho.size()) != grid.num_cells)
            throw ConfigError("observer init field does not match the grid");
    } else {
        start.rho.assign(grid.num_cells, ref.rho_star);
        start.v.assign(grid.num_cells, ref.v_star);
    }

    ObserverState state;
    state.cons = solver::to_conservative(start, law);
    state.ref = ref;
    const auto centers = grid.cell_centers();
    state.gains = lin::injection_gains(ref, tau, grid.length, centers, options.formulation,
                                       options.eps_speed);

    const double dx = grid.dx();
    double dt = options.fixed_dt ? *options.fixed_dt
                                 : solver::cfl_dt(start, law, dx, options.cfl_safety) /
                                       options.speed_headroom;

    solver::Trajectory out;
    out.grid = grid;
    out.dt = dt;
    out.times.push_back(0.0);
    out.fields.push_back(start);

    const long n_steps = static_cast<long>(std::ceil(total_time / dt - 1e-12));
    for (long n = 0; n < n_steps; ++n) {
        const double t = n * dt;
        {
            auto prim = solver::to_primitive(state.cons, law);
            if (solver::max_wave_speed(prim, law) * dt > dx)
                throw BlowupError("observer CFL bound violated", n, t);
        }
        // the observer at step n reads measurements with timestamps <= t_n
        MeasurementSample sample{meas.q_in_at(t), meas.q_out_at(t), meas.v_out_at(t)};
        try {
            observer_step(state, sample, dt, law, tau, grid, options);
        } catch (const BlowupError& e) {
            throw BlowupError(std::string("observer diverged: ") + e.what(), n, t);
        }
        if ((n + 1) % options.output_every == 0 || n + 1 == n_steps) {
            out.times.push_back((n + 1) * dt);
            out.fields.push_back(solver::to_primitive(state.cons, law));
        }
    }
    return out;
}

BoundaryMeasurements measurements_from_trajectory(const solver::Trajectory& plant,
                                                  const lin::ReferenceState& ref,
                                                  bool setpoint_inlet) {
    std::vector<double> t, qi, qo, vo;
    const std::size_t m = plant.grid.num_cells;
    for (std::size_t k = 0; k < plant.times.size(); ++k) {
        const auto& f = plant.fields[k];
        t.push_back(plant.times[k]);
        qi.push_back(setpoint_inlet ? ref.q_star : f.rho[0] * f.v[0]);
        qo.push_back(f.rho[m - 1] * f.v[m - 1]);
        vo.push_back(f.v[m - 1]);
    }
    const double cadence = plant.times.size() > 1 ? plant.times[1] - plant.times[0] : 1.0;
    return BoundaryMeasurements(std::move(t), std::move(qi), std::move(qo), std::move(vo),
                                10.0 * cadence + 1.0);
}

LinearErrorRun simulate_linear_error_system(const std::vector<double>& ic_w,
                                            const std::vector<double>& ic_v,
                                            const lin::GainProfile& gains,
                                            const lin::ReferenceState& ref, double tau,
                                            const solver::Grid& grid, double total_time,
                                            double cfl) {
    if (lin::classify_regime(ref.lambda1, ref.lambda2) != lin::Regime::Congested)
        throw RegimeError("linear error system requires the congested regime");
    const std::size_t m = static_cast<std::size_t>(grid.num_cells);
    if (ic_w.size() != m || ic_v.size() != m)
        throw ConfigError("linear error system: IC size does not match the grid");
    const double dx = grid.dx();
    const double l1 = ref.lambda1, l2 = ref.lambda2;
    const double smax = std::max(std::abs(l1), std::abs(l2));
    const double dt = cfl * dx / smax;
    if (smax * dt > dx * (1.0 + 1e-12)) throw BlowupError("linear error system: CFL > 1", 0, 0.0);

    const auto x = grid.cell_centers();
    std::vector<double> c(m);
    for (std::size_t j = 0; j < m; ++j) c[j] = lin::c_of_x(x[j], tau, l1);

    std::vector<double> w = ic_w, v = ic_v, wn(m), vn(m);
    LinearErrorRun run;
    auto norm = [&] {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += (w[j] * w[j] + v[j] * v[j]) * dx;
        return std::sqrt(s);
    };
    run.times.push_back(0.0);
    run.l2_norm.push_back(norm());

    const long n_steps = static_cast<long>(std::ceil(total_time / dt - 1e-12));
    for (long n = 0; n < n_steps; ++n) {
        const double w_outlet = w[m - 1];
        const double w_inlet = l2 / l1 * v[0];  // w(0,t) = (l2/l1) v(0,t)
        for (std::size_t j = 0; j < m; ++j) {
            const double w_left = (j == 0) ? w_inlet : w[j - 1];
            const double v_right = (j == m - 1) ? 0.0 : v[j + 1];  // v(L,t) = 0
            // observer-side gains enter the error dynamics negated
            wn[j] = w[j] - l1 * dt / dx * (w[j] - w_left) - dt * gains.r[j] * w_outlet;
            vn[j] = v[j] - l2 * dt / dx * (v_right - v[j]) +
                    dt * (c[j] * w[j] - gains.s[j] * w_outlet);
        }
        w.swap(wn);
        v.swap(vn);
        run.times.push_back((n + 1) * dt);
        run.l2_norm.push_back(norm());
    }
    return run;
}

}  // namespace arz::observer
