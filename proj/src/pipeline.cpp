#include "arz/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arz/errors.hpp"
#include "arz/interp.hpp"
#include "arz/sampling.hpp"

namespace arz::pipeline {

TwinResult run_twin(const config::RunConfig& cfg) {
    const auto ref = cfg.reference();
    const auto grid = cfg.grid();

    solver::SimulateOptions sim_opts;
    sim_opts.total_time = cfg.total_time;
    sim_opts.output_every = 1;  // the observer shares the plant step
    sim_opts.cfl_safety = cfg.cfl_safety;
    sim_opts.fixed_dt = cfg.fixed_dt;

    TwinResult out;
    out.plant = solver::simulate_plant(cfg.initial_condition(), cfg.boundary_spec(), cfg.diagram,
                                       cfg.tau, grid, sim_opts);

    const auto meas =
        observer::measurements_from_trajectory(out.plant, ref, cfg.twin_setpoint_inlet);

    observer::ObserverOptions obs_opts;
    obs_opts.formulation = cfg.gain_formulation;
    obs_opts.eps_speed = cfg.eps_speed;
    obs_opts.x_varying_exponent = cfg.x_varying_exponent;
    obs_opts.v_floor = cfg.v_floor;
    obs_opts.fixed_dt = out.plant.dt;
    obs_opts.output_every = 1;
    out.estimate = observer::run_observer(meas, std::nullopt, cfg.diagram, cfg.tau, ref, grid,
                                          out.plant.times.back(), obs_opts);
    out.errors = metrics::l2_error_series(out.plant, out.estimate, ref);
    return out;
}

std::pair<double, double> grid_vs_trajectory_error(const ingest::AggregatedGrid& agg,
                                                   const solver::Trajectory& truth,
                                                   const lin::ReferenceState& ref) {
    const interp::FieldInterpolator f(truth);
    double acc_rho = 0.0, acc_v = 0.0;
    long n = 0;
    for (int i = 0; i < agg.n_t; ++i) {
        for (int j = 0; j < agg.n_x; ++j) {
            const auto c = agg.at(i, j);
            if (agg.count[c] == 0) continue;
            const double t = agg.t_center(i), x = agg.x_center(j);
            const double dr = (agg.rho[c] - f.density(t, x)) / ref.rho_star;
            const double dv = (agg.v[c] - f.velocity(t, x)) / ref.v_star;
            acc_rho += dr * dr;
            acc_v += dv * dv;
            ++n;
        }
    }
    if (n == 0) throw DataError("grid_vs_trajectory_error: no covered cells");
    return {std::sqrt(acc_rho / n), std::sqrt(acc_v / n)};
}

SyntheticResult run_synthetic(const config::RunConfig& cfg, double detection_threshold) {
    const auto ref = cfg.reference();
    const auto grid = cfg.grid();

    SyntheticResult out;
    {
        solver::SimulateOptions sim_opts;
        sim_opts.total_time = cfg.total_time;
        sim_opts.output_every = 1;
        sim_opts.cfl_safety = cfg.cfl_safety;
        out.plant = solver::simulate_plant(cfg.initial_condition(), cfg.boundary_spec(),
                                           cfg.diagram, cfg.tau, grid, sim_opts);
    }

    sampling::FleetOptions fleet_opts;
    fleet_opts.inlet_flux = cfg.inlet_flux.value_or(ref.q_star);
    out.fleet = sampling::sample_fleet(out.plant, fleet_opts);

    const ingest::Domain domain{0.0, out.plant.times.back(), 0.0, cfg.length};
    out.aggregate = ingest::edie_aggregate(out.fleet, cfg.agg_time_cells, cfg.agg_space_cells,
                                           domain);
    out.averages = ingest::dataset_averages(out.aggregate);
    out.aggregation_error = grid_vs_trajectory_error(out.aggregate, out.plant, ref);

    const auto boundary_grid = ingest::edie_aggregate(out.fleet, cfg.agg_boundary_time_cells,
                                                      cfg.agg_space_cells, domain);
    const auto series = ingest::boundary_series(boundary_grid, cfg.data_max_gap);

    observer::ObserverOptions obs_opts;
    obs_opts.formulation = cfg.gain_formulation;
    obs_opts.eps_speed = cfg.eps_speed;
    obs_opts.x_varying_exponent = cfg.x_varying_exponent;
    obs_opts.v_floor = cfg.v_floor;
    obs_opts.cfl_safety = cfg.cfl_safety;
    obs_opts.speed_headroom = cfg.speed_headroom;
    out.estimate = observer::run_observer(series, std::nullopt, cfg.diagram, cfg.tau, ref, grid,
                                          out.plant.times.back(), obs_opts);

    const auto truth = interp::resample(out.plant, out.estimate.times, out.estimate.grid);
    out.errors = metrics::l2_error_series(truth, out.estimate, ref);
    out.convergence_time = metrics::convergence_time(out.errors, detection_threshold);
    return out;
}

namespace {

// data rows carry absolute times; observer runs on run-relative time
observer::BoundaryMeasurements rebase(const observer::BoundaryMeasurements& m, double t0,
                                      double max_gap) {
    std::vector<double> t(m.times());
    for (auto& v : t) v -= t0;
    return observer::BoundaryMeasurements(std::move(t), m.q_in(), m.q_out(), m.v_out(), max_gap);
}

solver::StateField row_field(const ingest::AggregatedGrid& agg, int row,
                             const std::vector<double>& x_targets) {
    // linear interpolation over non-empty cells of one time row
    std::vector<double> xs, rho, v;
    for (int j = 0; j < agg.n_x; ++j) {
        const auto c = agg.at(row, j);
        if (agg.count[c] == 0) continue;
        xs.push_back(agg.x_center(j) - agg.domain.x0);
        rho.push_back(agg.rho[c]);
        v.push_back(agg.v[c]);
    }
    if (xs.size() < 2) throw DataError("aggregate row " + std::to_string(row) + " nearly empty");
    auto interp1 = [&](const std::vector<double>& ys, double x) {
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - xs.begin());
        const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return (1.0 - w) * ys[k - 1] + w * ys[k];
    };
    solver::StateField f;
    for (double x : x_targets) {
        f.rho.push_back(interp1(rho, x));
        f.v.push_back(interp1(v, x));
    }
    return f;
}

}  // namespace

DataResult run_data(const config::RunConfig& cfg, const ingest::TrajectoryDataset& data,
                    double detection_threshold) {
    if (data.vehicles.empty()) throw DataError("run_data: empty dataset");
    double t_min = std::numeric_limits<double>::infinity(), t_max = -t_min;
    for (const auto& veh : data.vehicles) {
        t_min = std::min(t_min, veh.t.front());
        t_max = std::max(t_max, veh.t.back());
    }
    ingest::Domain domain{cfg.crop_t0.value_or(t_min), cfg.crop_t1.value_or(t_max),
                          cfg.crop_x0.value_or(0.0), cfg.crop_x1.value_or(cfg.length)};
    if (std::abs((domain.x1 - domain.x0) - cfg.length) > 1e-9)
        throw ConfigError("data domain span does not match model.length_m; adjust the crop");

    DataResult out;
    out.aggregate =
        ingest::edie_aggregate(data, cfg.agg_time_cells, cfg.agg_space_cells, domain);
    out.averages = ingest::dataset_averages(out.aggregate);
    out.ref = lin::make_reference(cfg.diagram, out.averages.rho_star, out.averages.v_star);

    const auto boundary_grid = ingest::edie_aggregate(data, cfg.agg_boundary_time_cells,
                                                      cfg.agg_space_cells, domain);
    const auto series_abs = ingest::boundary_series(boundary_grid, cfg.data_max_gap, &out.gaps);
    const auto series = rebase(series_abs, domain.t0, cfg.data_max_gap);

    observer::ObserverOptions obs_opts;
    obs_opts.formulation = cfg.gain_formulation;
    obs_opts.eps_speed = cfg.eps_speed;
    obs_opts.x_varying_exponent = cfg.x_varying_exponent;
    obs_opts.v_floor = cfg.v_floor;
    obs_opts.cfl_safety = cfg.cfl_safety;
    obs_opts.speed_headroom = cfg.speed_headroom;
    const solver::Grid grid = cfg.grid();
    out.estimate = observer::run_observer(series, std::nullopt, cfg.diagram, cfg.tau, out.ref,
                                          grid, domain.t1 - domain.t0, obs_opts);

    // errors per reconstruction row, empty cells excluded
    const interp::FieldInterpolator est(out.estimate);
    const auto x_centers = grid.cell_centers();
    for (int i = 0; i < out.aggregate.n_t; ++i) {
        const double t_row = out.aggregate.t_center(i) - domain.t0;
        std::vector<double> xs, truth_rho, truth_v, est_rho, est_v;
        for (int j = 0; j < out.aggregate.n_x; ++j) {
            const auto c = out.aggregate.at(i, j);
            const double x = out.aggregate.x_center(j) - domain.x0;
            xs.push_back(x);
            const bool ok = out.aggregate.count[c] > 0;
            truth_rho.push_back(ok ? out.aggregate.rho[c]
                                   : std::numeric_limits<double>::quiet_NaN());
            truth_v.push_back(ok ? out.aggregate.v[c] : std::numeric_limits<double>::quiet_NaN());
            est_rho.push_back(est.density(t_row, x));
            est_v.push_back(est.velocity(t_row, x));
        }
        out.errors.times.push_back(t_row);
        out.errors.e_rho.push_back(metrics::l2_error(xs, truth_rho, est_rho, out.ref.rho_star));
        out.errors.e_v.push_back(metrics::l2_error(xs, truth_v, est_v, out.ref.v_star));
    }
    out.convergence_time = metrics::convergence_time(out.errors, detection_threshold);
    return out;
}

TauSelection select_tau(const config::RunConfig& cfg, const ingest::AggregatedGrid& data) {
    if (cfg.tau_grid.empty()) throw ConfigError("select_tau: empty tau grid");
    const auto series_abs = ingest::boundary_series(data, cfg.data_max_gap);
    const auto series = rebase(series_abs, data.domain.t0, cfg.data_max_gap);
    const lin::ReferenceState ref = [&] {
        const auto avg = ingest::dataset_averages(data);
        return lin::make_reference(cfg.diagram, avg.rho_star, avg.v_star);
    }();

    const solver::Grid grid = cfg.grid();
    const auto x_centers = grid.cell_centers();
    const auto ic = row_field(data, 0, x_centers);
    const double horizon = data.domain.t1 - data.domain.t0;

    solver::BoundarySpec bc;
    bc.inlet_flux = [&series](double t) { return series.q_in_at(t); };
    bc.outlet_kind = solver::OutletKind::FixedVelocity;
    bc.outlet_value = [&series](double t) { return series.v_out_at(t); };

    TauSelection out;
    out.best_tau = cfg.tau_grid.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (double tau : cfg.tau_grid) {
        double err;
        try {
            solver::SimulateOptions opts;
            opts.total_time = horizon;
            opts.output_every = 1;
            opts.cfl_safety = cfg.cfl_safety;
            opts.speed_headroom = cfg.speed_headroom;
            const auto sim = solver::simulate_plant(ic, bc, cfg.diagram, tau, grid, opts);
            const interp::FieldInterpolator f(sim);
            double acc = 0.0;
            for (int i = 0; i < data.n_t; ++i) {
                const double t_row = data.t_center(i) - data.domain.t0;
                std::vector<double> xs, truth_rho, truth_v, sim_rho, sim_v;
                for (int j = 0; j < data.n_x; ++j) {
                    const auto c = data.at(i, j);
                    const double x = data.x_center(j) - data.domain.x0;
                    xs.push_back(x);
                    const bool ok = data.count[c] > 0;
                    truth_rho.push_back(ok ? data.rho[c]
                                           : std::numeric_limits<double>::quiet_NaN());
                    truth_v.push_back(ok ? data.v[c]
                                         : std::numeric_limits<double>::quiet_NaN());
                    sim_rho.push_back(f.density(t_row, x));
                    sim_v.push_back(f.velocity(t_row, x));
                }
                acc += metrics::l2_error(xs, truth_rho, sim_rho, ref.rho_star) +
                       metrics::l2_error(xs, truth_v, sim_v, ref.v_star);
            }
            err = acc / data.n_t;
        } catch (const BlowupError&) {
            err = std::numeric_limits<double>::infinity();
        }
        out.errors.emplace_back(tau, err);
        if (err < best_err) {
            best_err = err;
            out.best_tau = tau;
        }
    }
    return out;
}

}  // namespace arz::pipeline
