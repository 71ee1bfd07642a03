#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "arz/calibrate.hpp"
#include "arz/config.hpp"
#include "arz/csv.hpp"
#include "arz/errors.hpp"
#include "arz/interp.hpp"
#include "arz/pipeline.hpp"
#include "arz/run_io.hpp"
#include "arz/units.hpp"

namespace fs = std::filesystem;
using namespace arz;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string units;  // overrides config when set
    std::uint64_t seed = 0;
    bool seed_set = false;
};

config::RunConfig load_config(const CommonArgs& args) {
    config::RunConfig cfg =
        args.config_path.empty() ? config::RunConfig{} : config::load(args.config_path);
    if (!args.units.empty()) {
        if (args.units != "si" && args.units != "traffic")
            throw ConfigError("--units: expected 'si' or 'traffic'");
        cfg.units = args.units;
    }
    if (args.seed_set) cfg.seed = args.seed;
    return cfg;
}

void write_resolved(const config::RunConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "resolved_config.json");
    out << config::resolved_json(cfg);
}

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = false) {
    auto* opt = cmd->add_option("--config", args.config_path, "run config JSON");
    if (config_required) opt->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--units", args.units, "output units: si|traffic");
    cmd->add_option("--seed", args.seed, "RNG seed override")
        ->each([&args](const std::string&) { args.seed_set = true; });
}

int cmd_simulate(const CommonArgs& args) {
    const auto cfg = load_config(args);
    write_resolved(cfg, args.out_dir);
    solver::SimulateOptions opts;
    opts.total_time = cfg.total_time;
    opts.output_every = cfg.output_every;
    opts.cfl_safety = cfg.cfl_safety;
    opts.fixed_dt = cfg.fixed_dt;
    const auto traj = solver::simulate_plant(cfg.initial_condition(), cfg.boundary_spec(),
                                             cfg.diagram, cfg.tau, cfg.grid(), opts);
    run_io::write_field_trajectory((fs::path(args.out_dir) / "trajectory.csv").string(), traj,
                                   cfg.units);
    std::cout << "wrote " << args.out_dir << "/trajectory.csv (" << traj.times.size()
              << " samples, dt=" << traj.dt << " s)\n";
    return 0;
}

int cmd_gains(const CommonArgs& args) {
    const auto cfg = load_config(args);
    write_resolved(cfg, args.out_dir);
    const auto ref = cfg.reference();
    const auto centers = cfg.grid().cell_centers();
    const auto gains =
        lin::injection_gains(ref, cfg.tau, cfg.length, centers, cfg.gain_formulation);
    run_io::write_gain_profile((fs::path(args.out_dir) / "gains.csv").string(), gains);
    std::cout << "wrote " << args.out_dir << "/gains.csv (t_f=" << gains.t_f << " s)\n";
    return 0;
}

int cmd_observe(const CommonArgs& args, const std::string& plant_path,
                const std::string& meas_path, double threshold) {
    const auto cfg = load_config(args);
    write_resolved(cfg, args.out_dir);
    const fs::path out_dir(args.out_dir);

    if (!plant_path.empty()) {  // twin mode
        const auto plant = run_io::read_field_trajectory(plant_path);
        const auto ref = cfg.reference();
        const auto meas =
            observer::measurements_from_trajectory(plant, ref, cfg.twin_setpoint_inlet);
        observer::ObserverOptions opts;
        opts.formulation = cfg.gain_formulation;
        opts.eps_speed = cfg.eps_speed;
        opts.x_varying_exponent = cfg.x_varying_exponent;
        opts.v_floor = cfg.v_floor;
        opts.cfl_safety = cfg.cfl_safety;
        opts.speed_headroom = cfg.speed_headroom;
        // share the plant step when the file carries it; a subsampled file's
        // cadence can exceed the CFL bound, then the observer picks its own dt
        solver::StateField setpoint;
        setpoint.rho.assign(plant.grid.num_cells, ref.rho_star);
        setpoint.v.assign(plant.grid.num_cells, ref.v_star);
        const auto law = solver::speed_law(cfg.diagram);
        if (solver::max_wave_speed(setpoint, law) * plant.dt * cfg.speed_headroom <=
            plant.grid.dx())
            opts.fixed_dt = plant.dt;
        const auto estimate = observer::run_observer(meas, std::nullopt, cfg.diagram, cfg.tau,
                                                     ref, plant.grid, plant.times.back(), opts);
        const auto truth = interp::resample(plant, estimate.times, estimate.grid);
        const auto errors = metrics::l2_error_series(truth, estimate, ref);
        const auto conv = metrics::convergence_time(errors, threshold);
        run_io::write_field_trajectory((out_dir / "estimate.csv").string(), estimate, cfg.units);
        run_io::write_error_series((out_dir / "errors.csv").string(), errors, conv);
        std::cout << "twin run: final e_rho=" << errors.e_rho.back()
                  << " e_v=" << errors.e_v.back() << " convergence(t<" << threshold
                  << ")=" << (conv ? std::to_string(*conv) + " s" : "none") << "\n";
        return 0;
    }

    const auto meas = run_io::read_measurements(meas_path, cfg.data_max_gap);
    const auto ref = cfg.reference();
    observer::ObserverOptions opts;
    opts.formulation = cfg.gain_formulation;
    opts.eps_speed = cfg.eps_speed;
    opts.x_varying_exponent = cfg.x_varying_exponent;
    opts.v_floor = cfg.v_floor;
    opts.cfl_safety = cfg.cfl_safety;
    opts.speed_headroom = cfg.speed_headroom;
    const double total = std::min(cfg.total_time, meas.end_time());
    const auto estimate = observer::run_observer(meas, std::nullopt, cfg.diagram, cfg.tau, ref,
                                                 cfg.grid(), total, opts);
    run_io::write_field_trajectory((out_dir / "estimate.csv").string(), estimate, cfg.units);
    std::cout << "observer run over " << total << " s from " << meas.size()
              << " measurement samples\n";
    return 0;
}

int cmd_aggregate(const CommonArgs& args, const std::string& traj_path) {
    const auto cfg = load_config(args);
    write_resolved(cfg, args.out_dir);
    const auto data = ingest::read_trajectory_csv(traj_path);
    double t_min = 1e300, t_max = -1e300;
    for (const auto& v : data.vehicles) {
        t_min = std::min(t_min, v.t.front());
        t_max = std::max(t_max, v.t.back());
    }
    const ingest::Domain domain{cfg.crop_t0.value_or(t_min), cfg.crop_t1.value_or(t_max),
                                cfg.crop_x0.value_or(0.0), cfg.crop_x1.value_or(cfg.length)};
    const auto agg =
        ingest::edie_aggregate(data, cfg.agg_time_cells, cfg.agg_space_cells, domain);
    const auto avg = ingest::dataset_averages(agg);
    run_io::write_aggregate((fs::path(args.out_dir) / "aggregate.csv").string(), agg);
    std::printf("aggregate %dx%d: rho*=%.4g veh/km  v*=%.4g km/h  q*=%.4g veh/h"
                " (direct flow mean %.4g veh/h)\n",
                agg.n_t, agg.n_x, units::density_to_veh_per_km(avg.rho_star),
                units::speed_to_km_per_h(avg.v_star), units::flow_to_veh_per_h(avg.q_star),
                units::flow_to_veh_per_h(avg.q_mean_direct));
    return 0;
}

int cmd_calibrate(const CommonArgs& args, const std::string& scatter_path,
                  const std::string& tau_data_path, double rho_m_veh_km, int lanes,
                  double vehicle_length, double safety_fraction) {
    auto cfg = load_config(args);
    write_resolved(cfg, args.out_dir);
    const fs::path out_dir(args.out_dir);

    if (!scatter_path.empty()) {
        double rho_m;
        if (rho_m_veh_km > 0.0) {
            rho_m = units::density_from_veh_per_km(rho_m_veh_km);
        } else if (lanes > 0) {
            rho_m = fd::prescribe_rho_m(lanes, vehicle_length, safety_fraction);
        } else {
            rho_m = cfg.diagram.rho_max();
        }
        const auto table = csv::read_file(scatter_path);
        const int cd = table.column("density_veh_per_km");
        const int cf = table.column("flow_veh_per_h");
        if (cd < 0 || cf < 0)
            throw DataError(scatter_path +
                            ": expected columns density_veh_per_km, flow_veh_per_h");
        std::vector<calibrate::ScatterPoint> scatter;
        for (const auto& row : table.rows)
            scatter.push_back({units::density_from_veh_per_km(row[cd]),
                               units::flow_from_veh_per_h(row[cf])});
        const auto fit = calibrate::calibrate_three_param(scatter, rho_m);
        const auto& p = std::get<fd::ThreeParamFD>(fit.diagram.params);
        const double rho_c = fd::critical_density(fit.diagram);
        std::ofstream rep(out_dir / "calibration.json");
        rep << "{\n  \"roundness\": " << csv::format_value(p.roundness)
            << ",\n  \"crit_shape\": " << csv::format_value(p.crit_shape)
            << ",\n  \"flow_scale_veh_per_h\": "
            << csv::format_value(units::flow_to_veh_per_h(p.flow_scale))
            << ",\n  \"rho_m_veh_per_km\": "
            << csv::format_value(units::density_to_veh_per_km(p.rho_m))
            << ",\n  \"residual\": " << csv::format_value(fit.residual)
            << ",\n  \"critical_density_veh_per_km\": "
            << csv::format_value(units::density_to_veh_per_km(rho_c)) << "\n}\n";
        std::printf("fit: roundness=%.6g crit_shape=%.6g flow_scale=%.6g veh/h"
                    " residual=%.4g rho_c=%.4g veh/km\n",
                    p.roundness, p.crit_shape, units::flow_to_veh_per_h(p.flow_scale),
                    fit.residual, units::density_to_veh_per_km(rho_c));
    }

    if (!tau_data_path.empty()) {
        const auto data = ingest::read_trajectory_csv(tau_data_path);
        double t_min = 1e300, t_max = -1e300;
        for (const auto& v : data.vehicles) {
            t_min = std::min(t_min, v.t.front());
            t_max = std::max(t_max, v.t.back());
        }
        const ingest::Domain domain{cfg.crop_t0.value_or(t_min), cfg.crop_t1.value_or(t_max),
                                    cfg.crop_x0.value_or(0.0), cfg.crop_x1.value_or(cfg.length)};
        const auto agg =
            ingest::edie_aggregate(data, cfg.agg_time_cells, cfg.agg_space_cells, domain);
        const auto sel = pipeline::select_tau(cfg, agg);
        csv::Table table;
        table.header = {"tau_s", "mean_error"};
        for (const auto& [tau, err] : sel.errors) table.rows.push_back({tau, err});
        csv::write_file((out_dir / "tau_selection.csv").string(), table);
        std::printf("optimal relaxation time tau=%.4g s\n", sel.best_tau);
    }
    if (scatter_path.empty() && tau_data_path.empty())
        throw ConfigError("calibrate: provide --scatter and/or --tau-data");
    return 0;
}

int cmd_validate(const CommonArgs& args, const std::string& traj_path, double threshold) {
    const auto cfg = load_config(args);
    write_resolved(cfg, args.out_dir);
    const fs::path out_dir(args.out_dir);

    if (traj_path.empty()) {
        const auto res = pipeline::run_synthetic(cfg, threshold);
        run_io::write_field_trajectory((out_dir / "plant.csv").string(), res.plant, cfg.units);
        ingest::write_trajectory_csv((out_dir / "trajectories.csv").string(), res.fleet);
        run_io::write_aggregate((out_dir / "aggregate.csv").string(), res.aggregate);
        run_io::write_field_trajectory((out_dir / "estimate.csv").string(), res.estimate,
                                       cfg.units);
        run_io::write_error_series((out_dir / "errors.csv").string(), res.errors,
                                   res.convergence_time);
        std::printf("synthetic pipeline: %zu vehicles, averages rho*=%.4g veh/km v*=%.4g km/h\n",
                    res.fleet.vehicles.size(),
                    units::density_to_veh_per_km(res.averages.rho_star),
                    units::speed_to_km_per_h(res.averages.v_star));
        std::printf("aggregation error: e_rho=%.4g e_v=%.4g\n", res.aggregation_error.first,
                    res.aggregation_error.second);
        std::printf("final errors: e_rho=%.4g e_v=%.4g, convergence(t<%.3g)=%s\n",
                    res.errors.e_rho.back(), res.errors.e_v.back(), threshold,
                    res.convergence_time ? (std::to_string(*res.convergence_time) + " s").c_str()
                                         : "none");
        return 0;
    }

    const auto data = ingest::read_trajectory_csv(traj_path);
    const auto res = pipeline::run_data(cfg, data, threshold);
    run_io::write_aggregate((out_dir / "aggregate.csv").string(), res.aggregate);
    run_io::write_field_trajectory((out_dir / "estimate.csv").string(), res.estimate, cfg.units);
    run_io::write_error_series((out_dir / "errors.csv").string(), res.errors,
                               res.convergence_time);
    std::printf("data run: averages rho*=%.4g veh/km v*=%.4g km/h q*=%.4g veh/h"
                " (direct flow mean %.4g veh/h)\n",
                units::density_to_veh_per_km(res.averages.rho_star),
                units::speed_to_km_per_h(res.averages.v_star),
                units::flow_to_veh_per_h(res.averages.q_star),
                units::flow_to_veh_per_h(res.averages.q_mean_direct));
    for (const auto& g : res.gaps.gaps)
        std::printf("  bridged gap in %s over [%.3g, %.3g] s\n", g.column.c_str(), g.t_lo,
                    g.t_hi);
    std::printf("final errors: e_rho=%.4g e_v=%.4g, convergence(t<%.3g)=%s\n",
                res.errors.e_rho.back(), res.errors.e_v.back(), threshold,
                res.convergence_time ? (std::to_string(*res.convergence_time) + " s").c_str()
                                     : "none");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ARZ traffic simulation, boundary observer, and data validation"};
    app.require_subcommand(1);

    CommonArgs sim_args, obs_args, agg_args, cal_args, gain_args, val_args;
    std::string obs_plant, obs_meas, agg_traj, cal_scatter, cal_tau_data, val_traj;
    double obs_threshold = 0.01, val_threshold = 0.04;
    double cal_rho_m = 0.0, cal_veh_len = 5.0, cal_safety = 0.5;
    int cal_lanes = 0;

    auto* sim = app.add_subcommand("simulate", "run the nonlinear plant");
    add_common(sim, sim_args);

    auto* obs = app.add_subcommand("observe", "run the boundary observer");
    add_common(obs, obs_args);
    obs->add_option("--plant", obs_plant, "plant trajectory CSV (twin mode)");
    obs->add_option("--measurements", obs_meas, "boundary measurement CSV");
    obs->add_option("--threshold", obs_threshold, "convergence detection threshold");

    auto* agg = app.add_subcommand("aggregate", "Edie-aggregate a trajectory file");
    add_common(agg, agg_args);
    agg->add_option("--trajectories", agg_traj, "vehicle trajectory CSV")->required();

    auto* cal = app.add_subcommand("calibrate", "fit the diagram and/or select tau");
    add_common(cal, cal_args);
    cal->add_option("--scatter", cal_scatter, "density-flow scatter CSV");
    cal->add_option("--tau-data", cal_tau_data, "trajectory CSV for tau selection");
    cal->add_option("--rho-m-veh-per-km", cal_rho_m, "fix rho_m directly");
    cal->add_option("--lanes", cal_lanes, "prescribe rho_m: lane count");
    cal->add_option("--vehicle-length", cal_veh_len, "prescribe rho_m: vehicle length [m]");
    cal->add_option("--safety-fraction", cal_safety, "prescribe rho_m: headway fraction");

    auto* gns = app.add_subcommand("gains", "dump the output-injection gain profile");
    add_common(gns, gain_args);

    auto* val = app.add_subcommand("validate", "end-to-end pipeline (synthetic or data)");
    add_common(val, val_args);
    val->add_option("--trajectories", val_traj, "vehicle trajectory CSV (data mode)");
    val->add_option("--threshold", val_threshold, "convergence detection threshold");

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (obs->parsed()) {
            if (obs_plant.empty() && obs_meas.empty())
                throw ConfigError("observe: provide --plant (twin) or --measurements");
            return cmd_observe(obs_args, obs_plant, obs_meas, obs_threshold);
        }
        if (agg->parsed()) return cmd_aggregate(agg_args, agg_traj);
        if (cal->parsed())
            return cmd_calibrate(cal_args, cal_scatter, cal_tau_data, cal_rho_m, cal_lanes,
                                 cal_veh_len, cal_safety);
        if (gns->parsed()) return cmd_gains(gain_args);
        if (val->parsed()) return cmd_validate(val_args, val_traj, val_threshold);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const RegimeError& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return 2;
    } catch (const BlowupError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const CalibrationError& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 4;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
