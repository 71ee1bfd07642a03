#include "arz/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "arz/errors.hpp"
#include "arz/units.hpp"

namespace arz::config {

using nlohmann::json;

lin::ReferenceState RunConfig::reference() const {
    if (v_star) return lin::make_reference(diagram, rho_star, *v_star);
    return lin::make_reference(diagram, rho_star);
}

solver::Grid RunConfig::grid() const { return solver::Grid{length, num_cells}; }

solver::BoundarySpec RunConfig::boundary_spec() const {
    const auto ref = reference();
    solver::BoundarySpec bc;
    const double q_in = inlet_flux.value_or(ref.q_star);
    bc.inlet_flux = [q_in](double) { return q_in; };
    if (outlet_kind == "coupled_density") {
        bc.outlet_kind = solver::OutletKind::CoupledDensity;
        const double rho_out = outlet_value.value_or(ref.rho_star);
        bc.outlet_value = [rho_out](double) { return rho_out; };
    } else if (outlet_kind == "fixed_velocity") {
        bc.outlet_kind = solver::OutletKind::FixedVelocity;
        const double v_out = outlet_value.value_or(ref.v_star);
        bc.outlet_value = [v_out](double) { return v_out; };
    } else if (outlet_kind == "fixed_density") {
        bc.outlet_kind = solver::OutletKind::FixedDensity;
        const double rho_out = outlet_value.value_or(ref.rho_star);
        bc.outlet_value = [rho_out](double) { return rho_out; };
    } else {
        throw ConfigError("bc.outlet.kind: unknown kind '" + outlet_kind + "'");
    }
    return bc;
}

solver::StateField RunConfig::initial_condition() const {
    const auto ref = reference();
    if (ic_kind == "setpoint") return solver::sinusoidal_ic(grid(), ref.rho_star, ref.v_star, 0.0);
    if (ic_kind == "sinusoidal")
        return solver::sinusoidal_ic(grid(), ref.rho_star, ref.v_star, ic_amplitude, ic_mode);
    throw ConfigError("ic.kind: unknown kind '" + ic_kind + "'");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

double get_num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double positive(const json& j, const std::string& path) {
    const double v = get_num(j, path);
    if (!(v > 0.0)) fail(path, "must be > 0");
    return v;
}

fd::FundamentalDiagram parse_diagram(const json& j) {
    if (!j.is_object()) fail("model.diagram", "expected an object");
    const std::string family = j.value("family", "");
    try {
        if (family == "greenshield") {
            return fd::greenshield(positive(j.at("v_f_m_per_s"), "model.diagram.v_f_m_per_s"),
                                   units::density_from_veh_per_km(positive(
                                       j.at("rho_m_veh_per_km"), "model.diagram.rho_m_veh_per_km")),
                                   positive(j.value("gamma", json(1.0)), "model.diagram.gamma"));
        }
        if (family == "three_param") {
            return fd::three_param(
                positive(j.at("roundness"), "model.diagram.roundness"),
                positive(j.at("crit_shape"), "model.diagram.crit_shape"),
                units::flow_from_veh_per_h(
                    positive(j.at("flow_scale_veh_per_h"), "model.diagram.flow_scale_veh_per_h")),
                units::density_from_veh_per_km(
                    positive(j.at("rho_m_veh_per_km"), "model.diagram.rho_m_veh_per_km")));
        }
    } catch (const json::out_of_range& e) {
        fail("model.diagram", std::string("missing field: ") + e.what());
    }
    fail("model.diagram.family", "expected 'greenshield' or 'three_param'");
}

}  // namespace

RunConfig from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    RunConfig cfg;
    const std::string schema = j.value("schema", cfg.schema);
    if (schema != cfg.schema)
        fail("schema", "unsupported schema '" + schema + "', expected '" + cfg.schema + "'");
    cfg.units = j.value("units", cfg.units);
    if (cfg.units != "traffic" && cfg.units != "si") fail("units", "expected 'traffic' or 'si'");
    cfg.seed = j.value("seed", cfg.seed);

    if (j.contains("model")) {
        const auto& m = j["model"];
        if (m.contains("diagram")) cfg.diagram = parse_diagram(m["diagram"]);
        if (m.contains("tau_s")) cfg.tau = positive(m["tau_s"], "model.tau_s");
        if (m.contains("length_m")) cfg.length = positive(m["length_m"], "model.length_m");
    }
    if (j.contains("reference")) {
        const auto& r = j["reference"];
        if (r.contains("rho_star_veh_per_km"))
            cfg.rho_star = units::density_from_veh_per_km(
                positive(r["rho_star_veh_per_km"], "reference.rho_star_veh_per_km"));
        if (r.contains("v_star_m_per_s"))
            cfg.v_star = positive(r["v_star_m_per_s"], "reference.v_star_m_per_s");
        if (r.contains("eps_speed_m_per_s"))
            cfg.eps_speed = positive(r["eps_speed_m_per_s"], "reference.eps_speed_m_per_s");
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (g.contains("num_cells")) {
            cfg.num_cells = g["num_cells"].get<int>();
            if (cfg.num_cells < 2) fail("grid.num_cells", "must be >= 2");
        }
        if (g.contains("total_time_s"))
            cfg.total_time = positive(g["total_time_s"], "grid.total_time_s");
        if (g.contains("output_every")) {
            cfg.output_every = g["output_every"].get<int>();
            if (cfg.output_every < 1) fail("grid.output_every", "must be >= 1");
        }
        if (g.contains("cfl_safety")) {
            cfg.cfl_safety = positive(g["cfl_safety"], "grid.cfl_safety");
            if (cfg.cfl_safety > 1.0) fail("grid.cfl_safety", "must be <= 1");
        }
        if (g.contains("fixed_dt_s")) cfg.fixed_dt = positive(g["fixed_dt_s"], "grid.fixed_dt_s");
    }
    if (j.contains("ic")) {
        const auto& ic = j["ic"];
        cfg.ic_kind = ic.value("kind", cfg.ic_kind);
        if (ic.contains("amplitude")) {
            cfg.ic_amplitude = get_num(ic["amplitude"], "ic.amplitude");
            if (cfg.ic_amplitude < 0.0 || cfg.ic_amplitude >= 1.0)
                fail("ic.amplitude", "must be in [0, 1)");
        }
        if (ic.contains("mode")) cfg.ic_mode = ic["mode"].get<int>();
    }
    if (j.contains("bc")) {
        const auto& bc = j["bc"];
        if (bc.contains("inlet_flux_veh_per_h"))
            cfg.inlet_flux = units::flow_from_veh_per_h(
                positive(bc["inlet_flux_veh_per_h"], "bc.inlet_flux_veh_per_h"));
        if (bc.contains("outlet")) {
            const auto& out = bc["outlet"];
            cfg.outlet_kind = out.value("kind", cfg.outlet_kind);
            if (out.contains("rho_veh_per_km"))
                cfg.outlet_value = units::density_from_veh_per_km(
                    positive(out["rho_veh_per_km"], "bc.outlet.rho_veh_per_km"));
            if (out.contains("v_m_per_s"))
                cfg.outlet_value = positive(out["v_m_per_s"], "bc.outlet.v_m_per_s");
        }
    }
    if (j.contains("observer")) {
        const auto& o = j["observer"];
        cfg.observer_init = o.value("init", cfg.observer_init);
        if (cfg.observer_init != "setpoint")
            fail("observer.init", "only 'setpoint' is supported here; provided-field "
                                  "initialization is a library-level option");
        if (o.contains("gain_formulation")) {
            const std::string f = o["gain_formulation"].get<std::string>();
            if (f == "exact")
                cfg.gain_formulation = lin::GainFormulation::Exact;
            else if (f == "simplified")
                cfg.gain_formulation = lin::GainFormulation::Simplified;
            else
                fail("observer.gain_formulation", "expected 'exact' or 'simplified'");
        }
        cfg.x_varying_exponent = o.value("x_varying_exponent", cfg.x_varying_exponent);
        if (o.contains("speed_headroom")) {
            cfg.speed_headroom = positive(o["speed_headroom"], "observer.speed_headroom");
            if (cfg.speed_headroom < 1.0) fail("observer.speed_headroom", "must be >= 1");
        }
        if (o.contains("max_gap_s"))
            cfg.observer_max_gap = positive(o["max_gap_s"], "observer.max_gap_s");
        if (o.contains("data_max_gap_s"))
            cfg.data_max_gap = positive(o["data_max_gap_s"], "observer.data_max_gap_s");
        if (o.contains("v_floor_m_per_s"))
            cfg.v_floor = positive(o["v_floor_m_per_s"], "observer.v_floor_m_per_s");
        cfg.twin_setpoint_inlet = o.value("twin_setpoint_inlet", cfg.twin_setpoint_inlet);
    }
    if (j.contains("aggregate")) {
        const auto& a = j["aggregate"];
        if (a.contains("n_time_cells")) cfg.agg_time_cells = a["n_time_cells"].get<int>();
        if (a.contains("n_space_cells")) cfg.agg_space_cells = a["n_space_cells"].get<int>();
        if (a.contains("boundary_time_cells"))
            cfg.agg_boundary_time_cells = a["boundary_time_cells"].get<int>();
        if (cfg.agg_time_cells < 1 || cfg.agg_space_cells < 2 || cfg.agg_boundary_time_cells < 1)
            fail("aggregate", "cell counts out of range");
        if (a.contains("crop")) {
            const auto& c = a["crop"];
            if (c.contains("t0_s")) cfg.crop_t0 = get_num(c["t0_s"], "aggregate.crop.t0_s");
            if (c.contains("t1_s")) cfg.crop_t1 = get_num(c["t1_s"], "aggregate.crop.t1_s");
            if (c.contains("x0_m")) cfg.crop_x0 = get_num(c["x0_m"], "aggregate.crop.x0_m");
            if (c.contains("x1_m")) cfg.crop_x1 = get_num(c["x1_m"], "aggregate.crop.x1_m");
        }
    }
    if (j.contains("calibrate")) {
        const auto& c = j["calibrate"];
        if (c.contains("tau_grid_s")) {
            cfg.tau_grid.clear();
            for (const auto& v : c["tau_grid_s"])
                cfg.tau_grid.push_back(positive(v, "calibrate.tau_grid_s"));
            if (cfg.tau_grid.empty()) fail("calibrate.tau_grid_s", "must be non-empty");
        }
    }

    // cross-field checks
    if (!(cfg.rho_star < cfg.diagram.rho_max()))
        fail("reference.rho_star_veh_per_km", "must be below the diagram's rho_m");
    return cfg;
}

RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string resolved_json(const RunConfig& cfg) {
    json j;
    j["schema"] = cfg.schema;
    j["units"] = cfg.units;
    j["seed"] = cfg.seed;
    json d;
    if (cfg.diagram.family() == fd::Family::Greenshield) {
        const auto& g = std::get<fd::GreenshieldParams>(cfg.diagram.params);
        d = {{"family", "greenshield"},
             {"v_f_m_per_s", g.v_f},
             {"rho_m_veh_per_km", units::density_to_veh_per_km(g.rho_m)},
             {"gamma", g.gamma}};
    } else {
        const auto& p = std::get<fd::ThreeParamFD>(cfg.diagram.params);
        d = {{"family", "three_param"},
             {"roundness", p.roundness},
             {"crit_shape", p.crit_shape},
             {"flow_scale_veh_per_h", units::flow_to_veh_per_h(p.flow_scale)},
             {"rho_m_veh_per_km", units::density_to_veh_per_km(p.rho_m)}};
    }
    j["model"] = {{"diagram", d}, {"tau_s", cfg.tau}, {"length_m", cfg.length}};
    j["reference"] = {{"rho_star_veh_per_km", units::density_to_veh_per_km(cfg.rho_star)},
                      {"eps_speed_m_per_s", cfg.eps_speed}};
    if (cfg.v_star) j["reference"]["v_star_m_per_s"] = *cfg.v_star;
    j["grid"] = {{"num_cells", cfg.num_cells},
                 {"total_time_s", cfg.total_time},
                 {"output_every", cfg.output_every},
                 {"cfl_safety", cfg.cfl_safety}};
    if (cfg.fixed_dt) j["grid"]["fixed_dt_s"] = *cfg.fixed_dt;
    j["ic"] = {{"kind", cfg.ic_kind}, {"amplitude", cfg.ic_amplitude}, {"mode", cfg.ic_mode}};
    json outlet = {{"kind", cfg.outlet_kind}};
    if (cfg.outlet_value) {
        if (cfg.outlet_kind == "fixed_velocity")
            outlet["v_m_per_s"] = *cfg.outlet_value;
        else
            outlet["rho_veh_per_km"] = units::density_to_veh_per_km(*cfg.outlet_value);
    }
    j["bc"] = json::object();
    if (cfg.inlet_flux) j["bc"]["inlet_flux_veh_per_h"] = units::flow_to_veh_per_h(*cfg.inlet_flux);
    j["bc"]["outlet"] = outlet;
    j["observer"] = {
        {"init", cfg.observer_init},
        {"gain_formulation",
         cfg.gain_formulation == lin::GainFormulation::Exact ? "exact" : "simplified"},
        {"x_varying_exponent", cfg.x_varying_exponent},
        {"speed_headroom", cfg.speed_headroom},
        {"max_gap_s", cfg.observer_max_gap},
        {"data_max_gap_s", cfg.data_max_gap},
        {"v_floor_m_per_s", cfg.v_floor},
        {"twin_setpoint_inlet", cfg.twin_setpoint_inlet}};
    j["aggregate"] = {{"n_time_cells", cfg.agg_time_cells},
                      {"n_space_cells", cfg.agg_space_cells},
                      {"boundary_time_cells", cfg.agg_boundary_time_cells}};
    if (cfg.crop_t0 || cfg.crop_t1 || cfg.crop_x0 || cfg.crop_x1) {
        json c = json::object();
        if (cfg.crop_t0) c["t0_s"] = *cfg.crop_t0;
        if (cfg.crop_t1) c["t1_s"] = *cfg.crop_t1;
        if (cfg.crop_x0) c["x0_m"] = *cfg.crop_x0;
        if (cfg.crop_x1) c["x1_m"] = *cfg.crop_x1;
        j["aggregate"]["crop"] = c;
    }
    j["calibrate"] = {{"tau_grid_s", cfg.tau_grid}};
    return j.dump(2) + "\n";
}

}  // namespace arz::config
