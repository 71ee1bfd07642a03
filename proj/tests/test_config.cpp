#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "arz/config.hpp"
#include "arz/errors.hpp"
#include "arz/run_io.hpp"
#include "arz/units.hpp"

using namespace arz;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("defaults reproduce the reference parameter set") {
    const config::RunConfig cfg;
    const auto ref = cfg.reference();
    CHECK(ref.rho_star == doctest::Approx(0.120).epsilon(1e-14));
    CHECK(ref.v_star == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(ref.lambda2 == doctest::Approx(-20.0).epsilon(1e-14));
    CHECK(cfg.tau == 60.0);
    CHECK(cfg.length == 400.0);
}

TEST_CASE("json parsing, overrides, and field-path errors") {
    const char* text = R"({
      "schema": "arz-run-config/1",
      "model": {
        "diagram": {"family": "greenshield", "v_f_m_per_s": 40.0,
                    "rho_m_veh_per_km": 160.0, "gamma": 1.0},
        "tau_s": 30.0, "length_m": 500.0
      },
      "reference": {"rho_star_veh_per_km": 100.0},
      "grid": {"num_cells": 50, "total_time_s": 60.0},
      "observer": {"gain_formulation": "simplified"}
    })";
    const auto cfg = config::from_json_text(text);
    CHECK(cfg.tau == 30.0);
    CHECK(cfg.length == 500.0);
    CHECK(cfg.rho_star == doctest::Approx(0.100).epsilon(1e-14));
    CHECK(cfg.num_cells == 50);
    CHECK(cfg.gain_formulation == lin::GainFormulation::Simplified);

    CHECK_THROWS_AS(config::from_json_text("{not json"), ConfigError);
    CHECK_THROWS_AS(config::from_json_text(R"({"schema": "other/9"})"), ConfigError);

    try {
        config::from_json_text(R"({"model": {"tau_s": -3}})");
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("model.tau_s") != std::string::npos);
    }
    try {
        config::from_json_text(R"({"reference": {"rho_star_veh_per_km": 200.0}})");
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("rho_star") != std::string::npos);
    }
}

TEST_CASE("resolved config reparses to the same values") {
    config::RunConfig cfg;
    cfg.tau = 45.0;
    cfg.num_cells = 123;
    cfg.gain_formulation = lin::GainFormulation::Simplified;
    cfg.inlet_flux = 1.0;
    const auto again = config::from_json_text(config::resolved_json(cfg));
    CHECK(again.tau == cfg.tau);
    CHECK(again.num_cells == cfg.num_cells);
    CHECK(again.gain_formulation == cfg.gain_formulation);
    CHECK(*again.inlet_flux == doctest::Approx(*cfg.inlet_flux).epsilon(1e-14));
}

TEST_CASE("unit conversions round-trip to within one ulp") {
    for (double v : {1.0, 3.6, 10.0, 27.7777, 120.0, 160.0, 7548.0, 0.004}) {
        const double d = units::density_to_veh_per_km(units::density_from_veh_per_km(v));
        const double s = units::speed_to_km_per_h(units::speed_from_km_per_h(v));
        const double f = units::flow_to_veh_per_h(units::flow_from_veh_per_h(v));
        CHECK(std::abs(d - v) <= std::abs(v) * 1e-15);
        CHECK(std::abs(s - v) <= std::abs(v) * 4e-16);
        CHECK(std::abs(f - v) <= std::abs(v) * 4e-16);
    }
}

TEST_CASE("identical configs produce byte-identical outputs") {
    config::RunConfig cfg;
    cfg.num_cells = 41;
    cfg.total_time = 30.0;
    const auto dir = std::filesystem::temp_directory_path();
    const auto p1 = (dir / "arz_det_1.csv").string();
    const auto p2 = (dir / "arz_det_2.csv").string();
    for (const auto& p : {p1, p2}) {
        solver::SimulateOptions opts;
        opts.total_time = cfg.total_time;
        const auto traj = solver::simulate_plant(cfg.initial_condition(), cfg.boundary_spec(),
                                                 cfg.diagram, cfg.tau, cfg.grid(), opts);
        run_io::write_field_trajectory(p, traj, cfg.units);
    }
    CHECK(slurp(p1) == slurp(p2));
    CHECK(!slurp(p1).empty());
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("field trajectory round trip") {
    config::RunConfig cfg;
    cfg.num_cells = 21;
    cfg.total_time = 10.0;
    solver::SimulateOptions opts;
    opts.total_time = cfg.total_time;
    const auto traj = solver::simulate_plant(cfg.initial_condition(), cfg.boundary_spec(),
                                             cfg.diagram, cfg.tau, cfg.grid(), opts);
    const auto path = (std::filesystem::temp_directory_path() / "arz_traj_rt.csv").string();
    run_io::write_field_trajectory(path, traj, "traffic");
    const auto back = run_io::read_field_trajectory(path);
    CHECK(back.grid.num_cells == traj.grid.num_cells);
    CHECK(back.grid.length == doctest::Approx(traj.grid.length).epsilon(1e-9));
    REQUIRE(back.times.size() == traj.times.size());
    for (std::size_t k = 0; k < back.times.size(); ++k) {
        for (int j = 0; j < traj.grid.num_cells; ++j) {
            CHECK(back.fields[k].rho[j] ==
                  doctest::Approx(traj.fields[k].rho[j]).epsilon(1e-9));
            CHECK(back.fields[k].v[j] == doctest::Approx(traj.fields[k].v[j]).epsilon(1e-9));
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("measurement csv honors unit-carrying headers") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = (dir / "arz_meas_units.csv").string();
    {
        std::ofstream out(path);
        out << "t_s,q_in_veh_per_h,q_out_veh_per_h,v_out_km_per_h\n";
        out << "0,4320,4320,36\n10,4320,4320,36\n";
    }
    const auto meas = run_io::read_measurements(path, 60.0);
    CHECK(meas.q_in_at(5.0) == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(meas.v_out_at(5.0) == doctest::Approx(10.0).epsilon(1e-12));
    std::remove(path.c_str());
}
