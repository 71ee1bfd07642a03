#include "arz/run_io.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "arz/csv.hpp"
#include "arz/errors.hpp"
#include "arz/units.hpp"

namespace arz::run_io {

void write_field_trajectory(const std::string& path, const solver::Trajectory& traj,
                            const std::string& units_mode) {
    const bool traffic = units_mode != "si";
    csv::Table table;
    table.header = traffic
                       ? std::vector<std::string>{"t_s", "x_m", "rho_veh_per_km", "v_km_per_h"}
                       : std::vector<std::string>{"t_s", "x_m", "rho_veh_per_m", "v_m_per_s"};
    const auto x = traj.grid.cell_centers();
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto& f = traj.fields[k];
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double rho = traffic ? units::density_to_veh_per_km(f.rho[j]) : f.rho[j];
            const double v = traffic ? units::speed_to_km_per_h(f.v[j]) : f.v[j];
            table.rows.push_back({traj.times[k], x[j], rho, v});
        }
    }
    csv::write_file(path, table);
}

solver::Trajectory read_field_trajectory(const std::string& path) {
    const auto table = csv::read_file(path);
    const int ct = table.column("t_s");
    const int cx = table.column("x_m");
    int cr = table.column("rho_veh_per_km");
    int cv = table.column("v_km_per_h");
    bool traffic = true;
    if (cr < 0) {
        cr = table.column("rho_veh_per_m");
        cv = table.column("v_m_per_s");
        traffic = false;
    }
    if (ct < 0 || cx < 0 || cr < 0 || cv < 0)
        throw DataError(path + ": expected field-trajectory columns (t_s, x_m, rho, v)");
    if (table.rows.empty()) throw DataError(path + ": no rows");

    // infer the grid from the first block of equal-time rows
    std::vector<double> centers;
    const double t0 = table.rows.front()[ct];
    for (const auto& row : table.rows) {
        if (row[ct] != t0) break;
        centers.push_back(row[cx]);
    }
    const std::size_t m = centers.size();
    if (m < 2 || table.rows.size() % m != 0)
        throw DataError(path + ": rows do not form uniform (time, cell) blocks");
    const double dx = centers[1] - centers[0];

    solver::Trajectory traj;
    traj.grid = solver::Grid{centers.back() + 0.5 * dx, static_cast<int>(m)};
    for (std::size_t k = 0; k < table.rows.size() / m; ++k) {
        solver::StateField f;
        f.rho.resize(m);
        f.v.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            const auto& row = table.rows[k * m + j];
            f.rho[j] = traffic ? units::density_from_veh_per_km(row[cr]) : row[cr];
            f.v[j] = traffic ? units::speed_from_km_per_h(row[cv]) : row[cv];
        }
        traj.times.push_back(table.rows[k * m][ct]);
        traj.fields.push_back(std::move(f));
    }
    if (traj.times.size() > 1) traj.dt = traj.times[1] - traj.times[0];
    return traj;
}

void write_gain_profile(const std::string& path, const lin::GainProfile& gains) {
    csv::Table table;
    table.header = {"x_m", "r_per_s", "s_per_s"};
    for (std::size_t i = 0; i < gains.x.size(); ++i)
        table.rows.push_back({gains.x[i], gains.r[i], gains.s[i]});
    csv::write_file(path, table);
}

void write_error_series(const std::string& path, const metrics::ErrorSeries& series,
                        std::optional<double> convergence_time_s) {
    csv::Table table;
    table.header = {"t_s", "e_rho", "e_v"};
    for (std::size_t i = 0; i < series.times.size(); ++i)
        table.rows.push_back({series.times[i], series.e_rho[i], series.e_v[i]});
    csv::write_file(path, table);
    std::ofstream out(path, std::ios::app);
    out << "# convergence_time_s="
        << (convergence_time_s ? csv::format_value(*convergence_time_s) : std::string("none"))
        << " final_e_rho=" << csv::format_value(series.e_rho.back())
        << " final_e_v=" << csv::format_value(series.e_v.back()) << "\n";
}

void write_aggregate(const std::string& path, const ingest::AggregatedGrid& agg) {
    csv::Table table;
    table.header = {"t_index",        "x_index",        "t_center_s", "x_center_m",
                    "rho_veh_per_km", "flow_veh_per_h", "v_km_per_h", "n_traces"};
    for (int i = 0; i < agg.n_t; ++i) {
        for (int j = 0; j < agg.n_x; ++j) {
            const auto c = agg.at(i, j);
            table.rows.push_back({static_cast<double>(i), static_cast<double>(j), agg.t_center(i),
                                  agg.x_center(j), units::density_to_veh_per_km(agg.rho[c]),
                                  units::flow_to_veh_per_h(agg.q[c]),
                                  units::speed_to_km_per_h(agg.v[c]),
                                  static_cast<double>(agg.count[c])});
        }
    }
    csv::write_file(path, table);
}

observer::BoundaryMeasurements read_measurements(const std::string& path, double max_gap) {
    const auto table = csv::read_file(path);
    const int ct = table.column("t_s");
    if (ct < 0) throw DataError(path + ": missing t_s column");
    struct Col {
        int idx;
        double scale;
    };
    auto find = [&](const std::string& si_name, const std::string& traffic_name,
                    double traffic_scale) -> Col {
        int c = table.column(si_name);
        if (c >= 0) return {c, 1.0};
        c = table.column(traffic_name);
        if (c >= 0) return {c, traffic_scale};
        throw DataError(path + ": missing column " + si_name + " or " + traffic_name);
    };
    const Col cqi = find("q_in_veh_per_s", "q_in_veh_per_h", 1.0 / 3600.0);
    const Col cqo = find("q_out_veh_per_s", "q_out_veh_per_h", 1.0 / 3600.0);
    const Col cvo = find("v_out_m_per_s", "v_out_km_per_h", 1.0 / 3.6);
    std::vector<double> t, qi, qo, vo;
    for (const auto& row : table.rows) {
        t.push_back(row[ct]);
        qi.push_back(row[cqi.idx] * cqi.scale);
        qo.push_back(row[cqo.idx] * cqo.scale);
        vo.push_back(row[cvo.idx] * cvo.scale);
    }
    return observer::BoundaryMeasurements(std::move(t), std::move(qi), std::move(qo),
                                          std::move(vo), max_gap);
}

void write_measurements(const std::string& path, const observer::BoundaryMeasurements& meas,
                        const std::string& units_mode) {
    const bool traffic = units_mode != "si";
    csv::Table table;
    table.header = traffic ? std::vector<std::string>{"t_s", "q_in_veh_per_h", "q_out_veh_per_h",
                                                      "v_out_km_per_h"}
                           : std::vector<std::string>{"t_s", "q_in_veh_per_s", "q_out_veh_per_s",
                                                      "v_out_m_per_s"};
    for (std::size_t i = 0; i < meas.size(); ++i) {
        double qi = meas.q_in()[i], qo = meas.q_out()[i], vo = meas.v_out()[i];
        if (traffic) {
            qi = units::flow_to_veh_per_h(qi);
            qo = units::flow_to_veh_per_h(qo);
            vo = units::speed_to_km_per_h(vo);
        }
        table.rows.push_back({meas.times()[i], qi, qo, vo});
    }
    csv::write_file(path, table);
}

}  // namespace arz::run_io
