#include "arz/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "arz/csv.hpp"
#include "arz/errors.hpp"

namespace arz::ingest {

TrajectoryDataset read_trajectory_csv(const std::string& path) {
    const auto table = csv::read_file(path);
    const int ci = table.column("vehicle_id");
    const int ct = table.column("time_s");
    const int cx = table.column("position_m");
    if (ci < 0 || ct < 0 || cx < 0)
        throw DataError(path + ": expected columns vehicle_id, time_s, position_m");
    std::map<std::int64_t, VehicleTrace> traces;
    for (const auto& row : table.rows) {
        const auto id = static_cast<std::int64_t>(row[ci]);
        auto& tr = traces[id];
        tr.id = id;
        tr.t.push_back(row[ct]);
        tr.x.push_back(row[cx]);
    }
    TrajectoryDataset data;
    for (auto& [id, tr] : traces) {
        // sort by time, keeping (t, x) pairs together
        std::vector<std::size_t> idx(tr.t.size());
        for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return tr.t[a] < tr.t[b]; });
        VehicleTrace sorted;
        sorted.id = id;
        for (auto k : idx) {
            sorted.t.push_back(tr.t[k]);
            sorted.x.push_back(tr.x[k]);
        }
        data.vehicles.push_back(std::move(sorted));
    }
    if (data.vehicles.empty()) throw DataError(path + ": no trajectory records");
    // infer resolution from the median first gap
    std::vector<double> gaps;
    for (const auto& v : data.vehicles)
        if (v.t.size() > 1) gaps.push_back(v.t[1] - v.t[0]);
    if (!gaps.empty()) {
        std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
        data.resolution = gaps[gaps.size() / 2];
    }
    return data;
}

void write_trajectory_csv(const std::string& path, const TrajectoryDataset& data) {
    csv::Table table;
    table.header = {"vehicle_id", "time_s", "position_m"};
    for (const auto& v : data.vehicles)
        for (std::size_t k = 0; k < v.t.size(); ++k)
            table.rows.push_back({static_cast<double>(v.id), v.t[k], v.x[k]});
    csv::write_file(path, table);
}

AggregatedGrid edie_aggregate(const TrajectoryDataset& data, int n_time_cells, int n_space_cells,
                              const Domain& domain) {
    if (data.vehicles.empty()) throw DataError("edie_aggregate: empty dataset");
    if (n_time_cells <= 0 || n_space_cells <= 0)
        throw ConfigError("edie_aggregate: grid must have positive cell counts");
    if (!(domain.t1 > domain.t0) || !(domain.x1 > domain.x0))
        throw ConfigError("edie_aggregate: degenerate domain");

    AggregatedGrid g;
    g.domain = domain;
    g.n_t = n_time_cells;
    g.n_x = n_space_cells;
    const std::size_t n_cells = static_cast<std::size_t>(n_time_cells) * n_space_cells;
    std::vector<double> time_sum(n_cells, 0.0), dist_sum(n_cells, 0.0);
    g.count.assign(n_cells, 0);
    const double cdt = g.dt(), cdx = g.dx();

    std::vector<double> breaks;
    std::set<std::size_t> visited;
    for (const auto& veh : data.vehicles) {
        visited.clear();
        for (std::size_t k = 0; k + 1 < veh.t.size(); ++k) {
            const double ta = veh.t[k], tb = veh.t[k + 1];
            const double xa = veh.x[k], xb = veh.x[k + 1];
            if (!(tb > ta)) continue;
            if (tb <= domain.t0 || ta >= domain.t1) continue;

            // segment parameter breakpoints at every crossed cell edge
            breaks.clear();
            breaks.push_back(0.0);
            breaks.push_back(1.0);
            const double dt_seg = tb - ta, dx_seg = xb - xa;
            const long i_lo = static_cast<long>(std::ceil((std::min(ta, tb) - domain.t0) / cdt));
            const long i_hi = static_cast<long>(std::floor((std::max(ta, tb) - domain.t0) / cdt));
            for (long i = std::max(i_lo, 0L); i <= std::min(i_hi, (long)g.n_t); ++i) {
                const double edge = domain.t0 + i * cdt;
                const double s = (edge - ta) / dt_seg;
                if (s > 0.0 && s < 1.0) breaks.push_back(s);
            }
            if (dx_seg != 0.0) {
                const long j_lo =
                    static_cast<long>(std::ceil((std::min(xa, xb) - domain.x0) / cdx));
                const long j_hi =
                    static_cast<long>(std::floor((std::max(xa, xb) - domain.x0) / cdx));
                for (long j = std::max(j_lo, 0L); j <= std::min(j_hi, (long)g.n_x); ++j) {
                    const double edge = domain.x0 + j * cdx;
                    const double s = (edge - xa) / dx_seg;
                    if (s > 0.0 && s < 1.0) breaks.push_back(s);
                }
            }
            std::sort(breaks.begin(), breaks.end());

            for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
                const double s0 = breaks[b], s1 = breaks[b + 1];
                if (s1 <= s0) continue;
                const double sm = 0.5 * (s0 + s1);
                const double tm = ta + sm * dt_seg, xm = xa + sm * dx_seg;
                const long i = static_cast<long>(std::floor((tm - domain.t0) / cdt));
                const long j = static_cast<long>(std::floor((xm - domain.x0) / cdx));
                if (i < 0 || i >= g.n_t || j < 0 || j >= g.n_x) continue;
                const std::size_t cell = g.at(static_cast<int>(i), static_cast<int>(j));
                time_sum[cell] += (s1 - s0) * dt_seg;
                dist_sum[cell] += (s1 - s0) * dx_seg;
                if (visited.insert(cell).second) ++g.count[cell];
            }
        }
    }

    g.rho.resize(n_cells);
    g.q.resize(n_cells);
    g.v.resize(n_cells);
    const double area = cdt * cdx;
    for (std::size_t c = 0; c < n_cells; ++c) {
        g.rho[c] = time_sum[c] / area;
        g.q[c] = dist_sum[c] / area;
        g.v[c] = g.rho[c] > 0.0 ? g.q[c] / g.rho[c] : std::numeric_limits<double>::quiet_NaN();
    }
    return g;
}

DatasetAverages dataset_averages(const AggregatedGrid& agg) {
    double rho_sum = 0.0, v_sum = 0.0, q_sum = 0.0;
    long n = 0;
    for (std::size_t c = 0; c < agg.rho.size(); ++c) {
        if (agg.count[c] == 0) continue;
        rho_sum += agg.rho[c];
        v_sum += agg.v[c];
        q_sum += agg.q[c];
        ++n;
    }
    if (n == 0) throw DataError("dataset_averages: all cells empty");
    DatasetAverages a;
    a.rho_star = rho_sum / n;
    a.v_star = v_sum / n;
    a.q_star = a.rho_star * a.v_star;
    a.q_mean_direct = q_sum / n;
    return a;
}

namespace {

// fills NaN/empty entries by linear interpolation over row time centers
void bridge_gaps(std::vector<double>& values, const std::vector<bool>& present,
                 const std::vector<double>& times, double max_gap, const std::string& name,
                 GapReport* report) {
    const std::size_t n = values.size();
    std::size_t first = 0;
    while (first < n && !present[first]) ++first;
    if (first == n) throw DataError("boundary_series: column " + name + " entirely empty");
    std::size_t last = n - 1;
    while (!present[last]) --last;
    if (first > 0 || last < n - 1)
        throw DataError("boundary_series: column " + name + " empty at the series edge");

    std::size_t i = first;
    while (i <= last) {
        if (present[i]) {
            ++i;
            continue;
        }
        std::size_t lo = i - 1;
        std::size_t hi = i;
        while (!present[hi]) ++hi;
        const double span = times[hi] - times[lo];
        if (span > max_gap)
            throw DataError("boundary_series: gap of " + std::to_string(span) + " s in " + name +
                            " over [" + std::to_string(times[lo]) + ", " +
                            std::to_string(times[hi]) + "] exceeds max gap");
        for (std::size_t k = lo + 1; k < hi; ++k) {
            const double w = (times[k] - times[lo]) / span;
            values[k] = (1.0 - w) * values[lo] + w * values[hi];
        }
        if (report) report->gaps.push_back({times[lo], times[hi], name});
        i = hi;
    }
}

}  // namespace

observer::BoundaryMeasurements boundary_series(const AggregatedGrid& agg, double max_gap,
                                               GapReport* report) {
    std::vector<double> times(agg.n_t), q_in(agg.n_t), q_out(agg.n_t), v_out(agg.n_t);
    std::vector<bool> in_ok(agg.n_t), out_ok(agg.n_t);
    for (int i = 0; i < agg.n_t; ++i) {
        times[i] = agg.t_center(i);
        const auto c_in = agg.at(i, 0);
        const auto c_out = agg.at(i, agg.n_x - 1);
        in_ok[i] = agg.count[c_in] > 0;
        out_ok[i] = agg.count[c_out] > 0;
        q_in[i] = agg.q[c_in];
        q_out[i] = agg.q[c_out];
        v_out[i] = agg.v[c_out];
    }
    bridge_gaps(q_in, in_ok, times, max_gap, "q_in", report);
    bridge_gaps(q_out, out_ok, times, max_gap, "q_out", report);
    bridge_gaps(v_out, out_ok, times, max_gap, "v_out", report);
    return observer::BoundaryMeasurements(std::move(times), std::move(q_in), std::move(q_out),
                                          std::move(v_out), max_gap);
}

}  // namespace arz::ingest
