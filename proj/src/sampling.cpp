#include "arz/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "arz/errors.hpp"
#include "arz/interp.hpp"

namespace arz::sampling {

ingest::TrajectoryDataset sample_fleet(const solver::Trajectory& plant,
                                       const FleetOptions& options) {
    if (plant.times.size() < 2) throw DataError("sample_fleet: trajectory too short");
    if (!(options.inlet_flux > 0.0)) throw ConfigError("sample_fleet: inlet flux must be > 0");
    const double length = plant.grid.length;
    const double t_end = plant.times.back();
    const double res = options.resolution;
    const interp::FieldInterpolator field(plant);

    // release schedule: vehicles in the domain at t=0 plus inlet arrivals
    std::vector<std::pair<double, double>> starts;  // (t0, x0)
    {
        const auto& rho0 = plant.fields.front().rho;
        const double dx = plant.grid.dx();
        std::vector<double> cdf(rho0.size() + 1, 0.0), edge(rho0.size() + 1, 0.0);
        for (std::size_t j = 0; j < rho0.size(); ++j) {
            cdf[j + 1] = cdf[j] + rho0[j] * dx;
            edge[j + 1] = (j + 1) * dx;
        }
        const int n0 = static_cast<int>(std::floor(cdf.back()));
        for (int k = 0; k < n0; ++k) {
            const double target = k + 0.5;
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
            const std::size_t j = static_cast<std::size_t>(it - cdf.begin());
            const double w = (target - cdf[j - 1]) / (cdf[j] - cdf[j - 1]);
            starts.emplace_back(0.0, edge[j - 1] + w * (edge[j] - edge[j - 1]));
        }
        const int n_in = static_cast<int>(std::floor(options.inlet_flux * t_end));
        for (int k = 1; k <= n_in; ++k) {
            const double t0 = k / options.inlet_flux;
            if (t0 < t_end - res) starts.emplace_back(t0, 0.0);
        }
    }

    ingest::TrajectoryDataset data;
    data.resolution = res;
    std::int64_t next_id = 1;
    for (const auto& [t0, x0] : starts) {
        ingest::VehicleTrace tr;
        tr.id = next_id++;
        double t = t0, x = x0;
        tr.t.push_back(t);
        tr.x.push_back(x);
        while (t < t_end - res) {
            // midpoint rule on dx/dt = v(x, t)
            const double v1 = field.velocity(t, x);
            const double x_mid = std::min(x + 0.5 * res * v1, length);
            const double v2 = field.velocity(t + 0.5 * res, x_mid);
            const double x_new = x + res * v2;
            if (x_new >= length) {
                const double frac = (length - x) / (x_new - x);
                tr.t.push_back(t + frac * res);
                tr.x.push_back(length);
                break;
            }
            t += res;
            x = x_new;
            tr.t.push_back(t);
            tr.x.push_back(x);
        }
        if (tr.t.size() > 1) data.vehicles.push_back(std::move(tr));
    }
    return data;
}

}  // namespace arz::sampling
