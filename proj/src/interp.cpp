#include "arz/interp.hpp"

#include <algorithm>

#include "arz/errors.hpp"

namespace arz::interp {

FieldInterpolator::FieldInterpolator(const solver::Trajectory& traj)
    : traj_(traj), centers_(traj.grid.cell_centers()) {
    if (traj.times.size() < 2) throw DataError("FieldInterpolator: trajectory too short");
}

double FieldInterpolator::sample(const std::vector<double>& f, double x) const {
    if (x <= centers_.front()) return f.front();
    if (x >= centers_.back()) return f.back();
    const auto it = std::upper_bound(centers_.begin(), centers_.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - centers_.begin());
    const double w = (x - centers_[j - 1]) / (centers_[j] - centers_[j - 1]);
    return (1.0 - w) * f[j - 1] + w * f[j];
}

double FieldInterpolator::eval(bool density_field, double t, double x) const {
    const auto& times = traj_.times;
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = it == times.begin() ? 1 : static_cast<std::size_t>(it - times.begin());
    i = std::min(i, times.size() - 1);
    const double w = std::clamp((t - times[i - 1]) / (times[i] - times[i - 1]), 0.0, 1.0);
    const auto& f0 = density_field ? traj_.fields[i - 1].rho : traj_.fields[i - 1].v;
    const auto& f1 = density_field ? traj_.fields[i].rho : traj_.fields[i].v;
    return (1.0 - w) * sample(f0, x) + w * sample(f1, x);
}

double FieldInterpolator::density(double t, double x) const { return eval(true, t, x); }
double FieldInterpolator::velocity(double t, double x) const { return eval(false, t, x); }

solver::Trajectory resample(const solver::Trajectory& source, const std::vector<double>& times,
                            const solver::Grid& grid) {
    const FieldInterpolator f(source);
    solver::Trajectory out;
    out.grid = grid;
    const auto x = grid.cell_centers();
    for (double t : times) {
        solver::StateField field;
        field.rho.resize(x.size());
        field.v.resize(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            field.rho[j] = f.density(t, x[j]);
            field.v[j] = f.velocity(t, x[j]);
        }
        out.times.push_back(t);
        out.fields.push_back(std::move(field));
    }
    if (out.times.size() > 1) out.dt = out.times[1] - out.times[0];
    return out;
}

}  // namespace arz::interp
