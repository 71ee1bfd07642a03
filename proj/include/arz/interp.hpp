#pragma once

#include <vector>

#include "arz/solver.hpp"

namespace arz::interp {

/// Bilinear sampling of a stored trajectory: linear in t between samples,
/// linear in x between cell centers, clamped at the edges.
class FieldInterpolator {
  public:
    explicit FieldInterpolator(const solver::Trajectory& traj);

    double density(double t, double x) const;
    double velocity(double t, double x) const;

  private:
    double eval(bool density_field, double t, double x) const;
    double sample(const std::vector<double>& f, double x) const;

    const solver::Trajectory& traj_;
    std::vector<double> centers_;
};

/// Truth trajectory re-sampled onto another run's grid and time samples.
solver::Trajectory resample(const solver::Trajectory& source, const std::vector<double>& times,
                            const solver::Grid& grid);

}  // namespace arz::interp
