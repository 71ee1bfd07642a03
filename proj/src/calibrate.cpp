#include "arz/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "arz/errors.hpp"

namespace arz::calibrate {

namespace {

double clamp_to(const std::vector<double>& lower, const std::vector<double>& upper,
                std::vector<double>& x) {
    double moved = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = std::clamp(x[i], lower[i], upper[i]);
        moved += std::abs(c - x[i]);
        x[i] = c;
    }
    return moved;
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          std::vector<double> start, const std::vector<double>& lower,
                          const std::vector<double>& upper, const SimplexOptions& options) {
    const std::size_t n = start.size();
    clamp_to(lower, upper, start);

    int evals = 0;
    auto eval = [&](std::vector<double> x) {
        clamp_to(lower, upper, x);
        ++evals;
        return std::make_pair(objective(x), x);
    };

    // initial simplex: start plus one perturbed vertex per coordinate
    std::vector<std::vector<double>> pts(n + 1, start);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        double step = options.initial_step * std::max(std::abs(start[i]), 1e-3 * (upper[i] - lower[i]));
        if (start[i] + step > upper[i]) step = -step;
        pts[i + 1][i] += step;
    }
    for (std::size_t i = 0; i <= n; ++i) {
        auto [f, x] = eval(pts[i]);
        fv[i] = f;
        pts[i] = x;
    }

    auto order = [&] {
        std::vector<std::size_t> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> p2;
        std::vector<double> f2;
        for (auto k : idx) {
            p2.push_back(pts[k]);
            f2.push_back(fv[k]);
        }
        pts = std::move(p2);
        fv = std::move(f2);
    };

    order();
    bool converged = false;
    while (evals < options.max_evaluations) {
        const double spread = std::abs(fv[n] - fv[0]);
        if (spread <= options.f_tolerance * (1.0 + std::abs(fv[0]))) {
            converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / n;

        auto blend = [&](double coeff) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j)
                x[j] = centroid[j] + coeff * (pts[n][j] - centroid[j]);
            return x;
        };

        auto [fr, xr] = eval(blend(-1.0));  // reflection
        if (fr < fv[0]) {
            auto [fe, xe] = eval(blend(-2.0));  // expansion
            if (fe < fr) {
                pts[n] = xe;
                fv[n] = fe;
            } else {
                pts[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            pts[n] = xr;
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            auto [fc, xc] = eval(blend(outside ? -0.5 : 0.5));  // contraction
            if (fc < std::min(fr, fv[n])) {
                pts[n] = xc;
                fv[n] = fc;
            } else {  // shrink toward best
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
                    auto [fs, xs] = eval(pts[i]);
                    fv[i] = fs;
                    pts[i] = xs;
                }
            }
        }
        order();
    }
    return SimplexResult{pts[0], fv[0], evals, converged};
}

FitResult calibrate_three_param(const std::vector<ScatterPoint>& scatter, double rho_m) {
    if (scatter.size() < 10)
        throw DataError("calibration needs at least 10 scatter points, got " +
                        std::to_string(scatter.size()));
    if (!(rho_m > 0.0)) throw ConfigError("calibrate_three_param: rho_m must be > 0");

    double q_scale = 0.0;
    for (const auto& p : scatter) q_scale = std::max(q_scale, std::abs(p.q));
    if (q_scale == 0.0) q_scale = 1.0;

    const std::vector<double> lower{1e-2, 1e-3, 1e-9};
    const std::vector<double> upper{1e3, 1.0 - 1e-3, 1e3 * q_scale};

    auto objective = [&](const std::vector<double>& x) {
        const fd::FundamentalDiagram cand{fd::ThreeParamFD{x[0], x[1], x[2], rho_m}};
        double ss = 0.0;
        for (const auto& p : scatter) {
            const double d = fd::equilibrium_flow(cand, std::min(p.rho, rho_m)) - p.q;
            ss += d * d;
        }
        return ss;
    };

    // 8 fixed starts covering the (roundness, crit_shape) shape space
    const std::array<std::array<double, 3>, 8> starts{{
        {2.0, 0.25, 1.0},
        {10.0, 0.25, 1.0},
        {20.0, 0.15, 1.0},
        {5.0, 0.5, 1.0},
        {15.0, 0.35, 1.0},
        {40.0, 0.2, 1.0},
        {8.0, 0.1, 1.0},
        {3.0, 0.7, 1.0},
    }};

    SimplexResult best;
    best.f = std::numeric_limits<double>::infinity();
    int total_evals = 0;
    bool any_converged = false;
    for (const auto& s : starts) {
        std::vector<double> x0{s[0], s[1], s[2] * q_scale};
        auto res = nelder_mead(objective, x0, lower, upper);
        // one restart from the found point tightens the simplex
        res = nelder_mead(objective, res.x, lower, upper);
        total_evals += res.evaluations;
        any_converged = any_converged || res.converged;
        if (res.f < best.f) best = res;
    }

    FitResult out{fd::FundamentalDiagram{fd::ThreeParamFD{best.x[0], best.x[1], best.x[2], rho_m}},
                  best.f, total_evals, any_converged};
    if (!any_converged)
        throw CalibrationError("three-parameter fit did not converge", best.f);
    try {
        fd::validate(out.diagram);
    } catch (const ConfigError& e) {
        throw CalibrationError(std::string("fitted diagram inadmissible: ") + e.what(), best.f);
    }
    return out;
}

}  // namespace arz::calibrate
