#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "arz/config.hpp"
#include "arz/errors.hpp"
#include "arz/observer.hpp"
#include "arz/pipeline.hpp"

using namespace arz;

namespace {
const fd::FundamentalDiagram table1 = fd::greenshield(40.0, 0.160, 1.0);
const lin::ReferenceState ref1 = lin::make_reference(table1, 0.120);
constexpr double kTau = 60.0, kLength = 400.0;

std::vector<double> fourier_field(std::mt19937_64& rng, const std::vector<double>& x) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> f(x.size(), 0.0);
    for (int k = 1; k <= 5; ++k) {
        const double a = n(rng), b = n(rng);
        for (std::size_t j = 0; j < x.size(); ++j)
            f[j] += a * std::sin(k * M_PI * x[j] / kLength) +
                    b * std::cos(k * M_PI * x[j] / kLength);
    }
    return f;
}
}  // namespace

TEST_CASE("measurement series validation and interpolation") {
    CHECK_THROWS_AS(observer::BoundaryMeasurements({}, {}, {}, {}, 2.0), DataError);
    CHECK_THROWS_AS(observer::BoundaryMeasurements({0.0, 0.0}, {1, 1}, {1, 1}, {1, 1}, 2.0),
                    DataError);
    CHECK_THROWS_AS(observer::BoundaryMeasurements({0.0, 1.0}, {1, -1}, {1, 1}, {1, 1}, 2.0),
                    DataError);

    observer::BoundaryMeasurements m({0.0, 1.0, 6.0}, {1.0, 2.0, 3.0}, {1.0, 1.0, 1.0},
                                     {5.0, 5.0, 5.0}, 2.0);
    CHECK(m.q_in_at(0.5) == doctest::Approx(1.5));
    CHECK(m.q_in_at(-1.0) == 1.0);   // clamped before the series
    CHECK(m.q_in_at(10.0) == 3.0);   // clamped after the series
    CHECK_THROWS_AS(m.q_in_at(3.0), DataError);  // inside the 5 s gap, max gap 2 s
}

TEST_CASE("outlet scaled mismatch examples") {
    CHECK(observer::outlet_estimate_scaled(ref1.rho_star, ref1.v_star, ref1, kTau, kLength) ==
          doctest::Approx(0.0).epsilon(1e-13));
    const double scale = std::exp(2.0 / 3.0);
    // +0.1 veh/s flux deviation at matched velocity
    const double w = lin::outlet_scaled_deviation(0.0, 0.1, ref1, kTau, kLength);
    CHECK(w == doctest::Approx(0.1 * scale).epsilon(1e-13));
    CHECK(lin::outlet_scaled_deviation(1.0, 0.0, ref1, kTau, kLength) ==
          doctest::Approx(-0.08 * scale).epsilon(1e-13));
}

TEST_CASE("injection terms") {
    std::vector<double> xs;
    for (int i = 0; i < 41; ++i) xs.push_back(kLength * i / 40.0);
    const auto gains = lin::injection_gains(ref1, kTau, kLength, xs);

    const auto zero = observer::injection_terms(0.3, 0.3, gains);
    for (double e : zero.e_w) CHECK(e == 0.0);
    for (double e : zero.e_v) CHECK(e == 0.0);

    const auto unit = observer::injection_terms(1.0, 0.0, gains);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(unit.e_w[i] == gains.r[i]);
        CHECK(unit.e_v[i] == gains.s[i]);
        CHECK(unit.e_w[i] > 0.0);  // positive outlet error injects positively into w-hat
    }
}

TEST_CASE("observer holds the setpoint under setpoint measurements") {
    const solver::Grid grid{kLength, 41};
    std::vector<double> t{0.0, 500.0};
    observer::BoundaryMeasurements meas(std::move(t), {1.2, 1.2}, {1.2, 1.2}, {10.0, 10.0},
                                        1000.0);
    observer::ObserverOptions opts;
    const auto est = observer::run_observer(meas, std::nullopt, table1, kTau, ref1, grid, 120.0,
                                            opts);
    for (const auto& f : est.fields) {
        for (int j = 0; j < grid.num_cells; ++j) {
            CHECK(std::abs(f.rho[j] - 0.120) < 1e-12);
            CHECK(std::abs(f.v[j] - 10.0) < 1e-12);
        }
    }
}

TEST_CASE("linear error system: zero stays zero, gains give finite-time decay") {
    const solver::Grid grid{kLength, 400};
    const auto x = grid.cell_centers();
    const auto gains = lin::injection_gains(ref1, kTau, kLength, x);

    std::vector<double> zero(x.size(), 0.0);
    const auto still = observer::simulate_linear_error_system(zero, zero, gains, ref1, kTau,
                                                              grid, 30.0);
    CHECK(still.l2_norm.back() == 0.0);

    std::mt19937_64 rng(123);
    for (int draw = 0; draw < 3; ++draw) {
        const auto w0 = fourier_field(rng, x);
        const auto v0 = fourier_field(rng, x);
        const auto run =
            observer::simulate_linear_error_system(w0, v0, gains, ref1, kTau, grid, 66.0);
        CHECK(run.l2_norm.back() <= 1e-3 * run.l2_norm.front());
    }

    // ablation: zeroed gains do not reach the bound
    lin::GainProfile no_gains = gains;
    std::fill(no_gains.r.begin(), no_gains.r.end(), 0.0);
    std::fill(no_gains.s.begin(), no_gains.s.end(), 0.0);
    std::mt19937_64 rng2(123);
    const auto w0 = fourier_field(rng2, x);
    const auto v0 = fourier_field(rng2, x);
    const auto run =
        observer::simulate_linear_error_system(w0, v0, no_gains, ref1, kTau, grid, 66.0);
    CHECK(run.l2_norm.back() > 1e-3 * run.l2_norm.front());
}

TEST_CASE("twin experiment converges (smoke level)") {
    config::RunConfig cfg;
    cfg.num_cells = 80;
    cfg.total_time = 160.0;
    const auto twin = pipeline::run_twin(cfg);
    // errors at the end of the window are small; acceptance pins the strict bounds
    CHECK(twin.errors.e_rho.back() < 0.02);
    CHECK(twin.errors.e_v.back() < 0.02);
    // estimate shares the plant's step and samples
    CHECK(twin.estimate.times.size() == twin.plant.times.size());
}

TEST_CASE("twin stays put when plant sits at the setpoint") {
    config::RunConfig cfg;
    cfg.num_cells = 41;
    cfg.total_time = 60.0;
    cfg.ic_kind = "setpoint";
    const auto twin = pipeline::run_twin(cfg);
    for (std::size_t k = 0; k < twin.errors.times.size(); ++k) {
        CHECK(twin.errors.e_rho[k] < 1e-12);
        CHECK(twin.errors.e_v[k] < 1e-12);
    }
}

TEST_CASE("simplified-formulation twin also runs") {
    config::RunConfig cfg;
    cfg.num_cells = 41;
    cfg.total_time = 120.0;
    cfg.gain_formulation = lin::GainFormulation::Simplified;
    const auto twin = pipeline::run_twin(cfg);
    CHECK(twin.errors.e_rho.back() < 0.05);
}

TEST_CASE("x-varying exponent variant runs and converges comparably") {
    config::RunConfig cfg;
    cfg.num_cells = 80;
    cfg.total_time = 160.0;
    cfg.x_varying_exponent = true;
    const auto twin = pipeline::run_twin(cfg);
    CHECK(twin.errors.e_rho.back() < 0.02);
}
