#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "arz/errors.hpp"
#include "arz/fd.hpp"

using namespace arz;

namespace {
const fd::FundamentalDiagram table1 = fd::greenshield(40.0, 0.160, 1.0);

double fdiff(double (*f)(const fd::FundamentalDiagram&, double), const fd::FundamentalDiagram& d,
             double rho, double h) {
    return (f(d, rho + h) - f(d, rho - h)) / (2.0 * h);
}
}  // namespace

TEST_CASE("greenshield equilibrium velocity") {
    CHECK(fd::equilibrium_velocity(table1, 0.0) == doctest::Approx(40.0).epsilon(1e-14));
    CHECK(fd::equilibrium_velocity(table1, 0.120) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(fd::equilibrium_velocity(table1, 0.160) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(fd::equilibrium_velocity(table1, -0.01), std::domain_error);
    CHECK_THROWS_AS(fd::equilibrium_velocity(table1, 0.2), std::domain_error);
}

TEST_CASE("pressure examples and closed form") {
    CHECK(fd::pressure(table1, 0.0) == 0.0);
    CHECK(fd::pressure(table1, 0.120) == doctest::Approx(30.0).epsilon(1e-14));
    CHECK(fd::pressure(table1, 0.160) == doctest::Approx(40.0).epsilon(1e-14));
    CHECK_THROWS_AS(fd::pressure(table1, 0.17), std::domain_error);

    // p(rho) = V(0) - V(rho) must reproduce v_f (rho/rho_m)^gamma
    const auto d = fd::greenshield(31.0, 0.21, 1.7);
    for (int i = 0; i <= 20; ++i) {
        const double rho = 0.21 * i / 20.0;
        const double closed = 31.0 * std::pow(rho / 0.21, 1.7);
        CHECK(fd::pressure(d, rho) == doctest::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("equilibrium flow examples") {
    CHECK(fd::equilibrium_flow(table1, 0.0) == 0.0);
    const auto tp = fd::three_param(12.0, 0.18, 0.6, 0.16);
    CHECK(fd::equilibrium_flow(tp, 0.0) == doctest::Approx(0.0).epsilon(1e-12));

    // at rho = crit_shape * rho_m the square-root term is exactly 1
    const double a = std::sqrt(1.0 + std::pow(12.0 * 0.18, 2));
    const double b = std::sqrt(1.0 + std::pow(12.0 * 0.82, 2));
    const double expected = 0.6 * (a + (b - a) * 0.18 - 1.0);
    CHECK(fd::equilibrium_flow(tp, 0.18 * 0.16) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("three-param shape collapse as roundness -> 0") {
    CHECK_THROWS_AS(fd::three_param(0.0, 0.25, 1.0, 0.16), ConfigError);
    const fd::FundamentalDiagram tiny{fd::ThreeParamFD{1e-2, 0.25, 1.0, 0.16}};
    for (int i = 1; i < 10; ++i) {
        const double rho = 0.16 * i / 10.0;
        CHECK(std::abs(fd::equilibrium_flow(tiny, rho)) < 1e-3);
    }
}

TEST_CASE("critical density") {
    CHECK(fd::critical_density(table1) == doctest::Approx(0.080).epsilon(1e-9));
    const auto g2 = fd::greenshield(40.0, 0.160, 2.0);
    CHECK(fd::critical_density(g2) == doctest::Approx(0.160 / std::sqrt(3.0)).epsilon(1e-9));

    // dense-grid argmax oracle for a three-param family tuned near rho_m/4
    const auto tp = fd::three_param(12.0, 0.18, 0.6, 0.16);
    const double rho_c = fd::critical_density(tp);
    double best_rho = 0.0, best_q = -1.0;
    const int n = 1000000;
    for (int i = 1; i < n; ++i) {
        const double rho = 0.16 * i / n;
        const double q = fd::equilibrium_flow(tp, rho);
        if (q > best_q) {
            best_q = q;
            best_rho = rho;
        }
    }
    CHECK(std::abs(rho_c - best_rho) < 1e-6 * 0.16 + 0.16 / n);
    CHECK(rho_c / 0.16 == doctest::Approx(0.2469).epsilon(0.01));
}

TEST_CASE("prescribe_rho_m") {
    CHECK(fd::prescribe_rho_m(6, 5.0, 0.5) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(fd::prescribe_rho_m(1, 5.0, 0.5) == doctest::Approx(0.8 / 6.0).epsilon(1e-14));
    CHECK(fd::prescribe_rho_m(1, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(fd::prescribe_rho_m(0, 5.0, 0.5), ConfigError);
}

TEST_CASE("monotonicity and concavity properties") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        fd::FundamentalDiagram d =
            trial % 2 == 0
                ? fd::greenshield(20.0 + 30.0 * u(rng), 0.1 + 0.5 * u(rng), 0.5 + 2.0 * u(rng))
                : fd::three_param(2.0 + 20.0 * u(rng), 0.1 + 0.6 * u(rng), 0.2 + u(rng),
                                  0.1 + 0.5 * u(rng));
        const double rho_m = d.rho_max();
        double prev_v = fd::equilibrium_velocity(d, rho_m * 1e-4);
        double prev_p = fd::pressure(d, rho_m * 1e-4);
        for (int i = 1; i <= 50; ++i) {
            const double rho = rho_m * (1e-4 + (1.0 - 2e-4) * i / 50.0);
            const double v = fd::equilibrium_velocity(d, rho);
            const double p = fd::pressure(d, rho);
            CHECK(v < prev_v);
            CHECK(p > prev_p);
            CHECK(fd::flow_curvature(d, rho) < 0.0);
            prev_v = v;
            prev_p = p;
        }
    }
}

TEST_CASE("analytic derivatives match finite differences") {
    const auto tp = fd::three_param(9.0, 0.3, 0.45, 0.22);
    for (const auto& d : {table1, tp}) {
        const double rho_m = d.rho_max();
        for (int i = 1; i < 10; ++i) {
            const double rho = rho_m * i / 10.0 * 0.98;
            const double h = rho_m * 1e-6;
            CHECK(fd::velocity_slope(d, rho) ==
                  doctest::Approx(fdiff(&fd::equilibrium_velocity, d, rho, h)).epsilon(1e-5));
            CHECK(fd::flow_slope(d, rho) ==
                  doctest::Approx(fdiff(&fd::equilibrium_flow, d, rho, h)).epsilon(1e-5));
            CHECK(fd::flow_curvature(d, rho) ==
                  doctest::Approx(fdiff(&fd::flow_slope, d, rho, h)).epsilon(1e-4));
        }
    }
}

TEST_CASE("flow vanishes at rho_m for both families") {
    CHECK(std::abs(fd::equilibrium_flow(table1, 0.160)) < 1e-14);
    const auto tp = fd::three_param(12.0, 0.18, 0.6, 0.16);
    CHECK(std::abs(fd::equilibrium_flow(tp, 0.16)) < 1e-12);
}
