#include "gridbrake/error.hpp"
#include "gridbrake/swing.hpp"
#include "gridbrake/units.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

using namespace gridbrake;
using Catch::Approx;

// Classic RK4 on dω/dt = (ΔP − P_br − D ω) / 2H, written independently of the library.
static double integrate_swing(double h, double d, double dp, double pbr, double w0, double t_end, double step) {
    auto f = [&](double w) { return (dp - pbr - d * w) / (2.0 * h); };
    double w = w0;
    const auto n = static_cast<long>(std::llround(t_end / step));
    for (long k = 0; k < n; ++k) {
        const double k1 = f(w);
        const double k2 = f(w + 0.5 * step * k1);
        const double k3 = f(w + 0.5 * step * k2);
        const double k4 = f(w + step * k3);
        w += step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return w;
}

TEST_CASE("per-unit conversion") {
    SystemBase base;
    CHECK(to_pu(500.0, base) == 0.5);
    CHECK(to_pu(0.0, base) == 0.0);
    CHECK(to_pu(250.0, base) == 0.25);
    for (double x : {-1234.5, 0.0, 1e-9, 3.7, 999.999, 1e7}) {
        CHECK(from_pu(to_pu(x, base), base) == Approx(x).epsilon(1e-15));
    }
    CHECK(to_pu(120.0 + 37.0, base) == Approx(to_pu(120.0, base) + to_pu(37.0, base)));

    SystemBase bad;
    bad.s_base_mva = 0.0;
    CHECK_THROWS_AS(to_pu(1.0, bad), ConfigError);
    bad = SystemBase{};
    bad.f_nominal_hz = -60.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("cycles to seconds") {
    CHECK(cycles_to_seconds(3.0, 60.0) == Approx(0.05));
    CHECK(cycles_to_seconds(0.0, 60.0) == 0.0);
    CHECK(cycles_to_seconds(2.0, 50.0) == Approx(0.04));
    CHECK_THROWS_AS(cycles_to_seconds(-1.0, 60.0), DomainError);
}

TEST_CASE("brake power from resistance") {
    CHECK(swing::brake_power({1.0, 2.0}) == 0.5);
    CHECK(swing::brake_power({0.0, 4.0}) == 0.0);
    CHECK(swing::brake_power({0.95, 4.0}) == Approx(0.225625).epsilon(1e-15));
    CHECK_THROWS_AS(swing::brake_power({1.0, 0.0}), DomainError);
    CHECK(swing::brake_power({1.0, swing::brake_resistance(0.37)}) == Approx(0.37));
}

TEST_CASE("closed-form speed deviation") {
    const swing::SwingParams p{11.0, 1.0, 0.5, 0.25};
    CHECK(swing::speed_deviation_at(p, {0.03, 0.0}) == 0.03);
    CHECK(swing::speed_deviation_at(p, {0.0, 1e4}) == Approx(0.25));
    CHECK(swing::speed_deviation_at(p, {0.0, 22.0}) == Approx(0.25 * (1.0 - std::exp(-1.0))).epsilon(1e-12));
    CHECK(swing::speed_deviation_at(p, {0.0, 22.0}) == Approx(0.15803).margin(5e-6));

    swing::SwingParams undamped = p;
    undamped.d = 0.0;
    CHECK_THROWS_AS(swing::speed_deviation_at(undamped, {0.0, 1.0}), DomainError);
}

TEST_CASE("closed form matches 10 microsecond numerical integration") {
    // several parameter sets, 10 s horizon, tolerance 1e-6 pu
    const swing::SwingParams cases[] = {{11.0, 1.0, 0.5, 0.25}, {11.0, 2.0, 0.5, 0.75}, {4.0, 0.5, 0.2, 0.0},
                                        {6.5, 1.5, 0.0, 0.3}};
    for (const auto& p : cases) {
        for (double w0 : {0.0, 0.01}) {
            for (double t : {0.5, 2.0, 10.0}) {
                const double num = integrate_swing(p.h, p.d, p.delta_p, p.p_br, w0, t, 1e-5);
                CHECK(std::abs(swing::speed_deviation_at(p, {w0, t}) - num) < 1e-6);
            }
        }
    }
}

TEST_CASE("damped form tends to the first-swing form as D goes to zero") {
    swing::SwingParams small{11.0, 1e-6, 0.5, 0.25};
    swing::SwingParams zero{11.0, 0.0, 0.5, 0.25};
    for (double t = 0.0; t <= 5.0; t += 0.25) {
        CHECK(std::abs(swing::speed_deviation_at(small, {0.01, t}) - swing::speed_deviation_first_swing(zero, {0.01, t})) <
              1e-4);
    }
}

TEST_CASE("damped removal time") {
    const swing::SwingParams p{11.0, 1.0, 0.5, 0.25};
    const auto r = swing::removal_time_damped(p, 0.0, 0.1);
    REQUIRE(r.reachable);
    // T = 2H/D ln(s / (s - target)) with s = 0.25
    CHECK(r.t_removal == Approx(22.0 * std::log(0.25 / 0.15)).epsilon(1e-14));
    CHECK(r.t_removal == Approx(11.238).margin(5e-4));
    CHECK(std::abs(swing::speed_deviation_at(p, {0.0, r.t_removal}) - 0.1) < 1e-9);
    // cross-check by bisection on the integrated trajectory
    double lo = 0.0, hi = 20.0;
    for (int k = 0; k < 40; ++k) {
        const double mid = 0.5 * (lo + hi);
        (integrate_swing(p.h, p.d, p.delta_p, p.p_br, 0.0, mid, 1e-3) < 0.1 ? lo : hi) = mid;
    }
    CHECK(0.5 * (lo + hi) == Approx(r.t_removal).margin(1e-3));

    const auto same = swing::removal_time_damped(p, 0.07, 0.07);
    CHECK(same.reachable);
    CHECK(same.t_removal == 0.0);
    CHECK_FALSE(swing::removal_time_damped(p, 0.0, 0.3).reachable);

    // substitution property over a grid of reachable targets
    for (double target = 0.01; target < 0.25; target += 0.02) {
        const auto s = swing::removal_time_damped(p, 0.0, target);
        REQUIRE(s.reachable);
        CHECK(std::abs(swing::speed_deviation_at(p, {0.0, s.t_removal}) - target) < 1e-9);
    }
    swing::SwingParams undamped = p;
    undamped.d = 0.0;
    CHECK_THROWS_AS(swing::removal_time_damped(undamped, 0.0, 0.1), DomainError);
}

TEST_CASE("first-swing removal time") {
    const swing::SwingParams p{11.0, 0.0, 0.5, 0.75};
    const auto r = swing::removal_time_first_swing(p, 0.01, 0.0);
    REQUIRE(r.reachable);
    CHECK(r.t_removal == Approx(0.88).epsilon(1e-12));
    // independent check: undamped integration reaches zero at T
    CHECK(std::abs(integrate_swing(11.0, 0.0, 0.5, 0.75, 0.01, 0.88, 1e-5)) < 1e-9);
    CHECK(swing::removal_time_first_swing(p, 0.02, 0.02).t_removal == 0.0);
    CHECK_FALSE(swing::removal_time_first_swing({11.0, 0.0, 0.5, 0.25}, 0.0, 0.05).reachable);
    CHECK_FALSE(swing::removal_time_first_swing({11.0, 0.0, 0.5, 0.5}, 0.01, 0.0).reachable);
}

TEST_CASE("stage allocation examples") {
    CHECK(swing::allocate_stages(370.0, 130.0) == std::vector<double>{130.0, 130.0, 110.0});
    CHECK(swing::allocate_stages(250.0, 250.0) == std::vector<double>{250.0});
    CHECK(swing::allocate_stages(500.0, 150.0) == std::vector<double>{150.0, 150.0, 150.0, 50.0});
    CHECK_THROWS_AS(swing::allocate_stages(0.0, 100.0), DomainError);
    CHECK_THROWS_AS(swing::allocate_stages(100.0, 0.0), DomainError);
}

TEST_CASE("stage allocation is minimal by brute force") {
    for (int total = 10; total <= 1000; total += 10) {
        for (int step : {10, 30, 70, 125, 130, 250, 333, 1000}) {
            const auto st = swing::allocate_stages(total, step);
            // brute force: smallest k for which some k stages of size <= step reach the total
            int k_min = 1;
            while (static_cast<double>(k_min) * step < total) ++k_min;
            INFO("total " << total << " step " << step);
            CHECK(static_cast<int>(st.size()) == k_min);
            CHECK(std::accumulate(st.begin(), st.end(), 0.0) == static_cast<double>(total));
            for (std::size_t i = 0; i < st.size(); ++i) {
                CHECK(st[i] <= step);
                CHECK(st[i] > 0.0);
                if (i > 0) CHECK(st[i] <= st[i - 1]);
            }
        }
    }
}
