#include "gridbrake/error.hpp"
#include "gridbrake/models.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <numbers>

using namespace gridbrake;
using Catch::Approx;

namespace {

const double kOmegaB = 2.0 * std::numbers::pi * 60.0;

SyncGenParams bare_machine() {
    SyncGenParams p;
    p.h_s = 11.0;
    p.d = 0.0;
    p.exciter.enabled = false;
    p.governor.enabled = false;
    return p;
}

}  // namespace

TEST_CASE("synchronous machine acceleration follows the swing equation") {
    auto p = bare_machine();
    p.r_a = 0.0;
    p.x_a = 0.0;
    SyncGenState s;
    const SyncGenSetpoints sp{1.0, 1.0};

    // half the electrical load lost: 1.0 mechanical against 0.5 electrical
    auto d = sg_derivatives(p, s, sp, {Complex(1.0, 0.0), Complex(0.5, 0.0)}, kOmegaB);
    CHECK(d.omega == Approx(0.5 / 22.0).epsilon(1e-14));
    CHECK(d.delta == 0.0);

    // a brake of 0.25 pu absorbing part of the surplus
    d = sg_derivatives(p, s, sp, {Complex(1.0, 0.0), Complex(0.75, 0.0)}, kOmegaB);
    CHECK(d.omega == Approx(0.25 / 22.0).epsilon(1e-14));

    s.omega = 0.01;
    d = sg_derivatives(p, s, sp, {Complex(1.0, 0.0), Complex(1.0, 0.0)}, kOmegaB);
    CHECK(d.delta == Approx(kOmegaB * 0.01));
}

TEST_CASE("machine behind reactance delivers E V sin(delta) / X") {
    auto p = bare_machine();
    p.r_a = 0.0;
    p.x_a = 0.3;
    SyncGenState s;
    s.eq = 1.1;
    s.delta = 0.4;
    const Complex v(1.0, 0.0);
    const Complex i = sg_current(p, s, v);
    const double pe = sg_airgap_power(p, s, {v, i});
    CHECK(pe == Approx(1.1 * 1.0 * std::sin(0.4) / 0.3).epsilon(1e-12));
}

TEST_CASE("governor and exciter hold at their own equilibrium") {
    SyncGenParams p;
    SyncGenState s;
    s.pv = 0.6;
    s.reheat = 0.6;
    const SyncGenSetpoints sp{0.6, 1.0};
    CHECK(sg_mechanical_power(p, s, sp) == Approx(0.6));
    // speed rise lowers the valve set point by omega / droop
    s.omega = 0.01;
    const auto d = sg_derivatives(p, s, sp, {Complex(1.0, 0.0), Complex(0.6, 0.0)}, kOmegaB);
    CHECK(d.pv == Approx((0.6 - 0.01 / 0.05 - 0.6) / 0.2));
    CHECK(d.reheat == 0.0);
}

TEST_CASE("state packing round-trips") {
    SyncGenParams p;
    SyncGenState s{0.1, 0.002, 1.05, 0.3, 1.2, 0.01, 0.5, 0.45};
    const auto x = sg_pack(p, s);
    REQUIRE(x.size() == sg_state_names(p).size());
    const auto back = sg_unpack(p, x, SyncGenState{});
    CHECK(back.delta == s.delta);
    CHECK(back.reheat == s.reheat);
    CHECK(sg_state_names(bare_machine()).size() == 2);
}

TEST_CASE("parameter validation rejects bad machines") {
    auto p = bare_machine();
    p.h_s = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = bare_machine();
    p.x_a = 0.0;
    p.r_a = 0.01;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    GfmParams g;
    g.current_limit_pu = 0.9;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    InductionMotorParams m;
    m.rr = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("non-finite inputs are reported") {
    auto p = bare_machine();
    SyncGenState s;
    s.omega = std::nan("");
    CHECK_THROWS_AS(sg_derivatives(p, s, {}, {Complex(1.0, 0.0), Complex(0.0, 0.0)}, kOmegaB), NumericError);
    GfmParams g;
    CHECK_THROWS_AS(gfm_output_current(g, {}, Complex(INFINITY, 0.0), 60.0), NumericError);
}

TEST_CASE("grid-forming current limit") {
    GfmParams g;
    const double x = g.filter_reactance_pu(60.0);
    // x = 2 pi 60 L / (kV^2 / MW)
    CHECK(x == Approx(2.0 * std::numbers::pi * 60.0 * 3e-3 / (34.5 * 34.5 / 500.0)));

    // collapsed terminal voltage: unlimited current would be 1/x, far beyond 1.3
    GfmState s;
    const Complex i = gfm_output_current(g, s, Complex(0.0, 0.0), 60.0);
    REQUIRE(1.0 / x > 1.3);
    CHECK(std::abs(i) == Approx(1.3).epsilon(1e-12));
    // direction is preserved
    CHECK(std::arg(i) == Approx(std::arg(Complex(1.0, 0.0) / Complex(0.0, x))));

    // small angle difference stays inside the limit
    s.theta = 0.01;
    const Complex small = gfm_output_current(g, s, Complex(1.0, 0.0), 60.0);
    CHECK(std::abs(small) < 1.3);
    CHECK(std::abs(small) == Approx(std::abs(std::polar(1.0, 0.01) - 1.0) / x));
}

TEST_CASE("grid-forming droop settles at m_p times the power error") {
    GfmParams g;
    // output power held at p_ref + 0.2 via an integrated state on an infinite bus
    GfmState s;
    const GfmSetpoints sp{0.5, 0.0, 1.0};
    // solve the angle that gives 0.7 pu, then integrate the frequency lag alone
    const double x = g.filter_reactance_pu(60.0);
    s.theta = std::asin(0.7 * x);
    s.e = 1.0;
    const Complex v(1.0, 0.0);
    const double pout = (v * std::conj(gfm_output_current(g, s, v, 60.0))).real();
    REQUIRE(pout == Approx(0.7).epsilon(1e-12));
    double w = 0.0;
    const double dt = 1e-4;
    for (int k = 0; k < 20000; ++k) {
        GfmState probe = s;
        probe.omega = w;
        w += dt * gfm_derivatives(g, probe, sp, v, 60.0).omega;
    }
    CHECK(w == Approx(g.droop_p * (0.5 - 0.7)).epsilon(1e-6));
    CHECK(g.virtual_inertia_s() == Approx(g.tau_p_s / (2.0 * g.droop_p)));
}

TEST_CASE("induction motor decelerates with no supply voltage") {
    InductionMotorParams m;
    const double s0 = 0.02;
    auto e = motor_steady_emf(m, Complex(1.0, 0.0), s0, kOmegaB);
    InductionMotorState st{e.real(), e.imag(), s0};
    const MotorSetpoints sp{0.8};
    const auto d = motor_derivatives(m, st, sp, Complex(0.0, 0.0), kOmegaB);
    CHECK(d.slip > 0.0);
    // with no voltage and no flux, only the load torque remains
    InductionMotorState dead{0.0, 0.0, s0};
    const auto dd = motor_derivatives(m, dead, sp, Complex(0.0, 0.0), kOmegaB);
    CHECK(dd.slip == Approx(0.8 * std::pow(1.0 - s0, 2.0) / (2.0 * m.h_s)));
}

TEST_CASE("steady-state motor EMF is an equilibrium of the transient model") {
    InductionMotorParams m;
    for (double slip : {0.005, 0.02, 0.1}) {
        const Complex v(0.95, 0.1);
        const auto e = motor_steady_emf(m, v, slip, kOmegaB);
        InductionMotorState st{e.real(), e.imag(), slip};
        const auto d = motor_derivatives(m, st, {0.0}, v, kOmegaB);
        CHECK(std::abs(d.er) < 1e-9);
        CHECK(std::abs(d.ei) < 1e-9);
        // transient-model torque matches the equivalent circuit at steady state
        CHECK(motor_electrical_torque(m, st, v) == Approx(motor_steady_torque(m, std::abs(v), slip)).epsilon(1e-6));
    }
}

TEST_CASE("torque-slip curve has a single maximum") {
    InductionMotorParams m;
    const double s_max = motor_pullout_slip(m);
    CHECK(s_max > 0.0);
    CHECK(s_max < 1.0);
    // rises strictly before the pull-out slip and falls strictly after it
    double prev = motor_steady_torque(m, 1.0, 1e-4);
    int sign_changes = 0;
    bool rising = true;
    for (double s = 2e-4; s <= 1.0; s += 1e-4) {
        const double t = motor_steady_torque(m, 1.0, s);
        const bool up = t > prev;
        if (up != rising) {
            ++sign_changes;
            rising = up;
        }
        prev = t;
    }
    CHECK(sign_changes == 1);
    // closed-form pull-out slip from the Thevenin rotor circuit
    const Complex zth = Complex(0.0, m.xm) * Complex(m.rs, m.xs) / Complex(m.rs, m.xs + m.xm);
    const double s_th = m.rr / std::abs(zth + Complex(0.0, m.xr));
    CHECK(s_max == Approx(s_th).epsilon(1e-4));
    CHECK(motor_steady_torque(m, 1.0, 0.0) == 0.0);
}

TEST_CASE("static load switches to constant impedance below v_min") {
    StaticLoad l{Complex(0.5, 0.1), 0.7};
    const Complex v1(1.0, 0.0);
    CHECK(std::abs(v1 * std::conj(l.current(v1)) - l.s_pu) < 1e-12);
    const Complex v2(0.5, 0.0);
    const Complex s2 = v2 * std::conj(l.current(v2));
    CHECK(s2.real() == Approx(0.5 * 0.25 / 0.49));
}

TEST_CASE("model evaluation is deterministic") {
    SyncGenParams p;
    SyncGenState s{0.3, 0.001, 1.02, 0.1, 1.1, 0.02, 0.4, 0.39};
    const Terminal t{Complex(0.98, 0.05), Complex(0.4, -0.1)};
    const auto a = sg_derivatives(p, s, {0.4, 1.0}, t, kOmegaB);
    const auto b = sg_derivatives(p, s, {0.4, 1.0}, t, kOmegaB);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}
