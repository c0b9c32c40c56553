#include "gridbrake/builtins.hpp"
#include "gridbrake/engine.hpp"
#include "gridbrake/error.hpp"
#include "gridbrake/small_signal.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace gridbrake;
using Catch::Approx;

namespace {

bool conjugate_closed(const std::vector<std::complex<double>>& ev, double tol) {
    for (const auto& l : ev) {
        if (std::abs(l.imag()) <= tol) continue;
        const bool found = std::any_of(ev.begin(), ev.end(), [&](const auto& m) { return std::abs(m - std::conj(l)) <= tol; });
        if (!found) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("eigenvalues of small known matrices") {
    Eigen::MatrixXd d(2, 2);
    d << -1.0, 0.0, 0.0, -2.0;
    const auto ev = eigenvalues(d);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].real() == Approx(-1.0));
    CHECK(ev[1].real() == Approx(-2.0));

    // x'' + 0.4 x' + 4 x = 0 has roots -0.2 +/- j sqrt(3.96)
    Eigen::MatrixXd osc(2, 2);
    osc << 0.0, 1.0, -4.0, -0.4;
    const auto o = eigenvalues(osc);
    REQUIRE(o.size() == 2);
    CHECK(o[0].real() == Approx(-0.2));
    CHECK(o[0].imag() == Approx(std::sqrt(3.96)));
    CHECK(o[1] == std::conj(o[0]));

    Eigen::MatrixXd rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(eigenvalues(rect), DomainError);
}

TEST_CASE("reduced one-machine case linearizes to -D/2H") {
    ReducedCase c;
    auto s = reduced_swing_scenario(c);
    s.events.load_steps.clear();
    s.brake.schedule.stages.clear();
    const auto lm = linearize(s);
    REQUIRE(lm.a.rows() == 1);
    CHECK(lm.a(0, 0) == Approx(-1.0 / 22.0).epsilon(1e-6));
}

TEST_CASE("finite-difference step halving barely moves the spectrum") {
    auto model = post_event_model(*builtin_scenario("fig5_eigen_sweep"), 2.0, 250.0);
    const auto x0 = model.initialize();
    LinearizeOptions coarse;
    LinearizeOptions fine;
    fine.relative_step = coarse.relative_step / 2.0;
    const auto a = eigenvalues(linearize(model, x0, coarse));
    const auto b = eigenvalues(linearize(model, x0, fine));
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-4);
    CHECK(conjugate_closed(a, 1e-9));
}

TEST_CASE("linearization away from equilibrium is refused") {
    auto model = post_event_model(*builtin_scenario("fig5_eigen_sweep"), 2.0, 250.0);
    auto x = model.initialize();
    const auto& names = model.state_names();
    const auto it = std::find(names.begin(), names.end(), "sg.omega");
    REQUIRE(it != names.end());
    x[static_cast<std::size_t>(it - names.begin())] += 0.01;
    CHECK_THROWS_AS(linearize(model, x), LinearizationError);
}

TEST_CASE("eigen sweep is ordered and conjugate-closed") {
    const auto tmpl = *builtin_scenario("fig5_eigen_sweep");
    const auto pts = eigen_sweep(tmpl, {2.0, 5.0}, {50.0, 250.0}, 2);
    REQUIRE(pts.size() == 4);
    CHECK(pts[0].scr == 2.0);
    CHECK(pts[1].brake_mw == 250.0);
    CHECK(pts[2].scr == 5.0);
    for (const auto& p : pts) {
        REQUIRE(p.error.empty());
        CHECK(conjugate_closed(p.eigenvalues, 1e-9));
        CHECK(p.stable);
        for (const auto& l : p.eigenvalues) CHECK(l.real() <= p.dominant.real() + 1e-12);
    }
    auto islanded = tmpl;
    islanded.topology.grid.reset();
    const auto failed = eigen_sweep(islanded, {2.0}, {50.0}, 1);
    REQUIRE(failed.size() == 1);
    CHECK_FALSE(failed[0].error.empty());
    CHECK_THROWS_AS(eigen_sweep(tmpl, {}, {50.0}), ConfigError);
}
