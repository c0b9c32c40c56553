// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "gridbrake/builtins.hpp"
#include "gridbrake/engine.hpp"
#include "gridbrake/error.hpp"
#include "gridbrake/io.hpp"
#include "gridbrake/protection.hpp"
#include "gridbrake/small_signal.hpp"
#include "gridbrake/swing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

using namespace gridbrake;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double x, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

Scenario builtin(const std::string& name) {
    auto s = builtin_scenario(name);
    if (!s) throw ConfigError("missing built-in " + name);
    return *s;
}

/// Time of the first sample where `x` reaches `level` moving in `direction` (+1 up, -1 down),
/// linearly interpolated between samples.
std::optional<double> first_crossing(const SimTrace& tr, const std::vector<double>& x, double level, int direction) {
    for (std::size_t k = 1; k < x.size(); ++k) {
        const double a = (x[k - 1] - level) * direction;
        const double b = (x[k] - level) * direction;
        if (a < 0.0 && b >= 0.0) {
            return tr.time[k - 1] + (tr.time[k] - tr.time[k - 1]) * (-a) / (b - a);
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
    Outcome o;
    const ReducedCase c;
    const auto t0 = Clock::now();
    const auto tr = run(reduced_swing_scenario(c));
    const double elapsed = seconds_since(t0);
    o.require(!tr.failed, "run failed: " + tr.failure);
    const auto& w = tr.channel("sg_omega_pu");
    const swing::SwingParams p{c.h_s, c.d_pu, c.delta_p_pu, c.brake_pu};
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k)
        worst = std::max(worst, std::abs(w[k] - swing::speed_deviation_at(p, {c.initial_speed_pu, tr.time[k]})));
    o.require(tr.time.back() >= 10.0 - 1e-9, "trace shorter than 10 s");
    o.require(worst < 1e-6, "max error " + num(worst));
    o.require(elapsed < 1.0, "runtime " + num(elapsed) + " s");
    o.note("max |engine - closed form| = " + num(worst, 3) + " pu over " + num(tr.time.back()) + " s, runtime " +
           num(elapsed, 3) + " s");
    return o;
}

Outcome criterion_2() {
    Outcome o;
    ReducedCase c;
    c.horizon_s = 12.0;
    const auto t0 = Clock::now();
    const auto tr = run(reduced_swing_scenario(c));
    const double elapsed = seconds_since(t0);
    o.require(!tr.failed, "run failed: " + tr.failure);
    const auto sol = swing::removal_time_damped({c.h_s, c.d_pu, c.delta_p_pu, c.brake_pu}, 0.0, 0.1);
    o.require(sol.reachable, "target unreachable in closed form");
    const auto cross = first_crossing(tr, tr.channel("sg_omega_pu"), 0.1, +1);
    o.require(cross.has_value(), "trace never reaches 0.1 pu");
    if (cross) {
        o.require(std::abs(*cross - sol.t_removal) <= 2.0 * c.dt_s,
                  "crossing " + num(*cross, 9) + " vs " + num(sol.t_removal, 9));
        o.note("crossing at " + num(*cross, 8) + " s, closed form " + num(sol.t_removal, 8) + " s");
    }
    o.require(elapsed < 2.0, "runtime " + num(elapsed) + " s");
    return o;
}

Outcome criterion_3() {
    Outcome o;
    ReducedCase c;
    c.d_pu = 0.0;
    c.brake_pu = 0.75;
    c.delta_p_pu = 0.5;
    c.initial_speed_pu = 0.01;
    c.horizon_s = 2.0;
    const auto tr = run(reduced_swing_scenario(c));
    o.require(!tr.failed, "run failed: " + tr.failure);
    const auto sol = swing::removal_time_first_swing({c.h_s, 0.0, c.delta_p_pu, c.brake_pu}, 0.01, 0.0);
    const auto cross = first_crossing(tr, tr.channel("sg_omega_pu"), 0.0, -1);
    o.require(cross.has_value(), "speed deviation never returns to 0");
    if (cross) {
        o.require(std::abs(*cross - 0.88) <= 2.0 * c.dt_s, "zero crossing at " + num(*cross, 9));
        o.note("zero crossing at " + num(*cross, 8) + " s, closed form " + num(sol.t_removal, 8) + " s");
    }
    return o;
}

Outcome criterion_4() {
    Outcome o;
    std::vector<double> peaks;
    for (const char* name : {"fig2_no_brake", "fig2_brake_125", "fig2_brake_250"}) {
        const auto t0 = Clock::now();
        const auto tr = run(builtin(name));
        const double elapsed = seconds_since(t0);
        o.require(!tr.failed, std::string(name) + " failed");
        o.require(elapsed < 5.0, std::string(name) + " runtime " + num(elapsed));
        peaks.push_back(metrics(tr, 0.05).peak_sg_p_pu);
    }
    o.require(peaks[0] >= 1.45 && peaks[0] <= 1.75, "no-brake peak " + num(peaks[0]) + " outside [1.45, 1.75]");
    o.require(peaks[0] > peaks[1] && peaks[1] > peaks[2], "peaks not strictly ordered");
    o.note("peak SG power no brake " + num(peaks[0], 4) + ", 125 MW " + num(peaks[1], 4) + ", 250 MW " +
           num(peaks[2], 4) + " pu");
    return o;
}

Outcome criterion_5() {
    Outcome o;
    std::vector<double> peak, sustained;
    for (const char* name : {"fig3_mix_75sm", "fig3_mix_50sm", "fig3_mix_25sm"}) {
        const auto tr = run(builtin(name));
        o.require(!tr.failed, std::string(name) + " failed");
        const auto m = metrics(tr, 0.05);
        peak.push_back(m.peak_abs_df_hz);
        sustained.push_back(m.sustained_deviation_hz);
    }
    o.require(peak[0] < peak[1] && peak[1] < peak[2], "peak |df| not strictly increasing");
    o.require(sustained[0] < sustained[1] && sustained[1] < sustained[2], "sustained |df| not strictly increasing");
    o.note("peak |df| " + num(peak[0], 4) + " < " + num(peak[1], 4) + " < " + num(peak[2], 4) + " Hz; sustained " +
           num(sustained[0], 4) + " < " + num(sustained[1], 4) + " < " + num(sustained[2], 4) + " Hz");
    return o;
}

/// Conduction intervals of every brake stage from the *_closed channels.
std::vector<std::pair<double, double>> stage_intervals(const SimTrace& tr) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t c = 0; c < tr.channel_names.size(); ++c) {
        const auto& n = tr.channel_names[c];
        if (n.rfind("brake_", 0) != 0 || n.size() < 7 || n.substr(n.size() - 7) != "_closed") continue;
        const auto& s = tr.channels[c];
        std::optional<double> on;
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (!on && s[k] > 0.5) on = tr.time[k];
            if (on && s[k] < 0.5) {
                out.emplace_back(*on, tr.time[k]);
                on.reset();
            }
        }
        if (on) out.emplace_back(*on, INFINITY);
    }
    return out;
}

Outcome criterion_6() {
    Outcome o;
    const auto single = run(builtin("fig4_single_stage"));
    const auto multi = run(builtin("fig4_multi_stage"));
    o.require(!single.failed && !multi.failed, "run failed");
    const auto ms = metrics(single, 0.05);
    const auto mm = metrics(multi, 0.05);
    o.require(mm.peak_abs_df_hz <= ms.peak_abs_df_hz, "multi-stage peak |df| above single-stage");
    o.require(mm.oscillation_energy < ms.oscillation_energy, "multi-stage oscillation energy not lower");
    const auto iv = stage_intervals(multi);
    o.require(iv.size() == 3, "expected three stage insertions, got " + std::to_string(iv.size()));
    double longest = 0.0;
    if (!iv.empty()) {
        const double first_insert = std::min_element(iv.begin(), iv.end())->first;
        for (const auto& [on, off] : iv) longest = std::max(longest, off - first_insert);
    }
    o.require(longest <= 0.85 + 1e-9, "a stage stays on " + num(longest) + " s after insertion");
    o.require(longest <= 1.0 + 1e-9, "a stage exceeds the 1.0 s cap");
    o.note("peak |df| multi " + num(mm.peak_abs_df_hz, 4) + " <= single " + num(ms.peak_abs_df_hz, 4) +
           " Hz; oscillation energy multi " + num(mm.oscillation_energy, 4) + " < single " +
           num(ms.oscillation_energy, 4) + " Hz^2 s; last stage off " + num(longest, 4) + " s after insertion");
    return o;
}

Outcome criterion_7() {
    Outcome o;
    const auto scr = default_eigen_scr();
    auto brakes = default_eigen_brake_mw();
    const auto t0 = Clock::now();
    const auto pts = eigen_sweep(builtin("fig5_eigen_sweep"), scr, brakes);
    const double elapsed = seconds_since(t0);
    std::map<std::pair<double, double>, double> dom;
    for (const auto& p : pts) {
        o.require(p.error.empty(), "point failed: " + p.error);
        o.require(p.stable, "unstable point at SCR " + num(p.scr) + ", " + num(p.brake_mw) + " MW");
        dom[{p.scr, p.brake_mw}] = p.dominant.real();
    }
    const double weak = *std::min_element(scr.begin(), scr.end());
    const double strong = *std::max_element(scr.begin(), scr.end());
    for (double b : brakes) {
        o.require(dom[{strong, b}] < dom[{weak, b}], "SCR " + num(strong) + " not left of SCR " + num(weak) +
                                                        " at " + num(b) + " MW");
    }
    std::sort(brakes.begin(), brakes.end());
    for (std::size_t k = 1; k < brakes.size(); ++k) {
        o.require(dom[{weak, brakes[k - 1]}] >= dom[{weak, brakes[k]}],
                  "dominant Re decreases with smaller brake at " + num(brakes[k - 1]) + " MW");
    }
    o.require(elapsed < 30.0, "runtime " + num(elapsed) + " s");
    o.note(std::to_string(pts.size()) + " points stable; dominant Re at SCR " + num(weak) + " from " +
           num(dom[{weak, brakes.front()}], 8) + " (" + num(brakes.front()) + " MW) to " +
           num(dom[{weak, brakes.back()}], 8) + " (" + num(brakes.back()) + " MW); runtime " + num(elapsed, 3) + " s");
    return o;
}

Outcome criterion_8() {
    Outcome o;
    const auto tr = run(builtin("fig6_motor_dip"));
    o.require(!tr.failed, "run failed: " + tr.failure);
    const auto r = assess_motor_ride_through(tr, 0.01);
    o.require(r.recovered_after_s.has_value() && *r.recovered_after_s <= 2.0, "slip did not return within 2 s");
    o.require(!r.stalled, "motor stalled");
    o.note("pre-dip slip " + num(r.pre_event_slip, 4) + ", max " + num(r.max_slip, 4) + ", back within 0.01 after " +
           (r.recovered_after_s ? num(*r.recovered_after_s, 4) : std::string("never")) + " s");
    return o;
}

Outcome criterion_9() {
    Outcome o;
    double worst = 0.0;
    for (const auto& s : builtin_scenarios()) {
        const auto tr = run(s);
        o.require(!tr.failed, s.name + " failed");
        double thermal = 0.0;
        for (const auto& st : tr.stages) thermal += st.thermal_energy_mj;
        const double integrated = trace_brake_energy_mj(tr);
        const double rel = std::abs(thermal - integrated) / std::max(1e-9, std::max(std::abs(thermal), std::abs(integrated)));
        if (thermal == 0.0 && integrated == 0.0) continue;
        worst = std::max(worst, rel);
        o.require(rel <= 1e-3, s.name + " thermal " + num(thermal) + " vs trace " + num(integrated));
        if (s.name == "fig4_multi_stage") {
            const double e1 = tr.stages.at(0).thermal_energy_mj;
            const double e3 = tr.stages.at(2).thermal_energy_mj;
            o.require(std::abs(e1 - 13.0) <= 0.05 * 13.0, "stage 1 " + num(e1) + " MJ");
            o.require(std::abs(e3 - 93.5) <= 0.05 * 93.5, "stage 3 " + num(e3) + " MJ");
            o.note("stage 1 " + num(e1, 4) + " MJ, stage 3 " + num(e3, 4) + " MJ");
        }
    }
    o.note("worst thermal vs trace mismatch " + num(worst * 100.0, 3) + " %");
    return o;
}

Outcome criterion_10() {
    Outcome o;
    double worst = 0.0;
    std::string worst_name;
    for (const auto& s : builtin_scenarios()) {
        std::ostringstream a, b;
        const auto ta = run(s);
        const auto tb = run(s);
        write_trace_csv(a, ta);
        write_events_csv(a, ta);
        write_trace_csv(b, tb);
        write_events_csv(b, tb);
        o.require(a.str() == b.str(), s.name + " reruns differ");

        auto half = s;
        half.simulation.dt_s = s.simulation.dt_s / 2.0;
        const auto th = run(half);
        o.require(!ta.failed && !th.failed, s.name + " failed");
        const double p1 = metrics(ta, s.simulation.frequency_band_hz).peak_abs_df_hz;
        const double p2 = metrics(th, s.simulation.frequency_band_hz).peak_abs_df_hz;
        const double rel = std::abs(p1 - p2) / std::max(p1, 1e-12);
        if (rel > worst) {
            worst = rel;
            worst_name = s.name;
        }
        o.require(rel < 5e-3, s.name + " dt halving changes peak |df| by " + num(rel * 100.0) + " %");
    }
    o.note("reruns byte-identical; largest dt-halving change " + num(worst * 100.0, 3) + " % (" + worst_name + ")");
    return o;
}

Outcome criterion_11() {
    Outcome o;
    // allocate_stages minimality by brute force
    int checked = 0;
    for (int total = 10; total <= 1000; total += 10) {
        for (int step = 10; step <= 1000; step += 10) {
            const auto st = swing::allocate_stages(total, step);
            int k_min = 0;
            for (int k = 1; k <= 100 && k_min == 0; ++k) {
                if (k * step >= total) k_min = k;
            }
            const double sum = std::accumulate(st.begin(), st.end(), 0.0);
            const bool ok = static_cast<int>(st.size()) == k_min && std::abs(sum - total) < 1e-9 &&
                            std::all_of(st.begin(), st.end(), [&](double x) { return x > 0.0 && x <= step; });
            if (!ok) o.require(false, "allocate_stages(" + std::to_string(total) + ", " + std::to_string(step) + ")");
            ++checked;
        }
    }

    // relay decisions against hand-stepped traces
    const VoltageRelay relay;
    auto history = [](double start, double width, double low) {
        std::vector<VoltageSample> h;
        for (int k = 0; k <= 1000; ++k) {
            const double t = k * 1e-3;
            h.push_back({t, (t >= start - 1e-12 && t < start + width - 1e-12) ? low : 1.0});
        }
        return h;
    };
    const auto deep = relay_evaluate(relay, history(0.1, 0.5, 0.5));
    o.require(deep.has_value() && std::abs(deep->time - (0.1 + 0.02 + 1.0 / 60.0)) < 1e-9, "deep sag trip time");
    o.require(!relay_evaluate(relay, history(0.1, 0.005, 0.5)), "5 ms sag tripped");
    o.require(!relay_evaluate(relay, history(0.0, 0.0, 1.0)), "nominal voltage tripped");

    // conjugate closure and the analytic one-machine eigenvalue
    for (const auto& p : eigen_sweep(builtin("fig5_eigen_sweep"), {2.0, 5.0}, {125.0, 370.0})) {
        for (const auto& l : p.eigenvalues) {
            if (std::abs(l.imag()) < 1e-12) continue;
            const bool closed = std::any_of(p.eigenvalues.begin(), p.eigenvalues.end(),
                                            [&](const auto& m) { return std::abs(m - std::conj(l)) < 1e-9; });
            if (!closed) o.require(false, "spectrum not conjugate-closed at SCR " + num(p.scr));
        }
    }
    ReducedCase c;
    auto s = reduced_swing_scenario(c);
    s.events.load_steps.clear();
    s.brake.schedule.stages.clear();
    const auto lm = linearize(s);
    const double expect = -c.d_pu / (2.0 * c.h_s);
    o.require(lm.a.rows() == 1 && std::abs(lm.a(0, 0) - expect) < 1e-6 * std::abs(expect),
              "one-machine eigenvalue " + num(lm.a(0, 0)));
    o.note(std::to_string(checked) + " allocations minimal; relay trips at " + (deep ? num(deep->time, 6) : "-") +
           " s; one-machine eigenvalue " + num(lm.a(0, 0), 8) + " vs " + num(expect, 8));
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, criterion_1}, {2, criterion_2}, {3, criterion_3},   {4, criterion_4},
        {5, criterion_5}, {6, criterion_6}, {7, criterion_7},   {8, criterion_8},
        {9, criterion_9}, {10, criterion_10}, {11, criterion_11},
    };
    int failures = 0;
    for (const auto& [id, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failures;
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
