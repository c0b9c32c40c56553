#include "gridbrake/engine.hpp"

#include "gridbrake/error.hpp"
#include "gridbrake/parallel.hpp"
#include "gridbrake/system.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <thread>

namespace gridbrake {

std::vector<std::string> trace_channels(const Scenario& scenario) {
    std::vector<std::string> c{"freq_hz",    "sg_p_pu",      "sg_q_pu",   "sg_omega_pu", "sg_pm_pu",
                               "gfm_p_pu",   "gfm_q_pu",     "gfm_i_pu",  "gfm_omega_pu", "v_pcc_pu",
                               "grid_p_pu",  "load_p_pu",    "brake_p_pu", "motor_slip",  "balance_pu"};
    for (const auto& bus : scenario.topology.buses) {
        if (bus != "pcc") c.push_back("v_" + bus + "_pu");
    }
    for (const auto& st : scenario.brake.schedule.stages) {
        c.push_back("brake_" + st.name + "_closed");
        c.push_back("brake_" + st.name + "_p_pu");
    }
    for (const auto& cap : scenario.topology.capacitors) c.push_back("cap_" + cap.name + "_closed");
    return c;
}

bool SimTrace::has_channel(const std::string& name) const {
    return std::find(channel_names.begin(), channel_names.end(), name) != channel_names.end();
}

const std::vector<double>& SimTrace::channel(const std::string& name) const {
    auto it = std::find(channel_names.begin(), channel_names.end(), name);
    if (it == channel_names.end()) throw ConfigError("trace has no channel '" + name + "'");
    return channels[static_cast<std::size_t>(std::distance(channel_names.begin(), it))];
}

namespace {

constexpr double kEps = 1e-9;

std::string fmt(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// First grid index at or after `t`.
std::size_t grid_index(double t, double dt) {
    const double k = std::ceil(t / dt - kEps);
    return static_cast<std::size_t>(std::max(0.0, k));
}

bool on_grid(double t, double dt) {
    return std::abs(static_cast<double>(grid_index(t, dt)) * dt - t) <= kEps * std::max(1.0, std::abs(t));
}

std::vector<std::string> channel_layout(const SystemModel& model, std::vector<std::size_t>& bus_channels) {
    const auto& buses = model.scenario().topology.buses;
    for (std::size_t b = 0; b < buses.size(); ++b) {
        if (buses[b] != "pcc") bus_channels.push_back(b);
    }
    return trace_channels(model.scenario());
}

void record(SimTrace& tr, double t, const Observation& o, const std::vector<std::size_t>& bus_channels) {
    tr.time.push_back(t);
    std::size_t c = 0;
    auto put = [&](double v) { tr.channels[c++].push_back(v); };
    put(o.freq_hz);
    put(o.sg_p_pu);
    put(o.sg_q_pu);
    put(o.sg_omega_pu);
    put(o.sg_pm_pu);
    put(o.gfm_p_pu);
    put(o.gfm_q_pu);
    put(o.gfm_i_pu);
    put(o.gfm_omega_pu);
    put(o.v_pcc_pu);
    put(o.grid_p_pu);
    put(o.load_p_pu);
    put(o.brake_p_pu);
    put(o.motor_slip);
    put(o.generation_p_pu - o.load_p_pu - o.brake_p_pu - o.line_loss_pu);
    for (std::size_t b : bus_channels) put(o.bus_v_pu[b]);
    for (std::size_t k = 0; k < o.stage_p_pu.size(); ++k) {
        put(o.stage_closed[k] ? 1.0 : 0.0);
        put(o.stage_p_pu[k]);
    }
    for (bool closed : o.capacitor_closed) put(closed ? 1.0 : 0.0);
}

}  // namespace

OperatingPoint find_equilibrium(const Scenario& scenario) {
    SystemModel model(scenario);
    OperatingPoint op;
    op.x = model.initialize();
    op.state_names = model.state_names();
    std::vector<Complex> warm;
    const NetworkSolution net = model.solve_network(op.x, warm);
    std::vector<double> dx(op.x.size());
    model.derivatives(op.x, net, dx);
    for (double d : dx) op.max_derivative = std::max(op.max_derivative, std::abs(d));
    op.network_residual = net.residual;
    const Observation o = model.observe(op.x, net);
    op.bus_v_pu = o.bus_v_pu;
    op.sg_p_pu = o.sg_p_pu;
    op.gfm_p_pu = o.gfm_p_pu;
    op.grid_p_pu = o.grid_p_pu;
    op.load_p_pu = o.load_p_pu;
    op.line_loss_pu = o.line_loss_pu;
    return op;
}

SimTrace run(const Scenario& scenario) {
    SystemModel model(scenario);
    const auto& sc = model.scenario();
    const double dt = sc.simulation.dt_s;
    const double fn = sc.base.f_nominal_hz;
    const auto steps = static_cast<std::size_t>(std::llround(sc.simulation.horizon_s / dt));

    SimTrace tr;
    tr.scenario_name = sc.name;
    tr.f_nominal_hz = fn;
    tr.s_base_mva = sc.base.s_base_mva;
    tr.dt_s = dt;
    std::vector<std::size_t> bus_channels;
    tr.channel_names = channel_layout(model, bus_channels);
    tr.channels.assign(tr.channel_names.size(), {});
    tr.channels.front().reserve(steps + 1);
    tr.time.reserve(steps + 1);
    tr.state_names = model.state_names();
    tr.motor_pullout_slip = model.motor_pullout_slip();

    std::vector<double> x = model.initialize();
    if (auto o = model.sg_offset()) x[*o + 1] += sc.generation.sg_initial_speed_pu;
    tr.initial_state = x;

    auto log = [&](double t, std::string kind, std::string detail) {
        tr.events.push_back({t, std::move(kind), std::move(detail)});
    };
    auto note_snap = [&](double requested, const std::string& what) {
        if (!on_grid(requested, dt)) {
            log(static_cast<double>(grid_index(requested, dt)) * dt, "event_snapped",
                what + " requested at " + fmt(requested) + " s applied at the next grid point");
        }
    };

    // Scripted events by grid index.
    std::multimap<std::size_t, const LoadStepSpec*> load_steps;
    for (const auto& e : sc.events.load_steps) {
        load_steps.emplace(grid_index(e.time_s, dt), &e);
        note_snap(e.time_s, "load step");
    }
    std::multimap<std::size_t, const ShuntSwitchSpec*> switches;
    for (const auto& e : sc.events.shunt_switches) {
        switches.emplace(grid_index(e.time_s, dt), &e);
        note_snap(e.time_s, "shunt switch " + e.element);
    }
    std::multimap<std::size_t, std::pair<const VoltageDipSpec*, bool>> dips;
    for (const auto& e : sc.events.voltage_dips) {
        dips.emplace(grid_index(e.start_s, dt), std::make_pair(&e, true));
        dips.emplace(grid_index(e.start_s + e.duration_s, dt), std::make_pair(&e, false));
        note_snap(e.start_s, "voltage dip start");
        note_snap(e.start_s + e.duration_s, "voltage dip end");
    }

    BrakeController controller(sc.brake.schedule);
    std::optional<double> anchor;
    std::vector<RelayMonitor> relays;
    for (const auto& b : model.buildings()) relays.emplace_back(b.relay, fn);
    std::vector<bool> relay_handled(relays.size(), false);
    std::vector<BrakeStage> stages = sc.brake.schedule.stages;
    std::vector<bool> thermal_logged(stages.size(), false);
    const std::size_t cluster_bus = sc.cluster.building_count > 0 ? *sc.bus_index(sc.cluster.bus) : 0;

    auto shed = [&](double t, const LoadStepEvent& ev, const std::string& why) {
        if (ev.delta_p_mw <= 0.0) return;
        model.set_loads(apply_load_step(model.loads(), ev));
        std::ostringstream os;
        os << why << ": " << fmt(ev.delta_p_mw) << " MW";
        log(t, "load_step", os.str());
        if (!anchor) anchor = t;
    };

    std::vector<Complex> warm;
    std::vector<double> k1(x.size()), k2(x.size()), k3(x.size()), k4(x.size()), xs(x.size());
    std::vector<double> p1, p2, p3, p4;

    auto evaluate = [&](const std::vector<double>& state, std::vector<double>& d, std::vector<double>& sp,
                        const NetworkSolution* reuse) {
        NetworkSolution net = reuse ? *reuse : model.solve_network(state, warm);
        model.derivatives(state, net, d);
        sp.assign(model.brake_stage_count(), 0.0);
        for (std::size_t k = 0; k < sp.size(); ++k) {
            const auto& sh = model.shunts()[model.brake_shunt(k)];
            if (sh.closed()) sp[k] = std::norm(net.v[sh.bus()]) * sh.admittance().real();
        }
    };

    try {
        for (std::size_t k = 0; k <= steps; ++k) {
            const double t = static_cast<double>(k) * dt;

            for (auto [it, end] = load_steps.equal_range(k); it != end; ++it) {
                const LoadStepSpec& spec = *it->second;
                LoadStepEvent ev;
                ev.time = t;
                std::vector<std::size_t> targets;
                if (spec.buildings.empty()) {
                    for (std::size_t b = 0; b < model.buildings().size(); ++b) targets.push_back(b);
                } else {
                    for (int b : spec.buildings) targets.push_back(static_cast<std::size_t>(b));
                }
                ev.buildings = targets;
                const auto& ld = model.loads();
                if (spec.kind == LoadStepKind::PlantFault) {
                    ev.transfer = LoadTransfer::WholeBuilding;
                    for (auto b : targets) ev.delta_p_mw += ld.it_online_mw[b] + ld.motor_online_mw[b] + ld.static_online_mw[b];
                    shed(t, ev, "plant fault at " + model.buildings()[targets.front()].name);
                } else {
                    ev.transfer = LoadTransfer::ItOnly;
                    for (auto b : targets) ev.delta_p_mw += ld.it_online_mw[b];
                    shed(t, ev, "IT load transferred to UPS");
                }
            }

            for (std::size_t b = 0; b < relays.size(); ++b) {
                const auto& trip = relays[b].trip();
                if (!trip || relay_handled[b] || trip->time > t + kEps) continue;
                relay_handled[b] = true;
                std::ostringstream os;
                os << model.buildings()[b].name << (trip->undervoltage ? " undervoltage" : " overvoltage")
                   << " segment " << fmt(trip->segment.threshold_pu) << " pu, violation from "
                   << fmt(trip->violation_start) << " s, trip " << fmt(trip->time) << " s";
                log(t, "relay_trip", os.str());
                LoadStepEvent ev;
                ev.time = t;
                ev.buildings = {b};
                ev.delta_p_mw = model.loads().it_online_mw[b];
                shed(t, ev, model.buildings()[b].name + " IT load transferred by relay");
            }

            std::vector<ShuntLogEntry> shunt_log;
            for (auto [it, end] = switches.equal_range(k); it != end; ++it) {
                const auto& s = *it->second;
                const auto idx = model.shunt_index(s.element);
                model.shunts()[*idx].command(s.command, t, s.delay_s, &shunt_log);
            }
            for (const auto& cmd : controller.step(t, anchor)) {
                auto& sh = model.shunts()[model.brake_shunt(cmd.stage)];
                sh.command(cmd.command, cmd.time, cmd.delay, &shunt_log);
                note_snap(cmd.time + cmd.delay, "breaker " + sh.name());
            }
            for (auto& e : shunt_log) log(t, std::move(e.kind), std::move(e.detail));

            for (auto [it, end] = dips.equal_range(k); it != end; ++it) {
                const auto& [spec, starting] = it->second;
                const std::size_t bus = *sc.bus_index(spec->bus);
                if (starting) {
                    Complex v = warm.size() > bus ? warm[bus] : Complex(1.0, 0.0);
                    if (std::abs(v) < 1e-12) v = 1.0;
                    model.set_voltage_override(std::make_pair(bus, v / std::abs(v) * spec->magnitude_pu));
                    log(t, "voltage_dip_start", spec->bus + " held at " + fmt(spec->magnitude_pu) + " pu");
                } else {
                    model.set_voltage_override(std::nullopt);
                    log(t, "voltage_dip_end", spec->bus + " released");
                }
            }

            bool changed = false;
            for (auto& sh : model.shunts()) {
                for (const auto& tr_applied : sh.advance(t)) {
                    changed = true;
                    log(t, tr_applied.closed ? "breaker_closed" : "breaker_opened", sh.name());
                }
            }
            if (changed) model.invalidate();

            const NetworkSolution net = model.solve_network(x, warm);
            const Observation obs = model.observe(x, net);
            record(tr, t, obs, bus_channels);

            if (!relays.empty()) {
                const double vc = std::abs(net.v[cluster_bus]);
                for (std::size_t b = 0; b < relays.size(); ++b) {
                    if (model.buildings()[b].relay.enabled && model.loads().it_online_mw[b] > 0.0) relays[b].update(t, vc);
                }
            }
            if (k == steps) break;

            // RK4 with discrete state held over the step.
            evaluate(x, k1, p1, &net);
            for (std::size_t i = 0; i < x.size(); ++i) xs[i] = x[i] + 0.5 * dt * k1[i];
            evaluate(xs, k2, p2, nullptr);
            for (std::size_t i = 0; i < x.size(); ++i) xs[i] = x[i] + 0.5 * dt * k2[i];
            evaluate(xs, k3, p3, nullptr);
            for (std::size_t i = 0; i < x.size(); ++i) xs[i] = x[i] + dt * k3[i];
            evaluate(xs, k4, p4, nullptr);
            for (std::size_t i = 0; i < x.size(); ++i) {
                x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                if (!std::isfinite(x[i])) throw NumericError("state " + tr.state_names[i] + " became non-finite");
            }
            for (std::size_t s = 0; s < stages.size(); ++s) {
                const bool conducting = model.shunts()[model.brake_shunt(s)].closed();
                if (!conducting) continue;
                const double p = (p1[s] + 2.0 * p2[s] + 2.0 * p3[s] + p4[s]) / 6.0;
                step_thermal(stages[s], p, dt, sc.base, true);
                if (stages[s].thermal_violation && !thermal_logged[s]) {
                    thermal_logged[s] = true;
                    log(t + dt, "thermal_violation", stages[s].name + " exceeded " +
                                                       fmt(stages[s].effective_thermal_limit_mj()) + " MJ");
                }
            }
        }
    } catch (const NumericError& e) {
        tr.failed = true;
        tr.failure = e.what();
        log(tr.time.empty() ? 0.0 : tr.time.back(), "run_failed", e.what());
    }

    tr.final_state = x;
    tr.stages = stages;
    tr.brake_commands = controller.log();
    for (auto& w : controller.end_of_run_warnings()) {
        if (w.find("thermal") == std::string::npos) log(tr.time.empty() ? 0.0 : tr.time.back(), "brake_warning", w);
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double trace_brake_energy_mj(const SimTrace& trace) {
    if (trace.size() < 2) return 0.0;
    const auto& p = trace.channel("brake_p_pu");
    double e = 0.0;
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) e += p[k] * (trace.time[k + 1] - trace.time[k]);
    return e * trace.s_base_mva;
}

TraceMetrics metrics(const SimTrace& trace, double band_hz) {
    if (trace.size() < 3) throw DomainError("metrics: trace needs at least 3 samples");
    if (!(band_hz > 0.0)) throw DomainError("metrics: band must be > 0");
    const auto& t = trace.time;
    const auto& f = trace.channel("freq_hz");
    const double fn = trace.f_nominal_hz;
    const std::size_t n = t.size();
    TraceMetrics m;

    if (trace.has_channel("sg_p_pu")) {
        const auto& p = trace.channel("sg_p_pu");
        m.peak_sg_p_pu = *std::max_element(p.begin(), p.end());
    }
    m.peak_freq_hz = *std::max_element(f.begin(), f.end());
    for (std::size_t k = 0; k < n; ++k) m.peak_abs_df_hz = std::max(m.peak_abs_df_hz, std::abs(f[k] - fn));
    for (std::size_t k = 1; k + 1 < n; ++k) {
        m.max_rocof_hz_per_s = std::max(m.max_rocof_hz_per_s, std::abs(f[k + 1] - f[k - 1]) / (t[k + 1] - t[k - 1]));
    }

    std::size_t ref = 0;
    for (std::size_t c = 0; c < trace.channel_names.size(); ++c) {
        const auto& name = trace.channel_names[c];
        if (name.rfind("brake_", 0) != 0 || name.size() < 7 || name.substr(name.size() - 7) != "_closed") continue;
        const auto& s = trace.channels[c];
        for (std::size_t k = 1; k < n; ++k) {
            if (s[k - 1] > 0.5 && s[k] < 0.5) ref = std::max(ref, k);
        }
    }
    m.reference_time_s = t[ref];

    std::optional<std::size_t> last_out;
    for (std::size_t k = ref; k < n; ++k) {
        if (std::abs(f[k] - fn) > band_hz) last_out = k;
    }
    if (!last_out) {
        m.settling_time_s = 0.0;
    } else if (*last_out + 1 < n) {
        m.settling_time_s = t[*last_out + 1] - t[ref];
    }

    for (std::size_t k = ref; k + 1 < n; ++k) {
        const double a = f[k] - fn;
        const double b = f[k + 1] - fn;
        m.oscillation_energy += 0.5 * (a * a + b * b) * (t[k + 1] - t[k]);
    }

    const double window_start = t.back() - 2.0;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (t[k] >= window_start - kEps) {
            acc += std::abs(f[k] - fn);
            ++count;
        }
    }
    m.sustained_deviation_hz = count ? acc / static_cast<double>(count) : 0.0;
    m.brake_energy_mj = trace.has_channel("brake_p_pu") ? trace_brake_energy_mj(trace) : 0.0;
    return m;
}

MotorRideThrough assess_motor_ride_through(const SimTrace& trace, double band) {
    if (trace.size() < 2) throw DomainError("ride-through: trace too short");
    const auto& t = trace.time;
    const auto& s = trace.channel("motor_slip");
    double event_start = 0.0;
    double recovery = 0.0;
    for (const auto& e : trace.events) {
        if (e.kind == "voltage_dip_start") event_start = e.time;
        if (e.kind == "voltage_dip_end") recovery = e.time;
    }
    if (recovery == 0.0) {
        for (const auto& e : trace.events) {
            if (e.kind == "load_step") event_start = recovery = e.time;
        }
    }
    MotorRideThrough r;
    r.recovery_start_s = recovery;
    std::size_t pre = 0;
    while (pre + 1 < t.size() && t[pre + 1] < event_start - kEps) ++pre;
    r.pre_event_slip = s[pre];
    r.max_slip = *std::max_element(s.begin(), s.end());
    r.final_slip = s.back();

    std::optional<std::size_t> last_out;
    std::size_t first_after = 0;
    while (first_after < t.size() && t[first_after] < recovery - kEps) ++first_after;
    for (std::size_t k = first_after; k < t.size(); ++k) {
        if (std::abs(s[k] - r.pre_event_slip) > band) last_out = k;
    }
    if (!last_out) {
        r.recovered_after_s = 0.0;
    } else if (*last_out + 1 < t.size()) {
        r.recovered_after_s = t[*last_out + 1] - recovery;
    }
    const std::size_t tail = t.size() - std::max<std::size_t>(1, t.size() / 10);
    const bool rising_at_end = s.back() > s[tail];
    r.stalled = r.final_slip >= trace.motor_pullout_slip || (!r.recovered_after_s && rising_at_end);
    return r;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

std::size_t default_workers() {
    if (const char* env = std::getenv("GRIDBRAKE_WORKERS")) {
        long v = 0;
        const std::string s(env);
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && p == s.data() + s.size() && v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

std::vector<Scenario> sweep_variants(const Scenario& tmpl, SweepAxis axis, const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep: at least one value is required");
    std::vector<Scenario> out;
    for (double v : values) {
        Scenario s = tmpl;
        switch (axis) {
        case SweepAxis::GenerationMix:
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("sweep: mix values are SG shares in [0, 1]");
            s.generation.sg_share = v;
            s.generation.gfm_share = 1.0 - v;
            s.name = tmpl.name + "_sg" + fmt(v);
            break;
        case SweepAxis::BrakeSize: {
            if (!(v >= 0.0)) throw ConfigError("sweep: brake sizes must be >= 0");
            BrakeStage st;
            if (!tmpl.brake.schedule.stages.empty()) {
                st = tmpl.brake.schedule.stages.front();
            } else {
                st.insert_command_s = 0.0;
                st.remove_command_s = 0.15;
            }
            st.name = "brake1";
            st.rating_mw = v;
            s.brake.schedule.stages.clear();
            if (v > 0.0) s.brake.schedule.stages.push_back(st);
            if (s.brake.bus.empty()) s.brake.bus = tmpl.topology.pcc_bus;
            s.name = tmpl.name + "_brake" + fmt(v);
            break;
        }
        case SweepAxis::Schedule:
            if (tmpl.brake.schedule.stages.empty()) throw ConfigError("sweep: schedule axis needs a brake stage");
            s.brake.schedule.stages.front().remove_command_s = v;
            s.name = tmpl.name + "_remove" + fmt(v);
            break;
        }
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SweepResult> sweep(const std::vector<Scenario>& variants, std::size_t workers) {
    if (variants.empty()) throw ConfigError("sweep: at least one variant is required");
    if (workers == 0) workers = default_workers();
    std::vector<SweepResult> results(variants.size());
    parallel_for(variants.size(), workers, [&](std::size_t i) {
        results[i].label = variants[i].name;
        try {
            const SimTrace tr = run(variants[i]);
            if (tr.failed) {
                results[i].error = tr.failure;
                return;
            }
            results[i].metrics = metrics(tr, variants[i].simulation.frequency_band_hz);
        } catch (const std::exception& e) {
            results[i].error = e.what();
        }
    });
    return results;
}

}  // namespace gridbrake
