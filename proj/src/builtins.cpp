#include "gridbrake/builtins.hpp"

#include "gridbrake/braking.hpp"

#include <cmath>

namespace gridbrake {

namespace {

constexpr double kLoadLossTime = 0.1;

/// Plant at the PCC of the default network: generation, five-building
/// cluster and brake bank share the bus; every building's IT load transfers
/// to UPS at `kLoadLossTime`.
Scenario plant(const std::string& name, const std::string& description, double scr, double total_mw,
               double sg_share) {
    Scenario s;
    s.name = name;
    s.description = description;
    s.topology = default_topology(scr);
    s.generation.total_mw = total_mw;
    s.generation.sg_share = sg_share;
    s.generation.gfm_share = 1.0 - sg_share;
    s.generation.sg_bus = "pcc";
    s.generation.gfm_bus = "pcc";
    s.cluster.bus = "pcc";
    s.brake.bus = "pcc";
    LoadStepSpec step;
    step.time_s = kLoadLossTime;
    s.events.load_steps.push_back(step);
    return s;
}

BrakeStage single_stage(double rating_mw, std::optional<double> remove_offset_s) {
    BrakeStage st;
    st.name = "brake1";
    st.rating_mw = rating_mw;
    st.insert_command_s = 0.0;
    st.insert_delay_s = 0.05;
    st.remove_command_s = remove_offset_s;
    return st;
}

Scenario fig2(const std::string& name, double brake_mw) {
    auto s = plant(name,
                   "500 MW synchronous plant on a grid of SCR 3 loses 500 MW of IT load at 0.1 s; brake " +
                       (brake_mw > 0.0 ? std::to_string(static_cast<int>(brake_mw)) + " MW until the 1 s cap" : std::string("none")),
                   3.0, 500.0, 1.0);
    if (brake_mw > 0.0) s.brake.schedule.stages.push_back(single_stage(brake_mw, std::nullopt));
    s.simulation.horizon_s = 5.0;
    s.outputs.channels = {"freq_hz", "sg_p_pu", "grid_p_pu", "v_pcc_pu", "brake_p_pu", "motor_slip"};
    return s;
}

Scenario fig3(const std::string& name, double sg_share) {
    const int sg = static_cast<int>(std::lround(sg_share * 100.0));
    auto s = plant(name,
                   "islanded 1000 MW plant, " + std::to_string(sg) + "/" + std::to_string(100 - sg) +
                       " SG/GFM, loses 500 MW of IT load at 0.1 s without braking",
                   2.0, 1000.0, sg_share);
    s.topology.grid.reset();
    s.simulation.horizon_s = 10.0;
    s.outputs.channels = {"freq_hz", "sg_p_pu", "gfm_p_pu", "v_pcc_pu", "motor_slip"};
    return s;
}

Scenario fig4(const std::string& name, bool multi) {
    auto s = plant(name,
                   multi ? "25/75 SG/GFM plant on a grid of SCR 3; 130/130/110 MW stages inserted 50 ms after the "
                           "load loss and removed in sequence"
                         : "25/75 SG/GFM plant on a grid of SCR 3; one 250 MW stage inserted 50 ms after the load "
                           "loss and removed at 0.25 s",
                   3.0, 500.0, 0.25);
    if (multi) {
        s.brake.schedule = reference_schedule_on_event(0.05);
    } else {
        s.brake.schedule.stages.push_back(single_stage(250.0, 0.15));
    }
    s.simulation.horizon_s = 10.0;
    s.outputs.channels = {"freq_hz", "sg_p_pu", "gfm_p_pu", "v_pcc_pu", "brake_p_pu", "motor_slip"};
    return s;
}

Scenario fig5() {
    auto s = plant("fig5_eigen_sweep",
                   "small-signal template: 1000 MW 25/75 SG/GFM plant after the IT load loss, brake conducting; "
                   "SCR and brake size are swept",
                   2.0, 1000.0, 0.25);
    s.simulation.horizon_s = 5.0;
    return s;
}

Scenario fig6() {
    auto s = plant("fig6_motor_dip",
                   "500 MW synchronous plant on a grid of SCR 2; PCC voltage held at 0.25 pu for 100 ms from 0.5 s, "
                   "IT load rides to UPS and the staged brake follows",
                   2.0, 500.0, 1.0);
    s.events.load_steps.clear();
    s.brake.schedule = reference_schedule_on_event(0.05);
    VoltageDipSpec dip;
    dip.bus = "pcc";
    dip.start_s = 0.5;
    dip.duration_s = 0.1;
    dip.magnitude_pu = 0.25;
    s.events.voltage_dips.push_back(dip);
    s.simulation.horizon_s = 5.0;
    s.outputs.channels = {"freq_hz", "sg_p_pu", "v_pcc_pu", "brake_p_pu", "motor_slip", "load_p_pu"};
    return s;
}

}  // namespace

std::vector<Scenario> builtin_scenarios() {
    return {
        fig2("fig2_no_brake", 0.0),
        fig2("fig2_brake_125", 125.0),
        fig2("fig2_brake_250", 250.0),
        fig3("fig3_mix_75sm", 0.75),
        fig3("fig3_mix_50sm", 0.5),
        fig3("fig3_mix_25sm", 0.25),
        fig4("fig4_single_stage", false),
        fig4("fig4_multi_stage", true),
        fig5(),
        fig6(),
    };
}

std::vector<std::string> builtin_names() {
    std::vector<std::string> out;
    for (const auto& s : builtin_scenarios()) out.push_back(s.name);
    return out;
}

std::optional<Scenario> builtin_scenario(const std::string& name) {
    for (auto& s : builtin_scenarios()) {
        if (s.name == name) return s;
    }
    return std::nullopt;
}

std::vector<double> default_eigen_scr() { return {2.0, 5.0}; }
std::vector<double> default_eigen_brake_mw() { return {50.0, 125.0, 250.0, 370.0, 500.0}; }

Scenario reduced_swing_scenario(const ReducedCase& c) {
    Scenario s;
    s.name = "reduced_swing";
    s.description = "one ideal-source machine, constant bus voltage, resistive load and brake";
    s.topology.buses = {"bus"};
    s.topology.pcc_bus = "bus";
    s.generation.total_mw = s.base.s_base_mva;
    s.generation.sg_bus = "bus";
    s.generation.sg_initial_speed_pu = c.initial_speed_pu;
    auto& sg = s.generation.sg;
    sg.r_a = 0.0;
    sg.x_a = 0.0;
    sg.h_s = c.h_s;
    sg.d = c.d_pu;
    sg.exciter.enabled = false;
    sg.governor.enabled = false;
    s.cluster.bus = "bus";
    s.cluster.building_count = 1;
    s.cluster.building_rated_mw = s.base.s_base_mva;
    s.cluster.it_fraction = c.delta_p_pu;
    s.cluster.motor_fraction = 0.0;
    s.cluster.relay.enabled = false;
    if (c.brake_pu > 0.0) {
        s.brake.bus = "bus";
        BrakeStage st;
        st.name = "brake1";
        st.rating_mw = c.brake_pu * s.base.s_base_mva;
        st.insert_delay_s = 0.0;
        st.thermal_limit_mj = 1e9;
        s.brake.schedule.stages.push_back(st);
        s.brake.schedule.max_insertion_s = c.horizon_s + 1.0;
    }
    s.events.load_steps.emplace_back();
    s.simulation.dt_s = c.dt_s;
    s.simulation.horizon_s = c.horizon_s;
    s.outputs.channels = {"freq_hz", "sg_omega_pu", "sg_p_pu", "brake_p_pu"};
    return s;
}

}  // namespace gridbrake
