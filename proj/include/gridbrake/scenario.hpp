#pragma once

// Declarative description of one simulation: network, generation, load
// cluster, brake bank, events and recording options.

#include "gridbrake/braking.hpp"
#include "gridbrake/models.hpp"
#include "gridbrake/network.hpp"
#include "gridbrake/protection.hpp"
#include "gridbrake/units.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gridbrake {

struct CapacitorSpec {
    std::string name;
    std::string bus;
    double mvar = 0.0;
    bool closed = true;
    bool operator==(const CapacitorSpec&) const = default;
};

struct Topology {
    std::vector<std::string> buses;
    std::vector<LineParams> lines;
    std::optional<GridEquivalent> grid;
    std::vector<CapacitorSpec> capacitors;
    std::string pcc_bus;
    bool operator==(const Topology&) const = default;
};

/// Aggregate generation at the plant: one synchronous machine and one
/// grid-forming inverter whose ratings split `total_mw` by share.
struct Generation {
    double total_mw = 1000.0;
    double sg_share = 1.0;
    double gfm_share = 0.0;
    std::string sg_bus;
    std::string gfm_bus;
    double sg_dispatch_pu = 1.0;   ///< initial output on the machine base
    double gfm_dispatch_pu = 1.0;
    double voltage_setpoint_pu = 1.0;
    double sg_initial_speed_pu = 0.0;  ///< speed perturbation applied at t = 0
    SyncGenParams sg;
    GfmParams gfm;

    double sg_mw() const { return total_mw * sg_share; }
    double gfm_mw() const { return total_mw * gfm_share; }
    bool has_sg() const { return sg_mw() > 0.0; }
    bool has_gfm() const { return gfm_mw() > 0.0; }
    bool operator==(const Generation&) const = default;
};

/// Identical buildings sharing one bus.
struct ClusterSpec {
    std::string bus;
    int building_count = 5;
    double building_rated_mw = 200.0;
    double it_fraction = 0.5;
    double motor_fraction = 0.6;
    double it_power_factor = 1.0;
    double static_power_factor = 1.0;
    double load_v_min_pu = 0.7;
    VoltageRelay relay;
    InductionMotorParams motor;  ///< rated_mw is taken from each building's motor share

    std::vector<DataCenterBuilding> buildings() const;
    double total_mw() const { return building_count * building_rated_mw; }
    bool operator==(const ClusterSpec&) const = default;
};

struct BrakeSpec {
    std::string bus;
    BrakeSchedule schedule;
    bool operator==(const BrakeSpec&) const = default;
};

enum class LoadStepKind { GridExcursion, PlantFault };

struct LoadStepSpec {
    double time_s = 0.0;
    LoadStepKind kind = LoadStepKind::GridExcursion;
    std::vector<int> buildings;  ///< empty = every building
    bool operator==(const LoadStepSpec&) const = default;
};

struct ShuntSwitchSpec {
    double time_s = 0.0;
    std::string element;  ///< capacitor or brake stage name
    BreakerCommand command = BreakerCommand::Open;
    double delay_s = 0.0;
    bool operator==(const ShuntSwitchSpec&) const = default;
};

struct VoltageDipSpec {
    std::string bus;
    double start_s = 0.0;
    double duration_s = 0.1;
    double magnitude_pu = 0.25;
    bool operator==(const VoltageDipSpec&) const = default;
};

struct Events {
    std::vector<LoadStepSpec> load_steps;
    std::vector<ShuntSwitchSpec> shunt_switches;
    std::vector<VoltageDipSpec> voltage_dips;
    bool operator==(const Events&) const = default;
};

struct SimulationSpec {
    double dt_s = 1e-3;
    double horizon_s = 5.0;
    double frequency_band_hz = 0.05;
    bool operator==(const SimulationSpec&) const = default;
};

struct OutputSpec {
    std::vector<std::string> channels{"freq_hz", "sg_p_pu", "gfm_p_pu", "v_pcc_pu", "brake_p_pu", "motor_slip"};
    bool plot = false;
    bool operator==(const OutputSpec&) const = default;
};

struct Scenario {
    std::string name;
    std::string description;
    SystemBase base;
    Topology topology;
    Generation generation;
    ClusterSpec cluster;
    BrakeSpec brake;
    Events events;
    SimulationSpec simulation;
    OutputSpec outputs;

    /// Checks every module-level invariant; throws ConfigError naming the field.
    void validate() const;
    std::optional<std::size_t> bus_index(const std::string& name) const;
    bool operator==(const Scenario&) const = default;
};

/// Default study network: grid equivalent - double-circuit line - PCC with
/// generation, brake bank and the five-building cluster.
Topology default_topology(double scr = 2.0);

}  // namespace gridbrake
