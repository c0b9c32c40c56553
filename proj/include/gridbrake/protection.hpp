#pragma once

// Data-center load cluster, ITIC-style voltage relays and load-loss logic.

#include "gridbrake/units.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gridbrake {

/// Voltage outside `threshold_pu` (below for undervoltage, above for
/// overvoltage) for longer than `max_dwell_s` trips the relay.
struct EnvelopeSegment {
    double threshold_pu = 0.0;
    double max_dwell_s = 0.0;
    bool operator==(const EnvelopeSegment&) const = default;
};

struct VoltageRelay {
    std::vector<EnvelopeSegment> undervoltage{{0.70, 0.02}, {0.80, 0.5}, {0.90, 10.0}};
    std::vector<EnvelopeSegment> overvoltage{{1.20, 0.5}};
    double pickup_cycles = 1.0;
    bool enabled = true;

    void validate() const;
    bool operator==(const VoltageRelay&) const = default;
};

struct VoltageSample {
    double t = 0.0;
    double v = 1.0;
};

struct RelayTrip {
    double time = 0.0;            ///< violation start + dwell + pickup delay
    double violation_start = 0.0;
    EnvelopeSegment segment;
    bool undervoltage = true;
};

/// Online envelope tracker fed one sample per integration step.
class RelayMonitor {
public:
    RelayMonitor(VoltageRelay relay, double f_nominal_hz);

    /// Returns the trip the first time the envelope is violated.
    std::optional<RelayTrip> update(double t, double v);
    const std::optional<RelayTrip>& trip() const { return trip_; }

private:
    VoltageRelay relay_;
    double pickup_s_;
    std::vector<std::optional<double>> under_start_;
    std::vector<std::optional<double>> over_start_;
    std::optional<RelayTrip> trip_;
};

/// Replays a time-ordered voltage history through the relay. Empty history
/// yields no decision.
std::optional<RelayTrip> relay_evaluate(const VoltageRelay& relay, std::span<const VoltageSample> history,
                                        double f_nominal_hz = 60.0);

struct DataCenterBuilding {
    std::string name;
    double rated_mw = 200.0;
    double it_fraction = 0.5;
    double motor_fraction = 0.6;   ///< share of the non-IT load
    double static_fraction = 0.4;  ///< share of the non-IT load
    VoltageRelay relay;
    std::string served_by;

    double it_mw() const { return rated_mw * it_fraction; }
    double motor_mw() const { return rated_mw * (1.0 - it_fraction) * motor_fraction; }
    double static_mw() const { return rated_mw * (1.0 - it_fraction) * static_fraction; }
    void validate() const;
};

enum class LoadTransfer { ItOnly, WholeBuilding };

struct LoadStepEvent {
    double time = 0.0;
    double delta_p_mw = 0.0;
    LoadTransfer transfer = LoadTransfer::ItOnly;
    std::vector<std::size_t> buildings;

    double delta_p_pu(const SystemBase& base) const { return to_pu(delta_p_mw, base); }
};

struct PlantFault {
    std::size_t building = 0;
    double time = 0.0;
};

struct GridVoltageExcursion {
    std::vector<VoltageSample> history;
};

using Disturbance = std::variant<PlantFault, GridVoltageExcursion>;

/// Grid-side load lost for a disturbance: a plant fault transfers the whole
/// building, a grid excursion transfers the IT share of every building whose
/// relay trips on the history.
LoadStepEvent scenario_load_loss(std::span<const DataCenterBuilding> cluster, const Disturbance& disturbance,
                                 double f_nominal_hz = 60.0);

/// Connection status of each building's load classes.
struct ClusterLoadState {
    std::vector<double> it_online_mw;
    std::vector<double> motor_online_mw;
    std::vector<double> static_online_mw;

    static ClusterLoadState from(std::span<const DataCenterBuilding> cluster);
    double grid_demand_mw() const;
    double it_mw() const;
};

/// Removes the event's load from grid-side demand. Throws ConfigError when the
/// event sheds more than is connected.
ClusterLoadState apply_load_step(const ClusterLoadState& state, const LoadStepEvent& event);

}  // namespace gridbrake
