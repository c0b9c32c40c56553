#include "gridbrake/scenario.hpp"

#include "gridbrake/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gridbrake {

std::vector<DataCenterBuilding> ClusterSpec::buildings() const {
    std::vector<DataCenterBuilding> out;
    for (int b = 0; b < building_count; ++b) {
        DataCenterBuilding dc;
        dc.name = "dc" + std::to_string(b + 1);
        dc.rated_mw = building_rated_mw;
        dc.it_fraction = it_fraction;
        dc.motor_fraction = motor_fraction;
        dc.static_fraction = 1.0 - motor_fraction;
        dc.relay = relay;
        dc.served_by = bus;
        out.push_back(std::move(dc));
    }
    return out;
}

std::optional<std::size_t> Scenario::bus_index(const std::string& bus) const {
    const auto& b = topology.buses;
    auto it = std::find(b.begin(), b.end(), bus);
    if (it == b.end()) return std::nullopt;
    return static_cast<std::size_t>(std::distance(b.begin(), it));
}

Topology default_topology(double scr) {
    Topology t;
    t.buses = {"grid", "pcc"};
    LineParams line;
    line.from = "grid";
    line.to = "pcc";
    t.lines.push_back(line);
    GridEquivalent g;
    g.bus = "grid";
    g.scr = scr;
    t.grid = g;
    t.pcc_bus = "pcc";
    return t;
}

void Scenario::validate() const {
    base.validate();
    auto require_bus = [&](const std::string& bus, const std::string& where) {
        if (!bus_index(bus)) throw ConfigError(where + ": unknown bus '" + bus + "'");
    };

    // topology
    if (topology.buses.empty()) throw ConfigError("topology.buses: at least one bus is required");
    std::set<std::string> seen(topology.buses.begin(), topology.buses.end());
    if (seen.size() != topology.buses.size()) throw ConfigError("topology.buses: duplicate bus name");
    for (const auto& l : topology.lines) {
        l.validate();
        require_bus(l.from, "topology.lines");
        require_bus(l.to, "topology.lines");
    }
    if (topology.grid) {
        topology.grid->validate();
        require_bus(topology.grid->bus, "topology.grid");
    }
    require_bus(topology.pcc_bus, "topology.pcc_bus");
    std::set<std::string> shunt_names;
    for (const auto& c : topology.capacitors) {
        require_bus(c.bus, "topology.capacitors");
        if (!(c.mvar >= 0.0)) throw ConfigError("topology.capacitors: mvar must be >= 0");
        if (!shunt_names.insert(c.name).second) throw ConfigError("duplicate shunt name '" + c.name + "'");
    }

    // generation
    const auto& g = generation;
    if (!(g.total_mw > 0.0)) throw ConfigError("generation.total_mw must be > 0");
    if (!(g.sg_share >= 0.0 && g.gfm_share >= 0.0))
        throw ConfigError("generation: shares must be >= 0");
    if (std::abs(g.sg_share + g.gfm_share - 1.0) > 1e-9)
        throw ConfigError("generation: sg_share + gfm_share must equal 1");
    if (g.has_sg()) {
        require_bus(g.sg_bus, "generation.sg_bus");
        SyncGenParams p = g.sg;
        p.rated_mw = g.sg_mw();
        p.validate();
    }
    if (g.has_gfm()) {
        require_bus(g.gfm_bus, "generation.gfm_bus");
        GfmParams p = g.gfm;
        p.rated_mw = g.gfm_mw();
        p.validate();
    }
    if (!(g.voltage_setpoint_pu > 0.0)) throw ConfigError("generation.voltage_setpoint_pu must be > 0");
    if (!(g.sg_dispatch_pu >= 0.0 && g.gfm_dispatch_pu >= 0.0))
        throw ConfigError("generation: dispatch must be >= 0");
    if (!std::isfinite(g.sg_initial_speed_pu)) throw ConfigError("generation.sg_initial_speed_pu must be finite");
    if (g.sg.ideal_source() && g.has_sg() && topology.grid && topology.grid->bus == g.sg_bus)
        throw ConfigError("generation: an ideal-source machine cannot share the grid equivalent's bus");

    // cluster
    if (cluster.building_count < 0) throw ConfigError("cluster.building_count must be >= 0");
    if (cluster.building_count > 0) {
        require_bus(cluster.bus, "cluster.bus");
        if (!(cluster.building_rated_mw > 0.0)) throw ConfigError("cluster.building_rated_mw must be > 0");
        for (const auto& b : cluster.buildings()) b.validate();
        if (!(cluster.it_power_factor > 0.0 && cluster.it_power_factor <= 1.0) ||
            !(cluster.static_power_factor > 0.0 && cluster.static_power_factor <= 1.0))
            throw ConfigError("cluster: power factors must lie in (0, 1]");
        if (!(cluster.load_v_min_pu > 0.0 && cluster.load_v_min_pu < 1.0))
            throw ConfigError("cluster.load_v_min_pu must lie in (0, 1)");
        if (cluster.motor_fraction > 0.0 && cluster.it_fraction < 1.0) cluster.motor.validate();
    }

    // brake
    if (!brake.schedule.stages.empty()) {
        require_bus(brake.bus, "brake.bus");
        brake.schedule.validate();
        for (const auto& s : brake.schedule.stages) {
            if (!shunt_names.insert(s.name).second) throw ConfigError("duplicate shunt name '" + s.name + "'");
        }
    }

    // events
    for (const auto& e : events.load_steps) {
        if (!(e.time_s >= 0.0)) throw ConfigError("events.load_steps: time_s must be >= 0");
        for (int b : e.buildings) {
            if (b < 0 || b >= cluster.building_count)
                throw ConfigError("events.load_steps: building index " + std::to_string(b) + " out of range");
        }
        if (e.kind == LoadStepKind::PlantFault && e.buildings.size() != 1)
            throw ConfigError("events.load_steps: plant_fault names exactly one building");
    }
    for (const auto& e : events.shunt_switches) {
        if (!(e.time_s >= 0.0) || !(e.delay_s >= 0.0))
            throw ConfigError("events.shunt_switches: times must be >= 0");
        if (!shunt_names.count(e.element))
            throw ConfigError("events.shunt_switches: unknown element '" + e.element + "'");
    }
    for (const auto& e : events.voltage_dips) {
        require_bus(e.bus, "events.voltage_dips");
        if (!(e.start_s >= 0.0 && e.duration_s > 0.0)) throw ConfigError("events.voltage_dips: bad timing");
        if (!(e.magnitude_pu >= 0.0)) throw ConfigError("events.voltage_dips: magnitude must be >= 0");
        if (g.has_sg() && g.sg.ideal_source() && e.bus == g.sg_bus)
            throw ConfigError("events.voltage_dips: cannot override the bus of an ideal-source machine");
    }

    // simulation
    if (!(simulation.dt_s > 0.0)) throw ConfigError("simulation.dt_s must be > 0");
    if (!(simulation.horizon_s > simulation.dt_s)) throw ConfigError("simulation.horizon_s must exceed dt_s");
    if (!(simulation.frequency_band_hz > 0.0)) throw ConfigError("simulation.frequency_band_hz must be > 0");
    if (!g.has_sg() && !g.has_gfm() && !topology.grid)
        throw ConfigError("scenario has no voltage source");
}

}  // namespace gridbrake
