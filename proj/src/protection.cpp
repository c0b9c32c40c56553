#include "gridbrake/protection.hpp"

#include "gridbrake/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridbrake {

namespace {
constexpr double kTimeEps = 1e-9;
constexpr double kMwEps = 1e-9;
}  // namespace

void VoltageRelay::validate() const {
    for (std::size_t k = 0; k < undervoltage.size(); ++k) {
        if (!(undervoltage[k].max_dwell_s > 0.0)) throw ConfigError("relay: envelope dwell must be > 0");
        if (k > 0 && !(undervoltage[k].threshold_pu > undervoltage[k - 1].threshold_pu &&
                       undervoltage[k].max_dwell_s >= undervoltage[k - 1].max_dwell_s))
            throw ConfigError("relay: undervoltage envelope must be monotone");
    }
    for (std::size_t k = 0; k < overvoltage.size(); ++k) {
        if (!(overvoltage[k].max_dwell_s > 0.0)) throw ConfigError("relay: envelope dwell must be > 0");
        if (k > 0 && !(overvoltage[k].threshold_pu > overvoltage[k - 1].threshold_pu &&
                       overvoltage[k].max_dwell_s <= overvoltage[k - 1].max_dwell_s))
            throw ConfigError("relay: overvoltage envelope must be monotone");
    }
    if (!(pickup_cycles >= 0.0)) throw ConfigError("relay: pickup_cycles must be >= 0");
}

RelayMonitor::RelayMonitor(VoltageRelay relay, double f_nominal_hz)
    : relay_(std::move(relay)),
      pickup_s_(cycles_to_seconds(relay_.pickup_cycles, f_nominal_hz)),
      under_start_(relay_.undervoltage.size()),
      over_start_(relay_.overvoltage.size()) {}

std::optional<RelayTrip> RelayMonitor::update(double t, double v) {
    if (trip_ || !relay_.enabled) return std::nullopt;
    auto track = [&](const std::vector<EnvelopeSegment>& segs, std::vector<std::optional<double>>& starts,
                     bool under) -> std::optional<RelayTrip> {
        for (std::size_t k = 0; k < segs.size(); ++k) {
            const bool outside = under ? v < segs[k].threshold_pu : v > segs[k].threshold_pu;
            if (!outside) {
                starts[k].reset();
                continue;
            }
            if (!starts[k]) starts[k] = t;
            if (t - *starts[k] >= segs[k].max_dwell_s - kTimeEps) {
                return RelayTrip{*starts[k] + segs[k].max_dwell_s + pickup_s_, *starts[k], segs[k], under};
            }
        }
        return std::nullopt;
    };
    auto under = track(relay_.undervoltage, under_start_, true);
    auto over = track(relay_.overvoltage, over_start_, false);
    if (under && over) {
        trip_ = under->time <= over->time ? under : over;
    } else if (under) {
        trip_ = under;
    } else if (over) {
        trip_ = over;
    }
    return trip_;
}

std::optional<RelayTrip> relay_evaluate(const VoltageRelay& relay, std::span<const VoltageSample> history,
                                        double f_nominal_hz) {
    RelayMonitor monitor(relay, f_nominal_hz);
    for (const auto& s : history) {
        if (auto trip = monitor.update(s.t, s.v)) return trip;
    }
    return std::nullopt;
}

void DataCenterBuilding::validate() const {
    if (!(rated_mw > 0.0)) throw ConfigError("building " + name + ": rated_mw must be > 0");
    auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (!in_unit(it_fraction) || !in_unit(motor_fraction) || !in_unit(static_fraction))
        throw ConfigError("building " + name + ": fractions must lie in [0, 1]");
    if (std::abs(motor_fraction + static_fraction - 1.0) > 1e-9)
        throw ConfigError("building " + name + ": motor_fraction + static_fraction must equal 1");
    relay.validate();
}

LoadStepEvent scenario_load_loss(std::span<const DataCenterBuilding> cluster, const Disturbance& disturbance,
                                 double f_nominal_hz) {
    if (cluster.empty()) throw ConfigError("scenario_load_loss: cluster is empty");
    LoadStepEvent ev;
    if (const auto* fault = std::get_if<PlantFault>(&disturbance)) {
        if (fault->building >= cluster.size()) throw ConfigError("scenario_load_loss: unknown building");
        ev.time = fault->time;
        ev.transfer = LoadTransfer::WholeBuilding;
        ev.delta_p_mw = cluster[fault->building].rated_mw;
        ev.buildings = {fault->building};
        return ev;
    }
    const auto& excursion = std::get<GridVoltageExcursion>(disturbance);
    ev.transfer = LoadTransfer::ItOnly;
    std::optional<double> earliest;
    for (std::size_t b = 0; b < cluster.size(); ++b) {
        const auto trip = relay_evaluate(cluster[b].relay, excursion.history, f_nominal_hz);
        if (!trip) continue;
        ev.buildings.push_back(b);
        ev.delta_p_mw += cluster[b].it_mw();
        earliest = earliest ? std::min(*earliest, trip->time) : trip->time;
    }
    ev.time = earliest.value_or(excursion.history.empty() ? 0.0 : excursion.history.back().t);
    return ev;
}

ClusterLoadState ClusterLoadState::from(std::span<const DataCenterBuilding> cluster) {
    ClusterLoadState s;
    for (const auto& b : cluster) {
        s.it_online_mw.push_back(b.it_mw());
        s.motor_online_mw.push_back(b.motor_mw());
        s.static_online_mw.push_back(b.static_mw());
    }
    return s;
}

double ClusterLoadState::grid_demand_mw() const {
    return std::accumulate(it_online_mw.begin(), it_online_mw.end(), 0.0) +
           std::accumulate(motor_online_mw.begin(), motor_online_mw.end(), 0.0) +
           std::accumulate(static_online_mw.begin(), static_online_mw.end(), 0.0);
}

double ClusterLoadState::it_mw() const {
    return std::accumulate(it_online_mw.begin(), it_online_mw.end(), 0.0);
}

ClusterLoadState apply_load_step(const ClusterLoadState& state, const LoadStepEvent& event) {
    ClusterLoadState next = state;
    if (event.delta_p_mw < 0.0) throw ConfigError("load step: delta_p must be >= 0");
    if (event.delta_p_mw == 0.0) return next;
    double connected = 0.0;
    for (std::size_t b : event.buildings) {
        if (b >= state.it_online_mw.size()) throw ConfigError("load step: unknown building index");
        connected += state.it_online_mw[b];
        if (event.transfer == LoadTransfer::WholeBuilding)
            connected += state.motor_online_mw[b] + state.static_online_mw[b];
    }
    if (event.delta_p_mw > connected + kMwEps) {
        throw ConfigError("load step sheds " + std::to_string(event.delta_p_mw) + " MW but only " +
                          std::to_string(connected) + " MW is connected");
    }
    // Shed proportionally to what each affected building still has connected.
    const double share = connected > 0.0 ? event.delta_p_mw / connected : 0.0;
    for (std::size_t b : event.buildings) {
        next.it_online_mw[b] -= state.it_online_mw[b] * share;
        if (event.transfer == LoadTransfer::WholeBuilding) {
            next.motor_online_mw[b] -= state.motor_online_mw[b] * share;
            next.static_online_mw[b] -= state.static_online_mw[b] * share;
        }
        // clean up rounding residue
        for (double* x : {&next.it_online_mw[b], &next.motor_online_mw[b], &next.static_online_mw[b]}) {
            if (std::abs(*x) < kMwEps) *x = 0.0;
        }
    }
    return next;
}

}  // namespace gridbrake
