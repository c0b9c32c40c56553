#pragma once

// Breaker-operated braking resistor bank: stage definitions, switching
// schedule, controller and I^2t energy accounting.

#include "gridbrake/network.hpp"
#include "gridbrake/units.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gridbrake {

struct BrakeStage {
    std::string name;
    double rating_mw = 0.0;                 ///< absorbed power at 1.0 pu voltage
    double insert_command_s = 0.0;          ///< absolute, or offset from the load-loss event
    std::optional<double> remove_command_s; ///< same reference as insert_command_s; none = stay in
    double insert_delay_s = 0.05;
    double remove_delay_s = 0.0;
    double thermal_limit_mj = 0.0;          ///< 0 selects the default (3 x rating x 0.85 s)

    // runtime accounting
    double thermal_energy_mj = 0.0;
    bool thermal_violation = false;

    double resistance_pu(const SystemBase& base) const;
    double conductance_pu(const SystemBase& base) const;
    double effective_thermal_limit_mj() const;
    void validate() const;
    bool operator==(const BrakeStage& o) const {
        return name == o.name && rating_mw == o.rating_mw && insert_command_s == o.insert_command_s &&
               remove_command_s == o.remove_command_s && insert_delay_s == o.insert_delay_s &&
               remove_delay_s == o.remove_delay_s && thermal_limit_mj == o.thermal_limit_mj;
    }
};

enum class BrakeTrigger { ExplicitTimes, OnLoadLossEvent };

struct BrakeSchedule {
    std::vector<BrakeStage> stages;
    BrakeTrigger trigger = BrakeTrigger::OnLoadLossEvent;
    double max_insertion_s = 1.0;

    /// Planned conduction time of stage `k` (insertion to removal), if removed.
    std::optional<double> planned_dwell(std::size_t k) const;
    void validate() const;
    bool operator==(const BrakeSchedule&) const = default;
};

/// Three stages {130, 130, 110} MW inserted together `breaker_delay` after the
/// load loss; removed 0.1 s after insertion, then 0.25 s and 0.5 s apart.
BrakeSchedule build_reference_schedule(double load_loss_time, double breaker_delay);

/// Same timing chain expressed relative to the detected load-loss event.
BrakeSchedule reference_schedule_on_event(double breaker_delay);

/// Adds dissipated energy over `dt` while the stage conducts and flags a
/// thermal violation past the limit. Returns the updated energy in MJ.
double step_thermal(BrakeStage& stage, double dissipated_power_pu, double dt, const SystemBase& base,
                    bool conducting = true);

struct BrakeCommandRecord {
    double time = 0.0;
    std::size_t stage = 0;
    BreakerCommand command = BreakerCommand::Close;
    double delay = 0.0;
    bool operator==(const BrakeCommandRecord&) const = default;
};

/// Turns a schedule into breaker commands as simulation time advances.
class BrakeController {
public:
    explicit BrakeController(BrakeSchedule schedule);

    /// Commands due at `t`. `load_loss_time` anchors event-triggered schedules.
    std::vector<BrakeCommandRecord> step(double t, std::optional<double> load_loss_time);

    const BrakeSchedule& schedule() const { return schedule_; }
    BrakeSchedule& schedule() { return schedule_; }
    const std::vector<BrakeCommandRecord>& log() const { return log_; }
    std::optional<double> anchor() const { return anchor_; }
    std::vector<std::string> end_of_run_warnings() const;

private:
    BrakeSchedule schedule_;
    std::optional<double> anchor_;
    std::vector<bool> inserted_;
    std::vector<bool> removed_;
    std::vector<BrakeCommandRecord> log_;
};

/// Convenience wrapper matching the controller's single-step contract.
std::vector<BrakeCommandRecord> controller_step(BrakeController& controller, double t,
                                                std::optional<double> load_loss_time);

}  // namespace gridbrake
