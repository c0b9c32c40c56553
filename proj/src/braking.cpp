#include "gridbrake/braking.hpp"

#include "gridbrake/error.hpp"

#include <algorithm>
#include <cmath>

namespace gridbrake {

namespace {
constexpr double kTimeEps = 1e-9;
constexpr double kReferenceLongestDwell = 0.85;
}  // namespace

double BrakeStage::resistance_pu(const SystemBase& base) const {
    return 1.0 / conductance_pu(base);
}

double BrakeStage::conductance_pu(const SystemBase& base) const {
    // rated at 1.0 pu voltage: G = P / V^2
    return to_pu(rating_mw, base);
}

double BrakeStage::effective_thermal_limit_mj() const {
    return thermal_limit_mj > 0.0 ? thermal_limit_mj : 3.0 * rating_mw * kReferenceLongestDwell;
}

void BrakeStage::validate() const {
    if (!(rating_mw > 0.0)) throw ConfigError("brake stage " + name + ": rating_mw must be > 0");
    if (!(insert_delay_s >= 0.0 && remove_delay_s >= 0.0))
        throw ConfigError("brake stage " + name + ": breaker delays must be >= 0");
    if (remove_command_s && !(*remove_command_s >= insert_command_s))
        throw ConfigError("brake stage " + name + ": removal command precedes insertion command");
    if (!(thermal_limit_mj >= 0.0)) throw ConfigError("brake stage " + name + ": thermal limit must be >= 0");
}

std::optional<double> BrakeSchedule::planned_dwell(std::size_t k) const {
    const auto& s = stages.at(k);
    if (!s.remove_command_s) return std::nullopt;
    return std::max(0.0, (*s.remove_command_s + s.remove_delay_s) - (s.insert_command_s + s.insert_delay_s));
}

void BrakeSchedule::validate() const {
    if (!(max_insertion_s > 0.0)) throw ConfigError("brake schedule: max_insertion_s must be > 0");
    for (std::size_t k = 0; k < stages.size(); ++k) {
        stages[k].validate();
        if (auto dwell = planned_dwell(k); dwell && *dwell > max_insertion_s + kTimeEps)
            throw ConfigError("brake stage " + stages[k].name + ": planned dwell exceeds max_insertion_s");
    }
}

namespace {

BrakeSchedule reference_chain(double insert_command, double breaker_delay) {
    BrakeSchedule s;
    const double inserted = insert_command + breaker_delay;
    const double removal_1 = inserted + 0.1;
    const double removal_2 = removal_1 + 0.25;
    const double removal_3 = removal_2 + 0.5;
    const double ratings[] = {130.0, 130.0, 110.0};
    const double removals[] = {removal_1, removal_2, removal_3};
    for (int k = 0; k < 3; ++k) {
        BrakeStage st;
        st.name = "stage" + std::to_string(k + 1);
        st.rating_mw = ratings[k];
        st.insert_command_s = insert_command;
        st.insert_delay_s = breaker_delay;
        st.remove_command_s = removals[k];
        st.remove_delay_s = 0.0;
        s.stages.push_back(st);
    }
    s.max_insertion_s = 1.0;
    return s;
}

}  // namespace

BrakeSchedule build_reference_schedule(double load_loss_time, double breaker_delay) {
    auto s = reference_chain(load_loss_time, breaker_delay);
    s.trigger = BrakeTrigger::ExplicitTimes;
    return s;
}

BrakeSchedule reference_schedule_on_event(double breaker_delay) {
    auto s = reference_chain(0.0, breaker_delay);
    s.trigger = BrakeTrigger::OnLoadLossEvent;
    return s;
}

double step_thermal(BrakeStage& stage, double dissipated_power_pu, double dt, const SystemBase& base,
                    bool conducting) {
    if (!(dt > 0.0)) throw DomainError("step_thermal: dt must be > 0");
    if (conducting) stage.thermal_energy_mj += dissipated_power_pu * base.s_base_mva * dt;
    if (stage.thermal_energy_mj > stage.effective_thermal_limit_mj()) stage.thermal_violation = true;
    return stage.thermal_energy_mj;
}

BrakeController::BrakeController(BrakeSchedule schedule)
    : schedule_(std::move(schedule)),
      inserted_(schedule_.stages.size(), false),
      removed_(schedule_.stages.size(), false) {
    schedule_.validate();
    if (schedule_.trigger == BrakeTrigger::ExplicitTimes) anchor_ = 0.0;
}

std::vector<BrakeCommandRecord> BrakeController::step(double t, std::optional<double> load_loss_time) {
    if (!anchor_ && load_loss_time) anchor_ = *load_loss_time;
    std::vector<BrakeCommandRecord> out;
    if (!anchor_) return out;
    for (std::size_t k = 0; k < schedule_.stages.size(); ++k) {
        const auto& st = schedule_.stages[k];
        const double insert_at = *anchor_ + st.insert_command_s;
        if (!inserted_[k] && t >= insert_at - kTimeEps) {
            inserted_[k] = true;
            out.push_back({insert_at, k, BreakerCommand::Close, st.insert_delay_s});
        }
        if (inserted_[k] && !removed_[k]) {
            // The cap bounds conduction even when the schedule keeps a stage in.
            const double capped_effective = insert_at + st.insert_delay_s + schedule_.max_insertion_s;
            double remove_at = capped_effective;
            double delay = 0.0;
            if (st.remove_command_s && *anchor_ + *st.remove_command_s + st.remove_delay_s <= capped_effective) {
                remove_at = *anchor_ + *st.remove_command_s;
                delay = st.remove_delay_s;
            }
            if (t >= remove_at - kTimeEps) {
                removed_[k] = true;
                out.push_back({remove_at, k, BreakerCommand::Open, delay});
            }
        }
    }
    log_.insert(log_.end(), out.begin(), out.end());
    return out;
}

std::vector<std::string> BrakeController::end_of_run_warnings() const {
    std::vector<std::string> w;
    if (!anchor_ && !schedule_.stages.empty()) w.emplace_back("brake schedule never triggered: no load-loss event detected");
    for (const auto& st : schedule_.stages) {
        if (st.thermal_violation) w.push_back("brake stage " + st.name + " exceeded its thermal limit");
    }
    return w;
}

std::vector<BrakeCommandRecord> controller_step(BrakeController& controller, double t,
                                                std::optional<double> load_loss_time) {
    return controller.step(t, load_loss_time);
}

}  // namespace gridbrake
