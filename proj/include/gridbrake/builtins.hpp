#pragma once

// Built-in study scenarios and the reduced one-machine case used as an
// analytic cross-check.

#include "gridbrake/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gridbrake {

/// Every built-in scenario in a fixed order.
std::vector<Scenario> builtin_scenarios();
std::vector<std::string> builtin_names();
std::optional<Scenario> builtin_scenario(const std::string& name);

/// Default eigen sweep axes for the small-signal study.
std::vector<double> default_eigen_scr();
std::vector<double> default_eigen_brake_mw();

struct ReducedCase {
    double h_s = 11.0;
    double d_pu = 1.0;
    double delta_p_pu = 0.5;       ///< load lost at t = 0, machine base
    double brake_pu = 0.25;        ///< brake inserted at t = 0, machine base
    double initial_speed_pu = 0.0;
    double horizon_s = 10.0;
    double dt_s = 1e-3;
};

/// One ideal-source machine feeding a resistive load on a single bus with
/// exciter and governor held, so speed follows the damped swing equation.
Scenario reduced_swing_scenario(const ReducedCase& c);

}  // namespace gridbrake
