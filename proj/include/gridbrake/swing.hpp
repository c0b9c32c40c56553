#pragma once

#include <vector>

namespace gridbrake::swing {

/// One-machine swing model with a shunt brake. All powers in pu on the
/// machine base, speeds in pu, inertia in seconds.
struct SwingParams {
    double h = 11.0;       ///< inertia constant (s)
    double d = 0.0;        ///< damping (pu power / pu speed)
    double delta_p = 0.0;  ///< tripped load (pu)
    double p_br = 0.0;     ///< brake power while inserted (pu)

    void validate() const;
};

struct BrakeElectrical {
    double v_pu = 1.0;
    double r_br_pu = 1.0;
};

struct TrajectoryQuery {
    double omega0 = 0.0;  ///< speed deviation at insertion (pu)
    double t = 0.0;       ///< time since insertion (s)
};

struct RemovalSolution {
    double t_removal = 0.0;
    double omega_target = 0.0;
    bool reachable = false;
};

/// Power absorbed by a resistor of `r_br_pu` at bus voltage `v_pu`: V^2 / R.
double brake_power(const BrakeElectrical& e);

/// Brake resistance (pu) that absorbs `p_pu` at voltage `v_pu`.
double brake_resistance(double p_pu, double v_pu = 1.0);

/// Closed-form speed deviation while the brake is online. Requires d > 0;
/// throws DomainError otherwise (use speed_deviation_first_swing).
double speed_deviation_at(const SwingParams& p, const TrajectoryQuery& q);

/// Undamped linear form omega0 + (dP - Pbr) t / 2H.
double speed_deviation_first_swing(const SwingParams& p, const TrajectoryQuery& q);

/// Time for the damped trajectory to reach `omega_target`. Targets the
/// trajectory never reaches come back with reachable = false.
RemovalSolution removal_time_damped(const SwingParams& p, double omega0, double omega_target);

/// Braking time under the D = 0 approximation. Treated as a deceleration
/// criterion: reachable only when the brake exceeds the tripped load and the
/// target is at or below omega0.
RemovalSolution removal_time_first_swing(const SwingParams& p, double omega0, double omega_target);

/// Splits a total brake size into the fewest stages no larger than
/// `max_step_mw`: equal stages first, then one remainder stage.
std::vector<double> allocate_stages(double total_brake_mw, double max_step_mw);

}  // namespace gridbrake::swing
