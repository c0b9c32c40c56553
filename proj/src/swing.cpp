#include "gridbrake/swing.hpp"

#include "gridbrake/error.hpp"

#include <cmath>

namespace gridbrake::swing {

void SwingParams::validate() const {
    if (!(h > 0.0)) throw DomainError("swing: h must be > 0");
    if (!(d >= 0.0)) throw DomainError("swing: d must be >= 0");
    if (!(delta_p >= 0.0)) throw DomainError("swing: delta_p must be >= 0");
    if (!(p_br >= 0.0)) throw DomainError("swing: p_br must be >= 0");
}

double brake_power(const BrakeElectrical& e) {
    if (!(e.r_br_pu > 0.0)) throw DomainError("brake_power: resistance must be > 0");
    if (!(e.v_pu >= 0.0)) throw DomainError("brake_power: voltage must be >= 0");
    return e.v_pu * e.v_pu / e.r_br_pu;
}

double brake_resistance(double p_pu, double v_pu) {
    if (!(p_pu > 0.0)) throw DomainError("brake_resistance: power must be > 0");
    return v_pu * v_pu / p_pu;
}

double speed_deviation_at(const SwingParams& p, const TrajectoryQuery& q) {
    p.validate();
    if (!(p.d > 0.0))
        throw DomainError("speed_deviation_at: d must be > 0, use the first-swing form for d = 0");
    if (!(q.t >= 0.0)) throw DomainError("speed_deviation_at: t must be >= 0");
    const double steady = (p.delta_p - p.p_br) / p.d;
    return (q.omega0 - steady) * std::exp(-p.d * q.t / (2.0 * p.h)) + steady;
}

double speed_deviation_first_swing(const SwingParams& p, const TrajectoryQuery& q) {
    p.validate();
    if (!(q.t >= 0.0)) throw DomainError("speed_deviation_first_swing: t must be >= 0");
    return q.omega0 + (p.delta_p - p.p_br) * q.t / (2.0 * p.h);
}

RemovalSolution removal_time_damped(const SwingParams& p, double omega0, double omega_target) {
    p.validate();
    if (!(p.d > 0.0)) throw DomainError("removal_time_damped: d must be > 0");
    RemovalSolution out;
    out.omega_target = omega_target;
    if (omega0 == omega_target) {
        out.reachable = true;
        return out;
    }
    const double steady = (p.delta_p - p.p_br) / p.d;
    const double num = omega0 - steady;
    const double den = omega_target - steady;
    if (den == 0.0) return out;  // asymptote, reached only as t -> inf
    const double ratio = num / den;
    // exp(D T / 2H) = ratio needs ratio >= 1 for T >= 0
    if (!(ratio >= 1.0) || !std::isfinite(ratio)) return out;
    out.t_removal = 2.0 * p.h / p.d * std::log(ratio);
    out.reachable = std::isfinite(out.t_removal);
    return out;
}

RemovalSolution removal_time_first_swing(const SwingParams& p, double omega0, double omega_target) {
    p.validate();
    RemovalSolution out;
    out.omega_target = omega_target;
    if (omega0 == omega_target) {
        out.reachable = true;
        return out;
    }
    const double net = p.p_br - p.delta_p;
    if (!(net > 0.0) || !(omega0 > omega_target)) return out;
    out.t_removal = 2.0 * p.h * (omega0 - omega_target) / net;
    out.reachable = std::isfinite(out.t_removal);
    return out;
}

std::vector<double> allocate_stages(double total_brake_mw, double max_step_mw) {
    if (!(total_brake_mw > 0.0) || !std::isfinite(total_brake_mw))
        throw DomainError("allocate_stages: total must be > 0");
    if (!(max_step_mw > 0.0) || !std::isfinite(max_step_mw))
        throw DomainError("allocate_stages: max step must be > 0");
    const double ratio = total_brake_mw / max_step_mw;
    auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-12 * std::max(1.0, ratio)));
    if (n == 0) n = 1;
    std::vector<double> stages(n - 1, max_step_mw);
    const double remainder = total_brake_mw - static_cast<double>(n - 1) * max_step_mw;
    stages.push_back(std::min(remainder, max_step_mw));
    return stages;
}

}  // namespace gridbrake::swing
