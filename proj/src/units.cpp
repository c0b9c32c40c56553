#include "gridbrake/units.hpp"

#include "gridbrake/error.hpp"

#include <cmath>
#include <numbers>

namespace gridbrake {

void SystemBase::validate() const {
    if (!(s_base_mva > 0.0) || !std::isfinite(s_base_mva))
        throw ConfigError("system base: s_base_mva must be > 0");
    if (!(v_base_kv > 0.0) || !std::isfinite(v_base_kv))
        throw ConfigError("system base: v_base_kv must be > 0");
    if (!(f_nominal_hz > 0.0) || !std::isfinite(f_nominal_hz))
        throw ConfigError("system base: f_nominal_hz must be > 0");
}

double to_pu(double value_mw, const SystemBase& base) {
    base.validate();
    return value_mw / base.s_base_mva;
}

double from_pu(double value_pu, const SystemBase& base) {
    base.validate();
    return value_pu * base.s_base_mva;
}

double cycles_to_seconds(double n_cycles, double f_nominal_hz) {
    if (!(n_cycles >= 0.0)) throw DomainError("cycles_to_seconds: cycle count must be >= 0");
    if (!(f_nominal_hz > 0.0)) throw DomainError("cycles_to_seconds: frequency must be > 0");
    return n_cycles / f_nominal_hz;
}

double omega_base(const SystemBase& base) {
    return 2.0 * std::numbers::pi * base.f_nominal_hz;
}

double impedance_base_ohm(double v_kv, double s_mva) {
    return v_kv * v_kv / s_mva;
}

}  // namespace gridbrake
