#pragma once

namespace gridbrake {

/// Common per-unit base shared by every module. Powers are on `s_base_mva`
/// unless a field says it is on a machine base.
struct SystemBase {
    double s_base_mva = 1000.0;
    double v_base_kv = 345.0;
    double f_nominal_hz = 60.0;

    /// Throws ConfigError when any base quantity is not strictly positive.
    void validate() const;
    bool operator==(const SystemBase&) const = default;
};

double to_pu(double value_mw, const SystemBase& base);
double from_pu(double value_pu, const SystemBase& base);

/// Converts a count of nominal-frequency cycles to seconds.
double cycles_to_seconds(double n_cycles, double f_nominal_hz);

/// Synchronous electrical speed in rad/s.
double omega_base(const SystemBase& base);

/// Impedance base in ohm for a voltage level (kV) and power (MVA).
double impedance_base_ohm(double v_kv, double s_mva);

}  // namespace gridbrake
