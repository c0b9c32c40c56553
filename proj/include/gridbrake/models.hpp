#pragma once

// Dynamic device models in RMS phasor form. Voltages and currents are complex
// pu; every current is on the device's own machine base unless noted.

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace gridbrake {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Synchronous generator: one-axis flux decay, type-1 exciter, reheat governor
// ---------------------------------------------------------------------------

struct ExciterParams {
    bool enabled = true;
    double ka = 20.0;
    double ta_s = 0.2;
    double ke = 1.0;
    double te_s = 0.314;
    double kf = 0.063;
    double tf_s = 0.35;
    double vr_min = -5.0;
    double vr_max = 5.0;
    bool operator==(const ExciterParams&) const = default;
};

struct GovernorParams {
    bool enabled = true;
    double droop = 0.05;
    double t_servo_s = 0.2;
    double t_reheat_s = 7.0;
    double hp_fraction = 0.3;
    double p_min = 0.0;
    double p_max = 1.1;
    bool operator==(const GovernorParams&) const = default;
};

struct SyncGenParams {
    double rated_mw = 500.0;
    double r_a = 0.003;    ///< armature resistance, machine base
    double x_a = 0.102;    ///< driving (transient) reactance, machine base
    double x_d = 1.8;      ///< synchronous d-axis reactance
    double t_d0_s = 6.0;   ///< open-circuit transient time constant
    double h_s = 11.0;
    double d = 0.0;
    ExciterParams exciter;
    GovernorParams governor;

    /// Zero internal impedance: the machine imposes its EMF on its bus.
    bool ideal_source() const { return r_a == 0.0 && x_a == 0.0; }
    Complex impedance() const { return {r_a, x_a}; }
    void validate() const;
    bool operator==(const SyncGenParams&) const = default;
};

struct SyncGenState {
    double delta = 0.0;    ///< rotor angle (rad) against the nominal-frequency reference
    double omega = 0.0;    ///< speed deviation (pu)
    double eq = 1.0;       ///< q-axis transient EMF (pu)
    double vr = 0.0;       ///< regulator output
    double efd = 1.0;      ///< field voltage
    double rf = 0.0;       ///< rate-feedback state
    double pv = 0.0;       ///< valve / servo output (pu)
    double reheat = 0.0;   ///< reheater lag output (pu)
};

struct SyncGenSetpoints {
    double p_ref = 0.0;
    double v_ref = 1.0;
};

/// Terminal quantities seen by a device: bus voltage and current out of the
/// device into the network (machine base).
struct Terminal {
    Complex v;
    Complex i;
};

using SyncGenDerivative = SyncGenState;

Complex sg_internal_emf(const SyncGenState& s);
/// Current the machine drives into a bus at voltage `v` (machine base).
Complex sg_current(const SyncGenParams& p, const SyncGenState& s, Complex v);
double sg_mechanical_power(const SyncGenParams& p, const SyncGenState& s, const SyncGenSetpoints& sp);
double sg_airgap_power(const SyncGenParams& p, const SyncGenState& s, const Terminal& t);
SyncGenDerivative sg_derivatives(const SyncGenParams& p, const SyncGenState& s,
                                 const SyncGenSetpoints& sp, const Terminal& t, double omega_b);

std::vector<std::string> sg_state_names(const SyncGenParams& p);
std::vector<double> sg_pack(const SyncGenParams& p, const SyncGenState& s);
SyncGenState sg_unpack(const SyncGenParams& p, std::span<const double> x, const SyncGenState& frozen);

// ---------------------------------------------------------------------------
// Grid-forming inverter: droop-controlled voltage source behind its filter
// ---------------------------------------------------------------------------

struct GfmParams {
    double rated_mw = 500.0;
    double filter_inductance_h = 3e-3;
    double filter_capacitance_f = 30e-6;
    double filter_base_kv = 34.5;  ///< voltage level the filter values refer to
    double current_limit_pu = 1.3;
    double droop_p = 0.1;          ///< pu frequency per pu power
    double droop_q = 0.05;         ///< pu voltage per pu reactive power
    double tau_p_s = 0.1;          ///< power measurement filter
    double tau_v_s = 0.05;         ///< voltage control time constant

    double filter_reactance_pu(double f_nominal_hz) const;
    double filter_susceptance_pu(double f_nominal_hz) const;
    /// Inertia equivalent to droop with a first-order power filter, tau / (2 m_p).
    double virtual_inertia_s() const { return tau_p_s / (2.0 * droop_p); }
    void validate() const;
    bool operator==(const GfmParams&) const = default;
};

struct GfmState {
    double theta = 0.0;  ///< internal angle (rad)
    double omega = 0.0;  ///< internal frequency deviation (pu)
    double e = 1.0;      ///< internal voltage magnitude (pu)
};

struct GfmSetpoints {
    double p_ref = 0.0;
    double q_ref = 0.0;
    double v_ref = 1.0;
};

/// Filter current for terminal voltage `v`, magnitude-clamped to the limit.
Complex gfm_output_current(const GfmParams& p, const GfmState& s, Complex v, double f_nominal_hz);
GfmState gfm_derivatives(const GfmParams& p, const GfmState& s, const GfmSetpoints& sp, Complex v,
                         double f_nominal_hz);

// ---------------------------------------------------------------------------
// Induction motor: single-cage transient model (E' plus slip)
// ---------------------------------------------------------------------------

struct InductionMotorParams {
    double rated_mw = 100.0;
    double rs = 0.01;
    double xs = 0.10;
    double xm = 3.0;
    double rr = 0.013;
    double xr = 0.10;
    double h_s = 0.8;
    double torque_exponent = 2.0;  ///< load torque ~ speed^k

    double x0() const { return xs + xm; }
    double x_transient() const { return xs + xm * xr / (xm + xr); }
    double t0_transient_s(double omega_b) const { return (xr + xm) / (omega_b * rr); }
    void validate() const;
    bool operator==(const InductionMotorParams&) const = default;
};

struct InductionMotorState {
    double er = 0.0;
    double ei = 0.0;
    double slip = 0.0;
};

struct MotorSetpoints {
    double load_torque = 0.0;  ///< load torque at synchronous speed (pu)
};

/// Stator current into the motor (motor base).
Complex motor_current(const InductionMotorParams& p, const InductionMotorState& s, Complex v);
double motor_electrical_torque(const InductionMotorParams& p, const InductionMotorState& s, Complex v);
double motor_load_torque(const InductionMotorParams& p, const MotorSetpoints& sp, double slip);
InductionMotorState motor_derivatives(const InductionMotorParams& p, const InductionMotorState& s,
                                      const MotorSetpoints& sp, Complex v, double omega_b);

/// Steady-state E' for slip `slip` at terminal voltage `v`.
Complex motor_steady_emf(const InductionMotorParams& p, Complex v, double slip, double omega_b);
/// Steady-state complex power drawn (motor base) from the equivalent circuit.
Complex motor_steady_power(const InductionMotorParams& p, double v_mag, double slip);
/// Steady-state electromagnetic torque from the equivalent circuit.
double motor_steady_torque(const InductionMotorParams& p, double v_mag, double slip);
/// Slip of maximum steady torque (pull-out), found by golden-section search.
double motor_pullout_slip(const InductionMotorParams& p);

// ---------------------------------------------------------------------------
// Static load: constant power, converted to constant impedance below v_min
// ---------------------------------------------------------------------------

struct StaticLoad {
    Complex s_pu;        ///< demand at nominal voltage, system base
    double v_min = 0.7;

    /// Current drawn from the bus (system base).
    Complex current(Complex v) const;
};

}  // namespace gridbrake
