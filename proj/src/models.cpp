#include "gridbrake/models.hpp"

#include "gridbrake/error.hpp"

#include <cmath>
#include <numbers>

namespace gridbrake {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite input: ") + what);
}

void require_finite(Complex v, const char* what) {
    require_finite(v.real(), what);
    require_finite(v.imag(), what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Synchronous generator
// ---------------------------------------------------------------------------

void SyncGenParams::validate() const {
    if (!(rated_mw > 0.0)) throw ConfigError("sync gen: rated_mw must be > 0");
    if (!(h_s > 0.0)) throw ConfigError("sync gen: h must be > 0");
    if (!(d >= 0.0)) throw ConfigError("sync gen: d must be >= 0");
    if (!(r_a >= 0.0)) throw ConfigError("sync gen: r_a must be >= 0");
    if (!(x_a >= 0.0)) throw ConfigError("sync gen: x_a must be >= 0");
    if (x_a == 0.0 && r_a != 0.0) throw ConfigError("sync gen: x_a must be > 0 unless r_a is also 0");
    if (!(x_d >= x_a)) throw ConfigError("sync gen: x_d must be >= x_a");
    if (!(t_d0_s > 0.0)) throw ConfigError("sync gen: t_d0 must be > 0");
    if (exciter.enabled) {
        if (!(exciter.ta_s > 0.0 && exciter.te_s > 0.0 && exciter.tf_s > 0.0))
            throw ConfigError("sync gen: exciter time constants must be > 0");
        if (!(exciter.vr_max > exciter.vr_min)) throw ConfigError("sync gen: exciter vr_max must exceed vr_min");
    }
    if (!(governor.droop > 0.0)) throw ConfigError("sync gen: governor droop must be > 0");
    if (governor.enabled) {
        if (!(governor.t_servo_s > 0.0 && governor.t_reheat_s > 0.0))
            throw ConfigError("sync gen: governor time constants must be > 0");
        if (!(governor.hp_fraction >= 0.0 && governor.hp_fraction <= 1.0))
            throw ConfigError("sync gen: governor hp_fraction must be in [0, 1]");
        if (!(governor.p_max > governor.p_min)) throw ConfigError("sync gen: governor p_max must exceed p_min");
    }
}

Complex sg_internal_emf(const SyncGenState& s) {
    return std::polar(s.eq, s.delta);
}

Complex sg_current(const SyncGenParams& p, const SyncGenState& s, Complex v) {
    if (p.ideal_source()) throw DomainError("sg_current: ideal source current is set by the network");
    return (sg_internal_emf(s) - v) / p.impedance();
}

double sg_mechanical_power(const SyncGenParams& p, const SyncGenState& s, const SyncGenSetpoints& sp) {
    if (!p.governor.enabled) return sp.p_ref;
    const double f = p.governor.hp_fraction;
    return f * s.pv + (1.0 - f) * s.reheat;
}

double sg_airgap_power(const SyncGenParams& p, const SyncGenState& s, const Terminal& t) {
    if (p.ideal_source()) return (t.v * std::conj(t.i)).real();
    return (sg_internal_emf(s) * std::conj(t.i)).real();
}

SyncGenDerivative sg_derivatives(const SyncGenParams& p, const SyncGenState& s,
                                 const SyncGenSetpoints& sp, const Terminal& t, double omega_b) {
    require_finite(t.v, "terminal voltage");
    require_finite(t.i, "terminal current");
    require_finite(s.delta, "rotor angle");
    require_finite(s.omega, "speed");

    SyncGenDerivative d{};
    const double pe = sg_airgap_power(p, s, t);
    const double pm = sg_mechanical_power(p, s, sp);
    d.delta = omega_b * s.omega;
    d.omega = (pm - pe - p.d * s.omega) / (2.0 * p.h_s);

    if (p.exciter.enabled) {
        const auto& e = p.exciter;
        // Rotate into the rotor frame: q axis along delta, d axis lagging by 90 degrees.
        const Complex i_rotor = t.i * std::polar(1.0, -s.delta);
        const double id = -i_rotor.imag();
        d.eq = (s.efd - s.eq - (p.x_d - p.x_a) * id) / p.t_d0_s;

        const double vt = std::abs(t.v);
        const double vf = e.kf / e.tf_s * s.efd - s.rf;
        d.vr = (e.ka * (sp.v_ref - vt - vf) - s.vr) / e.ta_s;
        if ((s.vr >= e.vr_max && d.vr > 0.0) || (s.vr <= e.vr_min && d.vr < 0.0)) d.vr = 0.0;
        d.efd = (s.vr - e.ke * s.efd) / e.te_s;
        d.rf = (e.kf / e.tf_s * s.efd - s.rf) / e.tf_s;
    }

    if (p.governor.enabled) {
        const auto& g = p.governor;
        d.pv = (sp.p_ref - s.omega / g.droop - s.pv) / g.t_servo_s;
        if ((s.pv >= g.p_max && d.pv > 0.0) || (s.pv <= g.p_min && d.pv < 0.0)) d.pv = 0.0;
        d.reheat = (s.pv - s.reheat) / g.t_reheat_s;
    }
    return d;
}

std::vector<std::string> sg_state_names(const SyncGenParams& p) {
    std::vector<std::string> names{"sg.delta", "sg.omega"};
    if (p.exciter.enabled) {
        for (const char* n : {"sg.eq", "sg.vr", "sg.efd", "sg.rf"}) names.emplace_back(n);
    }
    if (p.governor.enabled) {
        names.emplace_back("sg.pv");
        names.emplace_back("sg.reheat");
    }
    return names;
}

std::vector<double> sg_pack(const SyncGenParams& p, const SyncGenState& s) {
    std::vector<double> x{s.delta, s.omega};
    if (p.exciter.enabled) x.insert(x.end(), {s.eq, s.vr, s.efd, s.rf});
    if (p.governor.enabled) x.insert(x.end(), {s.pv, s.reheat});
    return x;
}

SyncGenState sg_unpack(const SyncGenParams& p, std::span<const double> x, const SyncGenState& frozen) {
    SyncGenState s = frozen;
    std::size_t k = 0;
    s.delta = x[k++];
    s.omega = x[k++];
    if (p.exciter.enabled) {
        s.eq = x[k++];
        s.vr = x[k++];
        s.efd = x[k++];
        s.rf = x[k++];
    }
    if (p.governor.enabled) {
        s.pv = x[k++];
        s.reheat = x[k++];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Grid-forming inverter
// ---------------------------------------------------------------------------

double GfmParams::filter_reactance_pu(double f_nominal_hz) const {
    const double x_ohm = 2.0 * std::numbers::pi * f_nominal_hz * filter_inductance_h;
    return x_ohm / (filter_base_kv * filter_base_kv / rated_mw);
}

double GfmParams::filter_susceptance_pu(double f_nominal_hz) const {
    const double b_siemens = 2.0 * std::numbers::pi * f_nominal_hz * filter_capacitance_f;
    return b_siemens * (filter_base_kv * filter_base_kv / rated_mw);
}

void GfmParams::validate() const {
    if (!(rated_mw > 0.0)) throw ConfigError("gfm: rated_mw must be > 0");
    if (!(filter_inductance_h > 0.0)) throw ConfigError("gfm: filter inductance must be > 0");
    if (!(filter_capacitance_f >= 0.0)) throw ConfigError("gfm: filter capacitance must be >= 0");
    if (!(filter_base_kv > 0.0)) throw ConfigError("gfm: filter_base_kv must be > 0");
    if (!(current_limit_pu >= 1.0)) throw ConfigError("gfm: current limit must be >= 1.0 pu");
    if (!(droop_p > 0.0 && droop_q > 0.0)) throw ConfigError("gfm: droop gains must be > 0");
    if (!(tau_p_s > 0.0 && tau_v_s > 0.0)) throw ConfigError("gfm: time constants must be > 0");
}

Complex gfm_output_current(const GfmParams& p, const GfmState& s, Complex v, double f_nominal_hz) {
    require_finite(v, "terminal voltage");
    const Complex e = std::polar(s.e, s.theta);
    const Complex i = (e - v) / Complex(0.0, p.filter_reactance_pu(f_nominal_hz));
    const double mag = std::abs(i);
    if (mag > p.current_limit_pu) return i * (p.current_limit_pu / mag);
    return i;
}

GfmState gfm_derivatives(const GfmParams& p, const GfmState& s, const GfmSetpoints& sp, Complex v,
                         double f_nominal_hz) {
    require_finite(s.theta, "gfm angle");
    require_finite(s.omega, "gfm frequency");
    require_finite(s.e, "gfm voltage");
    const Complex i = gfm_output_current(p, s, v, f_nominal_hz);
    const Complex sout = v * std::conj(i);
    GfmState d;
    d.theta = 2.0 * std::numbers::pi * f_nominal_hz * s.omega;
    d.omega = (p.droop_p * (sp.p_ref - sout.real()) - s.omega) / p.tau_p_s;
    d.e = (sp.v_ref + p.droop_q * (sp.q_ref - sout.imag()) - s.e) / p.tau_v_s;
    return d;
}

// ---------------------------------------------------------------------------
// Induction motor
// ---------------------------------------------------------------------------

void InductionMotorParams::validate() const {
    if (!(rated_mw > 0.0)) throw ConfigError("motor: rated_mw must be > 0");
    if (!(rs >= 0.0 && rr >= 0.0)) throw ConfigError("motor: resistances must be >= 0");
    if (!(rr > 0.0)) throw ConfigError("motor: rotor resistance must be > 0");
    if (!(xs > 0.0 && xm > 0.0 && xr > 0.0)) throw ConfigError("motor: reactances must be > 0");
    if (!(h_s > 0.0)) throw ConfigError("motor: inertia must be > 0");
    if (!(torque_exponent >= 0.0)) throw ConfigError("motor: torque exponent must be >= 0");
}

Complex motor_current(const InductionMotorParams& p, const InductionMotorState& s, Complex v) {
    return (v - Complex(s.er, s.ei)) / Complex(p.rs, p.x_transient());
}

double motor_electrical_torque(const InductionMotorParams& p, const InductionMotorState& s, Complex v) {
    const Complex e(s.er, s.ei);
    return (e * std::conj(motor_current(p, s, v))).real();
}

double motor_load_torque(const InductionMotorParams& p, const MotorSetpoints& sp, double slip) {
    const double speed = std::max(0.0, 1.0 - slip);
    return sp.load_torque * std::pow(speed, p.torque_exponent);
}

InductionMotorState motor_derivatives(const InductionMotorParams& p, const InductionMotorState& s,
                                      const MotorSetpoints& sp, Complex v, double omega_b) {
    require_finite(v, "terminal voltage");
    require_finite(s.slip, "slip");
    const Complex e(s.er, s.ei);
    const Complex i = motor_current(p, s, v);
    const double t0 = p.t0_transient_s(omega_b);
    const Complex de = Complex(0.0, -omega_b * s.slip) * e - (e - Complex(0.0, p.x0() - p.x_transient()) * i) / t0;
    const double te = (e * std::conj(i)).real();
    InductionMotorState d;
    d.er = de.real();
    d.ei = de.imag();
    d.slip = (motor_load_torque(p, sp, s.slip) - te) / (2.0 * p.h_s);
    return d;
}

Complex motor_steady_emf(const InductionMotorParams& p, Complex v, double slip, double omega_b) {
    // 0 = -j wb s E - (E - j(X0 - X') (V - E)/Z') / T0
    const Complex zp(p.rs, p.x_transient());
    const Complex jdx(0.0, p.x0() - p.x_transient());
    const double t0 = p.t0_transient_s(omega_b);
    const Complex lhs = Complex(0.0, omega_b * slip * t0) + 1.0 + jdx / zp;
    return jdx * v / zp / lhs;
}

Complex motor_steady_power(const InductionMotorParams& p, double v_mag, double slip) {
    const Complex zr = Complex(p.rr / slip, p.xr);
    const Complex jxm(0.0, p.xm);
    const Complex z = Complex(p.rs, p.xs) + jxm * zr / (jxm + zr);
    const Complex i = v_mag / z;
    return v_mag * std::conj(i);
}

double motor_steady_torque(const InductionMotorParams& p, double v_mag, double slip) {
    if (slip == 0.0) return 0.0;
    const Complex zr = Complex(p.rr / slip, p.xr);
    const Complex jxm(0.0, p.xm);
    const Complex z = Complex(p.rs, p.xs) + jxm * zr / (jxm + zr);
    const Complex i = v_mag / z;
    const Complex ir = i * jxm / (jxm + zr);
    return std::norm(ir) * p.rr / slip;
}

double motor_pullout_slip(const InductionMotorParams& p) {
    double lo = 1e-4;
    double hi = 1.0;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - g * (hi - lo);
    double b = lo + g * (hi - lo);
    for (int k = 0; k < 200; ++k) {
        if (motor_steady_torque(p, 1.0, a) > motor_steady_torque(p, 1.0, b)) {
            hi = b;
        } else {
            lo = a;
        }
        a = hi - g * (hi - lo);
        b = lo + g * (hi - lo);
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Static load
// ---------------------------------------------------------------------------

Complex StaticLoad::current(Complex v) const {
    const double mag = std::abs(v);
    if (mag >= v_min) return std::conj(s_pu / v);
    // constant impedance matched at v_min
    return std::conj(s_pu) / (v_min * v_min) * v;
}

}  // namespace gridbrake
