#include "gridbrake/system.hpp"

#include "gridbrake/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gridbrake {

namespace {

Complex pf_load(double p_mw, double pf, double s_base) {
    const double q = p_mw * std::tan(std::acos(pf));
    return Complex(p_mw, q) / s_base;
}

}  // namespace

SystemModel::SystemModel(Scenario scenario) : scenario_(std::move(scenario)) {
    scenario_.validate();
    const auto& sc = scenario_;
    const auto& gen = sc.generation;
    buildings_ = sc.cluster.buildings();
    loads_ = ClusterLoadState::from(buildings_);

    pcc_bus_ = *sc.bus_index(sc.topology.pcc_bus);
    if (sc.cluster.building_count > 0) cluster_bus_ = *sc.bus_index(sc.cluster.bus);
    if (sc.topology.grid) {
        grid_bus_ = *sc.bus_index(sc.topology.grid->bus);
        grid_y_ = 1.0 / scr_to_thevenin(sc.topology.grid->scr, sc.topology.grid->x_over_r, sc.base);
        grid_e_ = Complex(sc.topology.grid->source_voltage_pu, 0.0);
    }

    if (gen.has_sg()) {
        sg_ = gen.sg;
        sg_.rated_mw = gen.sg_mw();
        sg_bus_ = *sc.bus_index(gen.sg_bus);
        sg_offset_ = state_names_.size();
        for (auto& n : sg_state_names(sg_)) state_names_.push_back(n);
        angle_states_.push_back(*sg_offset_);
    }
    if (gen.has_gfm()) {
        gfm_ = gen.gfm;
        gfm_.rated_mw = gen.gfm_mw();
        gfm_bus_ = *sc.bus_index(gen.gfm_bus);
        gfm_offset_ = state_names_.size();
        for (const char* n : {"gfm.theta", "gfm.omega", "gfm.e"}) state_names_.emplace_back(n);
        angle_states_.push_back(*gfm_offset_);
    }
    for (std::size_t b = 0; b < buildings_.size(); ++b) {
        const double mw = buildings_[b].motor_mw();
        if (!(mw > 0.0)) continue;
        InductionMotorParams mp = sc.cluster.motor;
        mp.rated_mw = mw;
        motors_.push_back(mp);
        motor_building_.push_back(b);
        motor_offset_.push_back(state_names_.size());
        const std::string pre = "motor" + std::to_string(b + 1) + ".";
        for (const char* n : {"er", "ei", "slip"}) state_names_.push_back(pre + n);
    }
    motor_setpoints.assign(motors_.size(), MotorSetpoints{});
    if (!motors_.empty()) pullout_slip_ = gridbrake::motor_pullout_slip(motors_.front());

    for (const auto& c : sc.topology.capacitors) {
        shunts_.emplace_back(c.name, ShuntKind::CapacitorBank, *sc.bus_index(c.bus),
                             Complex(0.0, c.mvar / sc.base.s_base_mva), c.closed);
    }
    brake_first_ = shunts_.size();
    for (const auto& st : sc.brake.schedule.stages) {
        shunts_.emplace_back(st.name, ShuntKind::BrakeResistor, *sc.bus_index(sc.brake.bus),
                             Complex(st.conductance_pu(sc.base), 0.0), false);
    }
}

double SystemModel::omega_b() const { return 2.0 * std::numbers::pi * scenario_.base.f_nominal_hz; }

void SystemModel::set_loads(ClusterLoadState loads) {
    loads_ = std::move(loads);
    y_valid_ = false;
}

std::optional<std::size_t> SystemModel::shunt_index(const std::string& name) const {
    for (std::size_t k = 0; k < shunts_.size(); ++k) {
        if (shunts_[k].name() == name) return k;
    }
    return std::nullopt;
}

void SystemModel::set_voltage_override(std::optional<std::pair<std::size_t, Complex>> ov) {
    override_ = ov;
}

bool SystemModel::motor_connected(std::size_t m) const {
    return loads_.motor_online_mw[motor_building_[m]] > 0.0;
}

Complex SystemModel::cluster_static_demand() const {
    const auto& c = scenario_.cluster;
    const double sb = scenario_.base.s_base_mva;
    Complex s{};
    for (std::size_t b = 0; b < buildings_.size(); ++b) {
        s += pf_load(loads_.it_online_mw[b], c.it_power_factor, sb);
        s += pf_load(loads_.static_online_mw[b], c.static_power_factor, sb);
    }
    return s;
}

void SystemModel::rebuild_y() const {
    const auto& sc = scenario_;
    const double sb = sc.base.s_base_mva;
    NetworkProblem p(bus_count());
    for (const auto& l : sc.topology.lines) p.add_branch(*sc.bus_index(l.from), *sc.bus_index(l.to), l.impedance());
    if (sc.topology.grid) p.add_shunt(grid_bus_, grid_y_);
    for (const auto& sh : shunts_) {
        if (sh.closed()) p.add_shunt(sh.bus(), sh.admittance());
    }
    if (gfm_offset_) {
        p.add_shunt(gfm_bus_, Complex(0.0, gfm_.filter_susceptance_pu(sc.base.f_nominal_hz) * gfm_.rated_mw / sb));
    }
    if (sg_offset_ && !sg_.ideal_source()) p.add_shunt(sg_bus_, (sg_.rated_mw / sb) / sg_.impedance());
    for (std::size_t m = 0; m < motors_.size(); ++m) {
        if (!motor_connected(m)) continue;
        p.add_shunt(cluster_bus_, (motors_[m].rated_mw / sb) / Complex(motors_[m].rs, motors_[m].x_transient()));
    }
    y_ = p.y;
    y_valid_ = true;
}

NetworkProblem SystemModel::network_problem(std::span<const double> x) const {
    if (!y_valid_) rebuild_y();
    const auto& sc = scenario_;
    const double sb = sc.base.s_base_mva;
    const double fn = sc.base.f_nominal_hz;
    NetworkProblem p(bus_count());
    p.y = y_;
    for (const auto& l : sc.topology.lines) p.branches.emplace_back(*sc.bus_index(l.from), *sc.bus_index(l.to));

    if (sc.topology.grid) {
        p.source_current[grid_bus_] += grid_e_ * grid_y_;
        p.has_source[grid_bus_] = true;
    }
    if (sg_offset_) {
        const SyncGenState s = sg_unpack(sg_, x.subspan(*sg_offset_), sg_frozen);
        const Complex e = sg_internal_emf(s);
        if (sg_.ideal_source()) {
            p.fixed_voltage[sg_bus_] = e;
        } else {
            p.source_current[sg_bus_] += e * (sg_.rated_mw / sb) / sg_.impedance();
        }
        p.has_source[sg_bus_] = true;
    }
    if (gfm_offset_) {
        const GfmState s{x[*gfm_offset_], x[*gfm_offset_ + 1], x[*gfm_offset_ + 2]};
        const double scale = gfm_.rated_mw / sb;
        GfmParams gp = gfm_;
        p.nonlinear.push_back({gfm_bus_, [gp, s, scale, fn](Complex v) {
                                   return gfm_output_current(gp, s, v, fn) * scale;
                               }});
        p.has_source[gfm_bus_] = true;
    }
    for (std::size_t m = 0; m < motors_.size(); ++m) {
        if (!motor_connected(m)) continue;
        const std::size_t o = motor_offset_[m];
        const Complex e(x[o], x[o + 1]);
        p.source_current[cluster_bus_] +=
            e * (motors_[m].rated_mw / sb) / Complex(motors_[m].rs, motors_[m].x_transient());
    }
    if (!buildings_.empty()) {
        const StaticLoad load{cluster_static_demand(), sc.cluster.load_v_min_pu};
        if (load.s_pu != Complex{}) {
            p.nonlinear.push_back({cluster_bus_, [load](Complex v) { return -load.current(v); }});
        }
    }
    if (override_) {
        p.fixed_voltage[override_->first] = override_->second;
        p.has_source[override_->first] = true;
    }
    return p;
}

NetworkSolution SystemModel::solve_network(std::span<const double> x, std::vector<Complex>& warm) const {
    const NetworkProblem p = network_problem(x);
    NetworkSolution sol = solve_bus_voltages(p, warm);
    warm = sol.v;
    return sol;
}

Complex SystemModel::sg_current_machine(std::span<const double> x, const NetworkProblem& p,
                                        const NetworkSolution& net) const {
    const double scale = scenario_.base.s_base_mva / sg_.rated_mw;
    if (sg_.ideal_source()) {
        const auto r = current_mismatch(p, net.v);
        Complex i = r[sg_bus_];
        return i * scale;
    }
    const SyncGenState s = sg_unpack(sg_, x.subspan(*sg_offset_), sg_frozen);
    return sg_current(sg_, s, net.v[sg_bus_]);
}

void SystemModel::derivatives(std::span<const double> x, const NetworkSolution& net, std::span<double> dx) const {
    const double fn = scenario_.base.f_nominal_hz;
    std::fill(dx.begin(), dx.end(), 0.0);
    if (sg_offset_) {
        const SyncGenState s = sg_unpack(sg_, x.subspan(*sg_offset_), sg_frozen);
        Complex i;
        if (sg_.ideal_source()) {
            i = sg_current_machine(x, network_problem(x), net);
        } else {
            i = sg_current(sg_, s, net.v[sg_bus_]);
        }
        const SyncGenState d = sg_derivatives(sg_, s, sg_setpoints, Terminal{net.v[sg_bus_], i}, omega_b());
        const auto packed = sg_pack(sg_, d);
        std::copy(packed.begin(), packed.end(), dx.begin() + static_cast<std::ptrdiff_t>(*sg_offset_));
    }
    if (gfm_offset_) {
        const std::size_t o = *gfm_offset_;
        const GfmState s{x[o], x[o + 1], x[o + 2]};
        const GfmState d = gfm_derivatives(gfm_, s, gfm_setpoints, net.v[gfm_bus_], fn);
        dx[o] = d.theta;
        dx[o + 1] = d.omega;
        dx[o + 2] = d.e;
    }
    for (std::size_t m = 0; m < motors_.size(); ++m) {
        if (!motor_connected(m)) continue;
        const std::size_t o = motor_offset_[m];
        const InductionMotorState s{x[o], x[o + 1], x[o + 2]};
        const auto d = motor_derivatives(motors_[m], s, motor_setpoints[m], net.v[cluster_bus_], omega_b());
        dx[o] = d.er;
        dx[o + 1] = d.ei;
        dx[o + 2] = d.slip;
    }
}

void SystemModel::derivatives(std::span<const double> x, std::span<double> dx, std::vector<Complex>& warm) const {
    const NetworkSolution net = solve_network(x, warm);
    derivatives(x, net, dx);
}

Observation SystemModel::observe(std::span<const double> x, const NetworkSolution& net) const {
    const auto& sc = scenario_;
    const double sb = sc.base.s_base_mva;
    const double fn = sc.base.f_nominal_hz;
    const NetworkProblem p = network_problem(x);
    Observation o;

    double h_sum = 0.0;
    double hw_sum = 0.0;
    double gen_p = 0.0;
    if (sg_offset_) {
        const SyncGenState s = sg_unpack(sg_, x.subspan(*sg_offset_), sg_frozen);
        const Complex i = sg_current_machine(x, p, net);
        const Complex s_out = net.v[sg_bus_] * std::conj(i);
        o.sg_p_pu = s_out.real();
        o.sg_q_pu = s_out.imag();
        o.sg_omega_pu = s.omega;
        o.sg_pm_pu = sg_mechanical_power(sg_, s, sg_setpoints);
        const double w = sg_.h_s * sg_.rated_mw;
        h_sum += w;
        hw_sum += w * s.omega;
        gen_p += o.sg_p_pu * sg_.rated_mw / sb;
    }
    if (gfm_offset_) {
        const std::size_t k = *gfm_offset_;
        const GfmState s{x[k], x[k + 1], x[k + 2]};
        const Complex i = gfm_output_current(gfm_, s, net.v[gfm_bus_], fn);
        const Complex s_out = net.v[gfm_bus_] * std::conj(i);
        o.gfm_p_pu = s_out.real();
        o.gfm_q_pu = s_out.imag();
        o.gfm_i_pu = std::abs(i);
        o.gfm_omega_pu = s.omega;
        const double w = gfm_.virtual_inertia_s() * gfm_.rated_mw;
        h_sum += w;
        hw_sum += w * s.omega;
        gen_p += o.gfm_p_pu * gfm_.rated_mw / sb;
    }
    o.freq_hz = fn * (1.0 + (h_sum > 0.0 ? hw_sum / h_sum : 0.0));
    o.v_pcc_pu = std::abs(net.v[pcc_bus_]);
    if (sc.topology.grid) {
        const Complex vg = net.v[grid_bus_];
        o.grid_p_pu = (vg * std::conj((grid_e_ - vg) * grid_y_)).real();
        gen_p += o.grid_p_pu;
    }
    o.generation_p_pu = gen_p;

    if (!buildings_.empty()) {
        const Complex v = net.v[cluster_bus_];
        const StaticLoad load{cluster_static_demand(), sc.cluster.load_v_min_pu};
        o.load_p_pu += (v * std::conj(load.current(v))).real();
        double slip_w = 0.0;
        double w_sum = 0.0;
        for (std::size_t m = 0; m < motors_.size(); ++m) {
            const std::size_t k = motor_offset_[m];
            const InductionMotorState s{x[k], x[k + 1], x[k + 2]};
            slip_w += motors_[m].rated_mw * s.slip;
            w_sum += motors_[m].rated_mw;
            if (!motor_connected(m)) continue;
            const Complex i = motor_current(motors_[m], s, v);
            o.load_p_pu += (v * std::conj(i)).real() * motors_[m].rated_mw / sb;
        }
        o.motor_slip = w_sum > 0.0 ? slip_w / w_sum : 0.0;
    }

    for (const auto& l : sc.topology.lines) {
        const std::size_t a = *sc.bus_index(l.from);
        const std::size_t b = *sc.bus_index(l.to);
        const Complex z = l.impedance();
        o.line_loss_pu += std::norm((net.v[a] - net.v[b]) / z) * z.real();
    }

    o.bus_v_pu.reserve(bus_count());
    for (const auto& v : net.v) o.bus_v_pu.push_back(std::abs(v));
    for (std::size_t k = 0; k < capacitor_count(); ++k) o.capacitor_closed.push_back(shunts_[k].closed());
    for (std::size_t k = 0; k < brake_stage_count(); ++k) {
        const auto& sh = shunts_[brake_shunt(k)];
        const double pk = sh.closed() ? std::norm(net.v[sh.bus()]) * sh.admittance().real() : 0.0;
        o.stage_p_pu.push_back(pk);
        o.stage_closed.push_back(sh.closed());
        o.brake_p_pu += pk;
    }
    return o;
}

// ---------------------------------------------------------------------------
// Equilibrium
// ---------------------------------------------------------------------------

namespace {

/// Slip at which the motor's steady electrical power equals `p_target` (motor base).
std::optional<double> motor_slip_for_power(const InductionMotorParams& mp, Complex v, double p_target, double omega_b,
                                           double s_max) {
    auto power = [&](double s) {
        const Complex e = motor_steady_emf(mp, v, s, omega_b);
        const InductionMotorState st{e.real(), e.imag(), s};
        return (v * std::conj(motor_current(mp, st, v))).real();
    };
    double lo = 0.0;
    double hi = s_max;
    if (power(hi) < p_target) return std::nullopt;
    for (int k = 0; k < 200 && hi - lo > 1e-16; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (power(mid) < p_target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> SystemModel::initialize() {
    const auto& sc = scenario_;
    const auto& gen = sc.generation;
    const double sb = sc.base.s_base_mva;
    const double fn = sc.base.f_nominal_hz;
    const double wb = omega_b();
    const std::size_t n = bus_count();
    set_voltage_override(std::nullopt);

    // Power-flow admittance: passive network only.
    NetworkProblem base(n);
    for (const auto& l : sc.topology.lines) base.add_branch(*sc.bus_index(l.from), *sc.bus_index(l.to), l.impedance());
    if (sc.topology.grid) {
        base.add_shunt(grid_bus_, grid_y_);
        base.source_current[grid_bus_] = grid_e_ * grid_y_;
    }
    for (const auto& sh : shunts_) {
        if (sh.closed()) base.add_shunt(sh.bus(), sh.admittance());
    }
    if (gfm_offset_) base.add_shunt(gfm_bus_, Complex(0.0, gfm_.filter_susceptance_pu(fn) * gfm_.rated_mw / sb));

    std::vector<std::size_t> gen_buses;
    if (sg_offset_) gen_buses.push_back(sg_bus_);
    if (gfm_offset_ && std::find(gen_buses.begin(), gen_buses.end(), gfm_bus_) == gen_buses.end())
        gen_buses.push_back(gfm_bus_);
    const bool has_slack = !sc.topology.grid.has_value();
    const std::size_t slack_bus = sg_offset_ ? sg_bus_ : gfm_bus_;
    const auto ng = gen_buses.size();
    const auto nz = static_cast<Eigen::Index>(2 * n + ng + (has_slack ? 1 : 0));

    const double p_sg_sched = sg_offset_ ? gen.sg_dispatch_pu * sg_.rated_mw / sb : 0.0;
    const double p_gfm_sched = gfm_offset_ ? gen.gfm_dispatch_pu * gfm_.rated_mw / sb : 0.0;
    const Complex s_static = buildings_.empty() ? Complex{} : cluster_static_demand();
    const StaticLoad static_load{s_static, sc.cluster.load_v_min_pu};

    std::vector<std::size_t> connected;
    for (std::size_t m = 0; m < motors_.size(); ++m) {
        if (motor_connected(m)) connected.push_back(m);
    }
    std::vector<double> motor_slip(motors_.size(), 0.0);

    auto motor_injection = [&](Complex v, bool record) -> Complex {
        Complex i_total{};
        for (std::size_t m : connected) {
            const auto& mp = motors_[m];
            const auto s = motor_slip_for_power(mp, v, loads_.motor_online_mw[motor_building_[m]] / mp.rated_mw, wb,
                                                pullout_slip_);
            if (!s) throw InitializationError("motor " + std::to_string(motor_building_[m] + 1) +
                                              " cannot carry its load at the initial voltage");
            if (record) motor_slip[m] = *s;
            const Complex e = motor_steady_emf(mp, v, *s, wb);
            i_total -= motor_current(mp, InductionMotorState{e.real(), e.imag(), *s}, v) * (mp.rated_mw / sb);
        }
        return i_total;
    };

    auto residual = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd f(nz);
        std::vector<Complex> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = Complex(z(static_cast<Eigen::Index>(i)), z(static_cast<Eigen::Index>(n + i)));
        std::vector<Complex> r = current_mismatch(base, v);
        for (std::size_t g = 0; g < ng; ++g) {
            const std::size_t b = gen_buses[g];
            double p = 0.0;
            if (sg_offset_ && sg_bus_ == b) p += p_sg_sched;
            if (gfm_offset_ && gfm_bus_ == b) p += p_gfm_sched;
            if (has_slack && b == slack_bus) p += z(static_cast<Eigen::Index>(2 * n + ng));
            r[b] -= std::conj(Complex(p, z(static_cast<Eigen::Index>(2 * n + g))) / v[b]);
        }
        if (!buildings_.empty()) {
            r[cluster_bus_] += static_load.current(v[cluster_bus_]);
            r[cluster_bus_] -= motor_injection(v[cluster_bus_], false);
        }
        for (std::size_t i = 0; i < n; ++i) {
            f(static_cast<Eigen::Index>(i)) = r[i].real();
            f(static_cast<Eigen::Index>(n + i)) = r[i].imag();
        }
        for (std::size_t g = 0; g < ng; ++g) f(static_cast<Eigen::Index>(2 * n + g)) = std::abs(v[gen_buses[g]]) - gen.voltage_setpoint_pu;
        if (has_slack) f(static_cast<Eigen::Index>(2 * n + ng)) = v[slack_bus].imag();
        return f;
    };

    Eigen::VectorXd z = Eigen::VectorXd::Zero(nz);
    for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(i)) = gen.voltage_setpoint_pu;
    Eigen::VectorXd f = residual(z);
    int it = 0;
    for (; it < 50 && f.cwiseAbs().maxCoeff() > 1e-13; ++it) {
        Eigen::MatrixXd jac(nz, nz);
        for (Eigen::Index k = 0; k < nz; ++k) {
            const double h = 1e-7 * std::max(1.0, std::abs(z(k)));
            Eigen::VectorXd zp = z;
            Eigen::VectorXd zm = z;
            zp(k) += h;
            zm(k) -= h;
            jac.col(k) = (residual(zp) - residual(zm)) / (2.0 * h);
        }
        const Eigen::VectorXd dz = jac.fullPivLu().solve(-f);
        if (!dz.allFinite()) break;
        // Damped step keeps the first iterations away from motor pull-out.
        double alpha = 1.0;
        Eigen::VectorXd trial;
        for (int ls = 0; ls < 30; ++ls) {
            trial = z + alpha * dz;
            try {
                const Eigen::VectorXd ft = residual(trial);
                if (ft.allFinite() && ft.norm() < f.norm() * (1.0 - 1e-4 * alpha)) {
                    f = ft;
                    break;
                }
            } catch (const InitializationError&) {
            }
            alpha *= 0.5;
            trial.resize(0);
        }
        if (trial.size() == 0) break;
        z = trial;
    }
    if (!(f.cwiseAbs().maxCoeff() <= 1e-10)) {
        Eigen::Index worst = 0;
        f.cwiseAbs().maxCoeff(&worst);
        std::ostringstream os;
        os << "power flow did not converge after " << it << " iterations; largest residual " << f.cwiseAbs().maxCoeff()
           << " in equation " << worst;
        if (has_slack) os << " (load may exceed generation capability)";
        throw InitializationError(os.str());
    }

    std::vector<Complex> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = Complex(z(static_cast<Eigen::Index>(i)), z(static_cast<Eigen::Index>(n + i)));
    if (!buildings_.empty()) motor_injection(v[cluster_bus_], true);

    std::vector<double> x(state_size(), 0.0);

    // Reactive sharing by rating at a shared generation bus.
    auto gen_q = [&](std::size_t bus) {
        for (std::size_t g = 0; g < ng; ++g) {
            if (gen_buses[g] == bus) return z(static_cast<Eigen::Index>(2 * n + g));
        }
        return 0.0;
    };
    const double sg_mw_at = sg_offset_ ? sg_.rated_mw : 0.0;
    const double gfm_mw_at = gfm_offset_ ? gfm_.rated_mw : 0.0;
    const bool shared = sg_offset_ && gfm_offset_ && sg_bus_ == gfm_bus_;

    if (sg_offset_) {
        double p = p_sg_sched + (has_slack && slack_bus == sg_bus_ ? z(static_cast<Eigen::Index>(2 * n + ng)) : 0.0);
        double q = gen_q(sg_bus_) * (shared ? sg_mw_at / (sg_mw_at + gfm_mw_at) : 1.0);
        const Complex vt = v[sg_bus_];
        const Complex i_m = std::conj(Complex(p, q) / vt) * (sb / sg_.rated_mw);
        const Complex e = sg_.ideal_source() ? vt : vt + sg_.impedance() * i_m;
        SyncGenState s;
        s.delta = std::arg(e);
        s.omega = 0.0;
        s.eq = std::abs(e);
        const double id = -(i_m * std::polar(1.0, -s.delta)).imag();
        s.efd = s.eq + (sg_.x_d - sg_.x_a) * id;
        const auto& ex = sg_.exciter;
        s.vr = ex.ke * s.efd;
        s.rf = ex.kf / ex.tf_s * s.efd;
        const double pm = (e * std::conj(i_m)).real();
        s.pv = pm;
        s.reheat = pm;
        sg_setpoints.v_ref = std::abs(vt) + (ex.enabled ? s.vr / ex.ka : 0.0);
        sg_setpoints.p_ref = pm;
        if (ex.enabled && (s.vr > ex.vr_max || s.vr < ex.vr_min))
            throw InitializationError("exciter output outside its limits at the initial operating point");
        if (sg_.governor.enabled && (pm > sg_.governor.p_max + 1e-12 || pm < sg_.governor.p_min - 1e-12)) {
            std::ostringstream os;
            os << "synchronous machine output " << pm << " pu is outside governor limits";
            throw InitializationError(os.str());
        }
        sg_frozen = s;
        const auto packed = sg_pack(sg_, s);
        std::copy(packed.begin(), packed.end(), x.begin() + static_cast<std::ptrdiff_t>(*sg_offset_));
    }
    if (gfm_offset_) {
        double p = p_gfm_sched + (has_slack && slack_bus == gfm_bus_ && !sg_offset_ ? z(static_cast<Eigen::Index>(2 * n + ng)) : 0.0);
        double q = gen_q(gfm_bus_) * (shared ? gfm_mw_at / (sg_mw_at + gfm_mw_at) : 1.0);
        const Complex vt = v[gfm_bus_];
        const Complex i_m = std::conj(Complex(p, q) / vt) * (sb / gfm_.rated_mw);
        if (std::abs(i_m) > gfm_.current_limit_pu)
            throw InitializationError("grid-forming inverter current exceeds its limit at the initial operating point");
        const Complex e = vt + Complex(0.0, gfm_.filter_reactance_pu(fn)) * i_m;
        const std::size_t o = *gfm_offset_;
        x[o] = std::arg(e);
        x[o + 1] = 0.0;
        x[o + 2] = std::abs(e);
        const Complex s_m = vt * std::conj(i_m);
        gfm_setpoints = {s_m.real(), s_m.imag(), std::abs(e)};
    }
    for (std::size_t m = 0; m < motors_.size(); ++m) {
        const std::size_t o = motor_offset_[m];
        if (!motor_connected(m)) {
            x[o + 2] = 1.0;
            continue;
        }
        const auto& mp = motors_[m];
        const double s = motor_slip[m];
        const Complex e = motor_steady_emf(mp, v[cluster_bus_], s, wb);
        x[o] = e.real();
        x[o + 1] = e.imag();
        x[o + 2] = s;
        const InductionMotorState st{e.real(), e.imag(), s};
        const double te = motor_electrical_torque(mp, st, v[cluster_bus_]);
        motor_setpoints[m].load_torque = te / std::pow(1.0 - s, mp.torque_exponent);
    }

    // Verify the dynamic model sits at rest.
    y_valid_ = false;
    std::vector<Complex> warm = v;
    const NetworkSolution net = solve_network(x, warm);
    if (net.residual > 1e-8) throw InitializationError("network residual above tolerance at equilibrium");
    std::vector<double> dx(x.size());
    derivatives(x, net, dx);
    for (std::size_t k = 0; k < dx.size(); ++k) {
        if (std::abs(dx[k]) > 1e-9) {
            std::ostringstream os;
            os << "equilibrium check failed: d(" << state_names_[k] << ")/dt = " << dx[k];
            throw InitializationError(os.str());
        }
    }
    return x;
}

}  // namespace gridbrake
