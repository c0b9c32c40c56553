#include "gridbrake/small_signal.hpp"

#include "gridbrake/engine.hpp"
#include "gridbrake/error.hpp"
#include "gridbrake/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gridbrake {

namespace {

/// Maps between full states and the reduced set used for linearization.
class Coordinates {
public:
    Coordinates(const SystemModel& model, const std::vector<double>& x0) : model_(model), x0_(x0) {
        const auto& names = model.state_names();
        if (!model.has_infinite_bus() && !model.angle_states().empty()) ref_ = model.angle_states().front();
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (ref_ && k == *ref_) continue;
            keep_.push_back(k);
        }
        for (std::size_t m = 0; m < model.motor_params().size(); ++m) motor_.push_back(model.motor_offset(m));
        ref_angle_ = ref_ ? x0[*ref_] : 0.0;
    }

    std::size_t size() const { return keep_.size(); }
    std::vector<std::string> names() const {
        std::vector<std::string> n;
        for (auto k : keep_) n.push_back(model_.state_names()[k]);
        return n;
    }

    std::vector<double> reduce(const std::vector<double>& x) const {
        std::vector<double> r = x;
        if (ref_) {
            const double d = x[*ref_];
            for (auto a : model_.angle_states()) {
                if (a != *ref_) r[a] = x[a] - d;
            }
            for (auto o : motor_) {
                const Complex e = Complex(x[o], x[o + 1]) * std::polar(1.0, -d);
                r[o] = e.real();
                r[o + 1] = e.imag();
            }
        }
        std::vector<double> y;
        for (auto k : keep_) y.push_back(r[k]);
        return y;
    }

    std::vector<double> expand(const Eigen::VectorXd& y) const {
        std::vector<double> x = x0_;
        for (std::size_t i = 0; i < keep_.size(); ++i) x[keep_[i]] = y(static_cast<Eigen::Index>(i));
        if (ref_) {
            x[*ref_] = ref_angle_;
            for (auto a : model_.angle_states()) {
                if (a != *ref_) x[a] += ref_angle_;
            }
            for (auto o : motor_) {
                const Complex e = Complex(x[o], x[o + 1]) * std::polar(1.0, ref_angle_);
                x[o] = e.real();
                x[o + 1] = e.imag();
            }
        }
        return x;
    }

    /// Time derivative of the reduced coordinates given the full state and its derivative.
    Eigen::VectorXd reduce_rate(const std::vector<double>& x, const std::vector<double>& dx) const {
        std::vector<double> r = dx;
        if (ref_) {
            const double d = x[*ref_];
            const double dd = dx[*ref_];
            for (auto a : model_.angle_states()) {
                if (a != *ref_) r[a] = dx[a] - dd;
            }
            for (auto o : motor_) {
                const Complex e(x[o], x[o + 1]);
                const Complex de(dx[o], dx[o + 1]);
                const Complex rel = (de - Complex(0.0, dd) * e) * std::polar(1.0, -d);
                r[o] = rel.real();
                r[o + 1] = rel.imag();
            }
        }
        Eigen::VectorXd out(static_cast<Eigen::Index>(keep_.size()));
        for (std::size_t i = 0; i < keep_.size(); ++i) out(static_cast<Eigen::Index>(i)) = r[keep_[i]];
        return out;
    }

private:
    const SystemModel& model_;
    std::vector<double> x0_;
    std::optional<std::size_t> ref_;
    double ref_angle_ = 0.0;
    std::vector<std::size_t> keep_;
    std::vector<std::size_t> motor_;
};

}  // namespace

LinearModel linearize(const SystemModel& model, const std::vector<double>& x0, const LinearizeOptions& opts) {
    if (x0.size() != model.state_size()) throw DomainError("linearize: state size mismatch");
    std::vector<Complex> base_warm;
    std::vector<double> dx(x0.size());
    model.derivatives(x0, dx, base_warm);
    for (std::size_t k = 0; k < dx.size(); ++k) {
        if (!(std::abs(dx[k]) <= opts.equilibrium_tolerance)) {
            std::ostringstream os;
            os << "linearize: not an equilibrium, d(" << model.state_names()[k] << ")/dt = " << dx[k];
            throw LinearizationError(os.str());
        }
    }

    const Coordinates coords(model, x0);
    const std::vector<double> y0v = coords.reduce(x0);
    const auto n = static_cast<Eigen::Index>(coords.size());
    Eigen::VectorXd y0(n);
    for (Eigen::Index i = 0; i < n; ++i) y0(i) = y0v[static_cast<std::size_t>(i)];

    auto g = [&](const Eigen::VectorXd& y) {
        const std::vector<double> x = coords.expand(y);
        std::vector<Complex> warm = base_warm;
        std::vector<double> d(x.size());
        model.derivatives(x, d, warm);
        return coords.reduce_rate(x, d);
    };

    LinearModel lm;
    lm.state_names = coords.names();
    lm.operating_point = x0;
    lm.a.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double h = opts.relative_step * std::max(1.0, std::abs(y0(k)));
        Eigen::VectorXd yp = y0;
        Eigen::VectorXd ym = y0;
        yp(k) += h;
        ym(k) -= h;
        lm.a.col(k) = (g(yp) - g(ym)) / (2.0 * h);
    }
    if (!lm.a.allFinite()) throw NumericError("linearize: non-finite state matrix");
    return lm;
}

LinearModel linearize(const Scenario& scenario, const LinearizeOptions& opts) {
    SystemModel model(scenario);
    const std::vector<double> x0 = model.initialize();
    return linearize(model, x0, opts);
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw DomainError("eigenvalues: matrix must be square");
    if (a.rows() == 0) return {};
    if (!a.allFinite()) throw NumericError("eigenvalues: non-finite matrix");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    if (solver.info() != Eigen::Success) throw NumericError("eigenvalues: solver did not converge");
    // Real eigenvalues stand alone; each complex pair is kept as one unit.
    std::vector<std::complex<double>> units;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const auto z = solver.eigenvalues()(i);
        if (z.imag() == 0.0) {
            units.push_back(z);
        } else if (z.imag() > 0.0) {
            units.push_back(z);
        }
    }
    std::sort(units.begin(), units.end(), [](const std::complex<double>& x, const std::complex<double>& y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() < y.imag();
    });
    std::vector<std::complex<double>> ev;
    ev.reserve(static_cast<std::size_t>(a.rows()));
    for (const auto& z : units) {
        ev.push_back(z);
        if (z.imag() > 0.0) ev.push_back(std::conj(z));
    }
    return ev;
}

std::vector<std::complex<double>> eigenvalues(const LinearModel& model) {
    return eigenvalues(model.a);
}

SystemModel post_event_model(const Scenario& tmpl, double scr, double brake_mw) {
    Scenario s = tmpl;
    if (!s.topology.grid) throw ConfigError("eigen sweep: template needs a grid equivalent to vary the SCR");
    if (!(brake_mw >= 0.0)) throw ConfigError("eigen sweep: brake sizes must be >= 0");
    s.topology.grid->scr = scr;
    s.brake.schedule.stages.clear();
    if (brake_mw > 0.0) {
        BrakeStage st;
        st.name = "eigen_brake";
        st.rating_mw = brake_mw;
        s.brake.schedule.stages.push_back(st);
        if (s.brake.bus.empty()) s.brake.bus = s.topology.pcc_bus;
    }
    s.events.shunt_switches.clear();
    s.events.voltage_dips.clear();

    SystemModel model(s);
    ClusterLoadState loads = model.loads();
    for (const auto& e : s.events.load_steps) {
        LoadStepEvent ev;
        if (e.buildings.empty()) {
            for (std::size_t b = 0; b < model.buildings().size(); ++b) ev.buildings.push_back(b);
        } else {
            for (int b : e.buildings) ev.buildings.push_back(static_cast<std::size_t>(b));
        }
        ev.transfer = e.kind == LoadStepKind::PlantFault ? LoadTransfer::WholeBuilding : LoadTransfer::ItOnly;
        for (auto b : ev.buildings) {
            ev.delta_p_mw += loads.it_online_mw[b];
            if (ev.transfer == LoadTransfer::WholeBuilding) ev.delta_p_mw += loads.motor_online_mw[b] + loads.static_online_mw[b];
        }
        loads = apply_load_step(loads, ev);
    }
    model.set_loads(loads);
    if (brake_mw > 0.0) {
        auto& sh = model.shunts()[model.brake_shunt(0)];
        sh.command(BreakerCommand::Close, 0.0, 0.0, nullptr);
        sh.advance(0.0);
        model.invalidate();
    }
    return model;
}

std::vector<EigenPoint> eigen_sweep(const Scenario& tmpl, const std::vector<double>& scr_values,
                                    const std::vector<double>& brake_mw, std::size_t workers) {
    if (scr_values.empty() || brake_mw.empty()) throw ConfigError("eigen sweep: both axes need at least one value");
    for (double s : scr_values) {
        if (!(s > 0.0)) throw ConfigError("eigen sweep: scr values must be > 0");
    }
    std::vector<EigenPoint> points;
    for (double s : scr_values) {
        for (double b : brake_mw) {
            EigenPoint p;
            p.scr = s;
            p.brake_mw = b;
            points.push_back(p);
        }
    }
    if (workers == 0) workers = default_workers();
    parallel_for(points.size(), workers, [&](std::size_t i) {
        auto& p = points[i];
        try {
            SystemModel model = post_event_model(tmpl, p.scr, p.brake_mw);
            const std::vector<double> x0 = model.initialize();
            p.eigenvalues = eigenvalues(linearize(model, x0));
            if (p.eigenvalues.empty()) throw NumericError("empty spectrum");
            p.dominant = p.eigenvalues.front();
            p.stable = std::all_of(p.eigenvalues.begin(), p.eigenvalues.end(),
                                   [](const std::complex<double>& z) { return z.real() < 0.0; });
        } catch (const std::exception& e) {
            p.error = e.what();
        }
    });
    return points;
}

}  // namespace gridbrake
