#include "gridbrake/network.hpp"

#include "gridbrake/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace gridbrake {

Complex LineParams::impedance() const {
    return Complex(resistance_per_km, inductance_per_km) * length_km / static_cast<double>(parallel_count);
}

void LineParams::validate() const {
    if (!(length_km > 0.0)) throw ConfigError("line " + from + "-" + to + ": length_km must be > 0");
    if (parallel_count < 1) throw ConfigError("line " + from + "-" + to + ": parallel_count must be >= 1");
    if (!(resistance_per_km >= 0.0) || !(inductance_per_km >= 0.0))
        throw ConfigError("line " + from + "-" + to + ": per-km parameters must be >= 0");
    if (resistance_per_km == 0.0 && inductance_per_km == 0.0)
        throw ConfigError("line " + from + "-" + to + ": zero impedance");
    if (from == to) throw ConfigError("line " + from + "-" + to + ": endpoints must differ");
}

void GridEquivalent::validate() const {
    if (!(scr > 0.0)) throw ConfigError("grid: scr must be > 0");
    if (!(x_over_r > 0.0)) throw ConfigError("grid: x_over_r must be > 0");
    if (!(source_voltage_pu > 0.0)) throw ConfigError("grid: source_voltage_pu must be > 0");
}

Complex scr_to_thevenin(double scr, double x_over_r, const SystemBase& base) {
    base.validate();
    if (!(scr > 0.0)) throw DomainError("scr_to_thevenin: scr must be > 0");
    if (!(x_over_r > 0.0)) throw DomainError("scr_to_thevenin: x/r must be > 0");
    return std::polar(1.0 / scr, std::atan(x_over_r));
}

// ---------------------------------------------------------------------------

ShuntElement::ShuntElement(std::string name, ShuntKind kind, std::size_t bus, Complex admittance, bool closed)
    : name_(std::move(name)), kind_(kind), bus_(bus), admittance_(admittance), closed_(closed) {
    if (!std::isfinite(admittance.real()) || !std::isfinite(admittance.imag()))
        throw ConfigError("shunt " + name_ + ": admittance must be finite");
    if (kind == ShuntKind::BrakeResistor && (admittance.imag() != 0.0 || !(admittance.real() > 0.0)))
        throw ConfigError("shunt " + name_ + ": brake resistors are purely conductive");
    if (kind == ShuntKind::CapacitorBank && (admittance.real() != 0.0))
        throw ConfigError("shunt " + name_ + ": capacitor banks are purely susceptive");
}

bool ShuntElement::state_after_pending() const {
    return pending_.empty() ? closed_ : pending_.back().closed;
}

void ShuntElement::command(BreakerCommand cmd, double command_time, double delay, std::vector<ShuntLogEntry>* log) {
    if (!(delay >= 0.0)) throw DomainError("shunt " + name_ + ": breaker delay must be >= 0");
    const bool target = cmd == BreakerCommand::Close;
    const double effective = command_time + delay;
    const char* verb = target ? "close" : "open";

    auto first_superseded = std::find_if(pending_.begin(), pending_.end(),
                                         [&](const BreakerTransition& tr) { return tr.effective_time >= effective; });
    if (first_superseded != pending_.end()) {
        if (log) {
            std::ostringstream os;
            os << name_ << " " << verb << " supersedes " << std::distance(first_superseded, pending_.end())
               << " pending transition(s)";
            log->push_back({command_time, "breaker_override", os.str()});
        }
        pending_.erase(first_superseded, pending_.end());
    }
    if (state_after_pending() == target) {
        if (log) log->push_back({command_time, "breaker_noop", name_ + " already " + (target ? "closed" : "open")});
        return;
    }
    pending_.push_back({effective, target});
    if (log) {
        std::ostringstream os;
        os.precision(12);
        os << name_ << " " << verb << " effective " << effective;
        log->push_back({command_time, "breaker_command", os.str()});
    }
}

std::vector<BreakerTransition> ShuntElement::advance(double t) {
    std::vector<BreakerTransition> applied;
    constexpr double eps = 1e-9;
    while (!pending_.empty() && pending_.front().effective_time <= t + eps) {
        closed_ = pending_.front().closed;
        applied.push_back(pending_.front());
        pending_.erase(pending_.begin());
    }
    return applied;
}

std::optional<double> ShuntElement::next_transition() const {
    if (pending_.empty()) return std::nullopt;
    return pending_.front().effective_time;
}

void set_shunt(ShuntElement& element, BreakerCommand cmd, double command_time, double breaker_delay,
               std::vector<ShuntLogEntry>* log) {
    element.command(cmd, command_time, breaker_delay, log);
}

// ---------------------------------------------------------------------------

NetworkProblem::NetworkProblem(std::size_t n)
    : y(ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
      source_current(n, Complex{}),
      fixed_voltage(n),
      has_source(n, false) {}

void NetworkProblem::add_branch(std::size_t i, std::size_t j, Complex z) {
    const Complex yb = 1.0 / z;
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    y(a, a) += yb;
    y(b, b) += yb;
    y(a, b) -= yb;
    y(b, a) -= yb;
    branches.emplace_back(i, j);
}

void NetworkProblem::add_shunt(std::size_t i, Complex y_shunt) {
    const auto a = static_cast<Eigen::Index>(i);
    y(a, a) += y_shunt;
}

std::vector<Complex> current_mismatch(const NetworkProblem& p, const std::vector<Complex>& v) {
    const std::size_t n = p.size();
    std::vector<Complex> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex acc{};
        for (std::size_t j = 0; j < n; ++j) acc += p.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * v[j];
        r[i] = acc - p.source_current[i];
    }
    for (const auto& inj : p.nonlinear) r[inj.bus] -= inj.current(v[inj.bus]);
    return r;
}

namespace {

void check_islands(const NetworkProblem& p) {
    const std::size_t n = p.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (auto [i, j] : p.branches) parent[find(i)] = find(j);
    std::vector<bool> energised(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (p.has_source[i] || p.fixed_voltage[i]) energised[find(i)] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!energised[find(i)]) {
            throw IslandingError("network island without a voltage source (bus index " + std::to_string(i) + ")");
        }
    }
}

}  // namespace

NetworkSolution solve_bus_voltages(const NetworkProblem& p, const std::vector<Complex>& initial,
                                   const SolverOptions& opts) {
    const std::size_t n = p.size();
    if (n == 0) throw ConfigError("network has no buses");
    check_islands(p);

    NetworkSolution sol;
    sol.v.assign(n, Complex(1.0, 0.0));
    if (initial.size() == n) sol.v = initial;
    std::vector<std::size_t> unknown;
    for (std::size_t i = 0; i < n; ++i) {
        if (p.fixed_voltage[i]) {
            sol.v[i] = *p.fixed_voltage[i];
        } else {
            unknown.push_back(i);
        }
    }
    if (unknown.empty()) return sol;

    const auto m = static_cast<Eigen::Index>(unknown.size());
    std::vector<Eigen::Index> slot(n, -1);
    for (Eigen::Index k = 0; k < m; ++k) slot[unknown[static_cast<std::size_t>(k)]] = k;

    // Linear part of the Jacobian: [[G, -B], [B, G]] over the unknown buses.
    Eigen::MatrixXd j_lin(2 * m, 2 * m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            const Complex yab = p.y(static_cast<Eigen::Index>(unknown[static_cast<std::size_t>(a)]),
                                    static_cast<Eigen::Index>(unknown[static_cast<std::size_t>(b)]));
            j_lin(a, b) = yab.real();
            j_lin(a, m + b) = -yab.imag();
            j_lin(m + a, b) = yab.imag();
            j_lin(m + a, m + b) = yab.real();
        }
    }

    Eigen::VectorXd f(2 * m);
    auto evaluate = [&]() {
        const auto r = current_mismatch(p, sol.v);
        double worst = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            const Complex rk = r[unknown[static_cast<std::size_t>(k)]];
            f(k) = rk.real();
            f(m + k) = rk.imag();
            worst = std::max(worst, std::abs(rk));
        }
        return worst;
    };

    sol.residual = evaluate();
    const bool linear = p.nonlinear.empty();
    while (sol.residual > opts.tolerance) {
        if (sol.iterations >= opts.max_iterations || !std::isfinite(sol.residual)) {
            std::ostringstream os;
            os << "network solution did not converge after " << sol.iterations
               << " iterations (max current mismatch " << sol.residual << " pu)";
            throw SolverError(os.str(), sol.iterations, sol.residual);
        }
        Eigen::MatrixXd jac = j_lin;
        if (!linear) {
            constexpr double h = 1e-7;
            for (const auto& inj : p.nonlinear) {
                const Eigen::Index k = slot[inj.bus];
                if (k < 0) continue;
                const Complex v0 = sol.v[inj.bus];
                const Complex d_re = (inj.current(v0 + h) - inj.current(v0 - h)) / (2.0 * h);
                const Complex d_im = (inj.current(v0 + Complex(0, h)) - inj.current(v0 - Complex(0, h))) / (2.0 * h);
                jac(k, k) -= d_re.real();
                jac(k, m + k) -= d_im.real();
                jac(m + k, k) -= d_re.imag();
                jac(m + k, m + k) -= d_im.imag();
            }
        }
        const Eigen::VectorXd dx = jac.partialPivLu().solve(-f);
        if (!dx.allFinite()) throw SolverError("singular network Jacobian", sol.iterations, sol.residual);
        for (Eigen::Index k = 0; k < m; ++k) sol.v[unknown[static_cast<std::size_t>(k)]] += Complex(dx(k), dx(m + k));
        ++sol.iterations;
        sol.residual = evaluate();
    }
    return sol;
}

}  // namespace gridbrake
