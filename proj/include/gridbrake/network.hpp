#pragma once

// Algebraic phasor network: admittance matrix, grid Thevenin equivalent,
// switched shunts, and a Newton solver for the bus voltages.

#include "gridbrake/models.hpp"
#include "gridbrake/units.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gridbrake {

struct LineParams {
    std::string from;
    std::string to;
    double resistance_per_km = 1e-4;  ///< pu/km on the system base
    double inductance_per_km = 1e-3;  ///< series reactance, pu/km on the system base
    double length_km = 50.0;
    int parallel_count = 2;

    Complex impedance() const;
    void validate() const;
    bool operator==(const LineParams&) const = default;
};

struct GridEquivalent {
    std::string bus;
    double scr = 2.0;
    double x_over_r = 10.0;
    double source_voltage_pu = 1.0;

    void validate() const;
    bool operator==(const GridEquivalent&) const = default;
};

/// |Z| = 1 / scr on the system base with angle atan(x/r).
Complex scr_to_thevenin(double scr, double x_over_r, const SystemBase& base);

// ---------------------------------------------------------------------------
// Switched shunts
// ---------------------------------------------------------------------------

enum class ShuntKind { BrakeResistor, CapacitorBank };
enum class BreakerCommand { Close, Open };

struct BreakerTransition {
    double effective_time = 0.0;
    bool closed = false;
};

/// Log line produced by breaker bookkeeping.
struct ShuntLogEntry {
    double time = 0.0;
    std::string kind;
    std::string detail;
};

class ShuntElement {
public:
    ShuntElement(std::string name, ShuntKind kind, std::size_t bus, Complex admittance, bool closed);

    const std::string& name() const { return name_; }
    ShuntKind kind() const { return kind_; }
    std::size_t bus() const { return bus_; }
    Complex admittance() const { return admittance_; }
    bool closed() const { return closed_; }
    const std::vector<BreakerTransition>& pending() const { return pending_; }

    /// Schedules a breaker transition effective at command_time + delay. A later
    /// command supersedes pending transitions at or after its effective time.
    void command(BreakerCommand cmd, double command_time, double delay, std::vector<ShuntLogEntry>* log);

    /// Applies every pending transition effective at or before `t`.
    std::vector<BreakerTransition> advance(double t);

    /// Next pending effective time, if any.
    std::optional<double> next_transition() const;

private:
    bool state_after_pending() const;

    std::string name_;
    ShuntKind kind_;
    std::size_t bus_;
    Complex admittance_;
    bool closed_;
    std::vector<BreakerTransition> pending_;
};

/// Free-function form of ShuntElement::command.
void set_shunt(ShuntElement& element, BreakerCommand cmd, double command_time, double breaker_delay,
               std::vector<ShuntLogEntry>* log = nullptr);

// ---------------------------------------------------------------------------
// Network problem and solver
// ---------------------------------------------------------------------------

using ComplexMatrix = Eigen::MatrixXcd;

/// Voltage-dependent current injection at one bus (into the network).
struct NonlinearInjection {
    std::size_t bus = 0;
    std::function<Complex(Complex)> current;
};

struct NetworkProblem {
    ComplexMatrix y;                                ///< bus admittance matrix incl. Norton admittances
    std::vector<Complex> source_current;            ///< Norton currents into each bus
    std::vector<NonlinearInjection> nonlinear;
    std::vector<std::optional<Complex>> fixed_voltage;
    std::vector<bool> has_source;                   ///< bus hosts an energised source
    std::vector<std::pair<std::size_t, std::size_t>> branches;  ///< for island detection

    explicit NetworkProblem(std::size_t n = 0);
    std::size_t size() const { return source_current.size(); }
    void add_branch(std::size_t i, std::size_t j, Complex z);
    void add_shunt(std::size_t i, Complex y_shunt);
};

struct SolverOptions {
    double tolerance = 1e-11;
    int max_iterations = 40;
};

struct NetworkSolution {
    std::vector<Complex> v;
    int iterations = 0;
    double residual = 0.0;
};

/// Current mismatch Y V - I_src - I_nl(V) per bus (fixed-voltage buses report the
/// current the fixed source must supply, with opposite sign).
std::vector<Complex> current_mismatch(const NetworkProblem& p, const std::vector<Complex>& v);

/// Newton solution of the nodal equations. Throws IslandingError when a
/// connected component has no source and SolverError on non-convergence.
NetworkSolution solve_bus_voltages(const NetworkProblem& p, const std::vector<Complex>& initial,
                                   const SolverOptions& opts = {});

}  // namespace gridbrake
