#pragma once

// Fixed-step RK4 time-domain engine, trace metrics and parallel sweeps.

#include "gridbrake/braking.hpp"
#include "gridbrake/scenario.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gridbrake {

struct TraceEvent {
    double time = 0.0;
    std::string kind;
    std::string detail;
    bool operator==(const TraceEvent&) const = default;
};

struct SimTrace {
    std::string scenario_name;
    double f_nominal_hz = 60.0;
    double s_base_mva = 1000.0;
    double dt_s = 0.0;
    std::vector<double> time;
    std::vector<std::string> channel_names;
    std::vector<std::vector<double>> channels;
    std::vector<TraceEvent> events;
    std::vector<BrakeStage> stages;                 ///< with final thermal accounting
    std::vector<BrakeCommandRecord> brake_commands;
    std::vector<std::string> state_names;
    std::vector<double> initial_state;
    std::vector<double> final_state;
    double motor_pullout_slip = 1.0;
    bool failed = false;
    std::string failure;

    std::size_t size() const { return time.size(); }
    bool has_channel(const std::string& name) const;
    /// Throws ConfigError naming the channel when absent.
    const std::vector<double>& channel(const std::string& name) const;
};

/// Channel names `run` records for a scenario, in trace column order.
std::vector<std::string> trace_channels(const Scenario& scenario);

/// Equilibrium state of a scenario before any event.
struct OperatingPoint {
    std::vector<std::string> state_names;
    std::vector<double> x;
    std::vector<double> bus_v_pu;
    double sg_p_pu = 0.0;
    double gfm_p_pu = 0.0;
    double grid_p_pu = 0.0;
    double load_p_pu = 0.0;
    double line_loss_pu = 0.0;
    double max_derivative = 0.0;
    double network_residual = 0.0;
};

OperatingPoint find_equilibrium(const Scenario& scenario);

/// Integrates the scenario. Numeric failure returns the partial trace with
/// `failed` set; configuration problems throw.
SimTrace run(const Scenario& scenario);

struct TraceMetrics {
    double peak_sg_p_pu = 0.0;
    double peak_freq_hz = 0.0;
    double peak_abs_df_hz = 0.0;
    double max_rocof_hz_per_s = 0.0;
    std::optional<double> settling_time_s;   ///< none when still outside the band at the end
    double reference_time_s = 0.0;           ///< final brake removal, or trace start
    double oscillation_energy = 0.0;         ///< integral of (f - f_nom)^2 after the reference, Hz^2 s
    double sustained_deviation_hz = 0.0;     ///< mean |f - f_nom| over the final 2 s
    double brake_energy_mj = 0.0;            ///< trace-integrated brake dissipation
};

TraceMetrics metrics(const SimTrace& trace, double band_hz);

/// Brake dissipation integrated from the trace with sample-and-hold between
/// grid points, the convention under which breakers switch.
double trace_brake_energy_mj(const SimTrace& trace);

struct MotorRideThrough {
    double pre_event_slip = 0.0;
    double max_slip = 0.0;
    double final_slip = 0.0;
    double recovery_start_s = 0.0;
    std::optional<double> recovered_after_s;  ///< time after recovery to re-enter the band
    bool stalled = false;
};

/// Slip recovery after the last voltage dip (or the last load step when no
/// dip exists). `band` is the allowed |slip - pre-event slip|.
MotorRideThrough assess_motor_ride_through(const SimTrace& trace, double band = 0.01);

enum class SweepAxis { GenerationMix, BrakeSize, Schedule };

/// Expands a template along one axis. Mix values are SG shares in [0, 1];
/// brake values are total MW of a single stage; schedule values are the
/// single stage's removal offset in seconds.
std::vector<Scenario> sweep_variants(const Scenario& tmpl, SweepAxis axis, const std::vector<double>& values);

struct SweepResult {
    std::string label;
    std::optional<TraceMetrics> metrics;
    std::string error;
};

/// Runs every variant, concurrently when `workers` > 1 (0 selects the
/// GRIDBRAKE_WORKERS environment variable or the hardware concurrency).
std::vector<SweepResult> sweep(const std::vector<Scenario>& variants, std::size_t workers = 0);

/// Worker count from GRIDBRAKE_WORKERS, else the hardware concurrency.
std::size_t default_workers();

}  // namespace gridbrake
