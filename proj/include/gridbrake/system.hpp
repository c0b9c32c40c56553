#pragma once

// Assembled dynamic model of one scenario: state layout, discrete switching
// state, network coupling, and equilibrium initialisation. Shared by the
// time-domain engine and the small-signal analysis.

#include "gridbrake/network.hpp"
#include "gridbrake/protection.hpp"
#include "gridbrake/scenario.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gridbrake {

/// Instantaneous quantities derived from a state vector and its network solution.
struct Observation {
    double freq_hz = 0.0;
    double sg_p_pu = 0.0;   ///< machine base
    double sg_q_pu = 0.0;
    double sg_omega_pu = 0.0;
    double sg_pm_pu = 0.0;
    double gfm_p_pu = 0.0;  ///< machine base
    double gfm_q_pu = 0.0;
    double gfm_i_pu = 0.0;
    double gfm_omega_pu = 0.0;
    double v_pcc_pu = 0.0;
    double grid_p_pu = 0.0;   ///< system base, grid equivalent into network
    double load_p_pu = 0.0;   ///< system base, grid-side cluster demand
    double brake_p_pu = 0.0;  ///< system base
    double line_loss_pu = 0.0;
    double generation_p_pu = 0.0;  ///< SG + GFM + grid, system base
    double motor_slip = 0.0;
    std::vector<double> bus_v_pu;
    std::vector<double> stage_p_pu;
    std::vector<bool> stage_closed;
    std::vector<bool> capacitor_closed;
};

class SystemModel {
public:
    explicit SystemModel(Scenario scenario);

    const Scenario& scenario() const { return scenario_; }
    std::size_t bus_count() const { return scenario_.topology.buses.size(); }
    std::size_t state_size() const { return state_names_.size(); }
    const std::vector<std::string>& state_names() const { return state_names_; }
    /// Indices of states that are absolute phasor angles.
    const std::vector<std::size_t>& angle_states() const { return angle_states_; }
    std::optional<std::size_t> sg_offset() const { return sg_offset_; }
    std::optional<std::size_t> gfm_offset() const { return gfm_offset_; }
    bool has_infinite_bus() const { return scenario_.topology.grid.has_value(); }

    // -- discrete state ----------------------------------------------------
    const std::vector<DataCenterBuilding>& buildings() const { return buildings_; }
    const ClusterLoadState& loads() const { return loads_; }
    void set_loads(ClusterLoadState loads);
    std::vector<ShuntElement>& shunts() { return shunts_; }
    const std::vector<ShuntElement>& shunts() const { return shunts_; }
    std::optional<std::size_t> shunt_index(const std::string& name) const;
    /// Index into shunts() of brake stage k.
    std::size_t brake_shunt(std::size_t stage) const { return brake_first_ + stage; }
    std::size_t brake_stage_count() const { return shunts_.size() - brake_first_; }
    std::size_t capacitor_count() const { return brake_first_; }
    void set_voltage_override(std::optional<std::pair<std::size_t, Complex>> ov);
    const std::optional<std::pair<std::size_t, Complex>>& voltage_override() const { return override_; }
    /// Call after changing shunt states directly.
    void invalidate() { y_valid_ = false; }

    // -- continuous evaluation ----------------------------------------------
    NetworkProblem network_problem(std::span<const double> x) const;
    /// Solves the network; `warm` is used as the starting point and updated.
    NetworkSolution solve_network(std::span<const double> x, std::vector<Complex>& warm) const;
    void derivatives(std::span<const double> x, const NetworkSolution& net, std::span<double> dx) const;
    void derivatives(std::span<const double> x, std::span<double> dx, std::vector<Complex>& warm) const;
    Observation observe(std::span<const double> x, const NetworkSolution& net) const;
    /// Machine-base current supplied by the synchronous machine.
    Complex sg_current_machine(std::span<const double> x, const NetworkProblem& p, const NetworkSolution& net) const;
    double motor_pullout_slip() const { return pullout_slip_; }

    // -- initialisation ------------------------------------------------------
    /// Power flow plus device back-substitution. Returns the equilibrium state
    /// and fixes every controller setpoint.
    std::vector<double> initialize();

    SyncGenSetpoints sg_setpoints;
    GfmSetpoints gfm_setpoints;
    SyncGenState sg_frozen;
    std::vector<MotorSetpoints> motor_setpoints;

    const SyncGenParams& sg_params() const { return sg_; }
    const GfmParams& gfm_params() const { return gfm_; }
    const std::vector<InductionMotorParams>& motor_params() const { return motors_; }
    const std::vector<std::size_t>& motor_building() const { return motor_building_; }
    std::size_t motor_offset(std::size_t m) const { return motor_offset_.at(m); }

private:
    void rebuild_y() const;
    bool motor_connected(std::size_t m) const;
    Complex cluster_static_demand() const;
    double omega_b() const;

    Scenario scenario_;
    std::vector<DataCenterBuilding> buildings_;
    ClusterLoadState loads_;
    std::vector<ShuntElement> shunts_;
    std::size_t brake_first_ = 0;
    std::optional<std::pair<std::size_t, Complex>> override_;

    SyncGenParams sg_;
    GfmParams gfm_;
    std::vector<InductionMotorParams> motors_;
    std::vector<std::size_t> motor_building_;
    double pullout_slip_ = 1.0;

    std::size_t sg_bus_ = 0, gfm_bus_ = 0, cluster_bus_ = 0, pcc_bus_ = 0, grid_bus_ = 0;
    Complex grid_y_{};
    Complex grid_e_{};

    std::optional<std::size_t> sg_offset_, gfm_offset_;
    std::vector<std::size_t> motor_offset_;
    std::vector<std::string> state_names_;
    std::vector<std::size_t> angle_states_;

    mutable ComplexMatrix y_;
    mutable bool y_valid_ = false;
};

}  // namespace gridbrake
