#pragma once

// Numerical linearization about an equilibrium and eigenvalue sweeps over
// grid strength and brake size.

#include "gridbrake/scenario.hpp"
#include "gridbrake/system.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace gridbrake {

struct LinearModel {
    std::vector<std::string> state_names;
    Eigen::MatrixXd a;
    std::vector<double> operating_point;  ///< full state the model was built at
};

struct LinearizeOptions {
    double relative_step = 1e-6;
    double equilibrium_tolerance = 1e-6;
};

/// Central-difference state matrix, re-solving the network for every
/// perturbation. Without an infinite bus the reference angle is removed and
/// the remaining angles (and motor flux phasors) are taken relative to it.
LinearModel linearize(const SystemModel& model, const std::vector<double>& x0, const LinearizeOptions& opts = {});

/// Linearizes a scenario at its pre-event equilibrium.
LinearModel linearize(const Scenario& scenario, const LinearizeOptions& opts = {});

/// Full spectrum, sorted by descending real part with conjugate pairs adjacent
/// (positive imaginary part first).
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& a);
std::vector<std::complex<double>> eigenvalues(const LinearModel& model);

struct EigenPoint {
    double scr = 0.0;
    double brake_mw = 0.0;
    std::vector<std::complex<double>> eigenvalues;
    std::complex<double> dominant;
    bool stable = false;
    std::string error;  ///< non-empty when the point could not be computed
};

/// Operating point with the brake conducting and the template's load steps
/// already applied.
SystemModel post_event_model(const Scenario& tmpl, double scr, double brake_mw);

/// One point per (scr, brake) pair in scr-major order. Points that fail carry
/// `error` and the sweep continues.
std::vector<EigenPoint> eigen_sweep(const Scenario& tmpl, const std::vector<double>& scr_values,
                                    const std::vector<double>& brake_mw, std::size_t workers = 0);

}  // namespace gridbrake
