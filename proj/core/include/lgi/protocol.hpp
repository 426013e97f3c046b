#pragma once

// The three-time sequential-measurement protocol behind K3 = C12 + C23 - C13
// and its energy ledger. Measurement times are t1 = 0, t2 = dt, t3 = 2 dt.
//
// Each correlation leg (t_i, t_j) runs four stages and books the change of
// tr(H rho) across each of them:
//   1. evolution 0 -> t_i
//   2. measurement at t_i (outcome-averaged post-measurement state)
//   3. evolution t_i -> t_j
//   4. measurement at t_j
// The leg's energy cost is the telescoped sum, tr(H rho_final) - tr(H rho0).

#include <array>

#include "lgi/dynamics.hpp"
#include "lgi/quantum.hpp"

namespace lgi {

struct CorrelationRecord {
    /// C_ij = sum q_i q_j P(q_i, q_j).
    double correlation = 0.0;
    /// Delta E_ij in units of J.
    double energy_cost = 0.0;
    /// evolution to t_i, measurement at t_i, evolution t_i -> t_j, measurement at t_j.
    std::array<double, 4> step_energies{};
    /// P(+,+), P(+,-), P(-,+), P(-,-).
    std::array<double, 4> joint_probs{};
};

struct LGOutcome {
    double c12 = 0.0;
    double c23 = 0.0;
    double c13 = 0.0;
    double k3 = 0.0;
    double delta_e12 = 0.0;
    double delta_e23 = 0.0;
    double delta_e13 = 0.0;
    double delta_e_avg = 0.0;
};

/// Runs one leg from scratch. Requires 0 <= t_i < t_j.
CorrelationRecord two_time_correlation(const DensityMatrix& rho0,
                                       const MeasurementSetting& setting,
                                       const DephasingModel& model, double t_i, double t_j);

/// Same leg with precomputed channels: `to_first` = exp(L t_i), `between` = exp(L (t_j - t_i)).
CorrelationRecord two_time_correlation(const DensityMatrix& rho0, const ProjectorPair& proj,
                                       const Propagator& to_first, const Propagator& between);

/// Full K3 run. Requires dt > 0.
LGOutcome lg_run(const DensityMatrix& rho0, const MeasurementSetting& setting,
                 const DephasingModel& model, double dt);
LGOutcome lg_run(const DensityMatrix& rho0, const MeasurementSetting& setting,
                 const Evolution& evolution, double dt);
/// Hot path used by the optimizer: `step` = exp(L dt), `double_step` = exp(2 L dt).
LGOutcome lg_run(const DensityMatrix& rho0, const ProjectorPair& proj, const Propagator& step,
                 const Propagator& double_step);

// Closed forms, evaluated exactly as published (J = hbar = 1). They are
// regression oracles for the simulation above, not used by it.

/// 1 - 2 sin^2(theta) [2 sin^2(dt) - sin^2(2 dt)].
double k3_closed_form_noiseless(double theta, double dt);

/// cos^2(theta) + e^{-2 gamma dt} (2 e^{gamma dt} cos(dt) - cos(2 dt)) sin^2(theta).
///
/// Note the trigonometric arguments: the simulation (and the noiseless form)
/// precess at 2J/hbar, so the simulated K3(theta, dt, gamma) equals this
/// expression evaluated at (theta, 2 dt, gamma / 2).
double k3_closed_form_dephasing_z(double theta, double dt, double gamma);

enum class ClosedFormCase { Noiseless, ZDephasing };

struct EnergyCosts {
    double delta_e12 = 0.0;
    double delta_e23 = 0.0;
    double delta_e13 = 0.0;

    double average() const { return (delta_e12 + delta_e23 + delta_e13) / 3.0; }
};

/// Published per-leg energy costs, e.g.
///   Delta E_12 = J (p1 - p2)(cos^2 th + e^{-gamma dt} sin^2 th cos 2dt) cos th - tr(H rho)
/// with p1, p2 the outcome probabilities on rho and p1', p2' (for Delta E_23)
/// on rho(dt). The Noiseless case requires gamma == 0.
EnergyCosts delta_e_closed_forms(const DensityMatrix& rho, const MeasurementSetting& setting,
                                 double dt, double gamma, ClosedFormCase form, double J = 1.0);

}  // namespace lgi
