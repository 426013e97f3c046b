#include "lgi/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "lgi/errors.hpp"

namespace lgi {

namespace {

// tr(sigma_z m) for J = 1.
inline double energy_of(const ComplexMatrix2& m) { return (m(0, 0) - m(1, 1)).real(); }

inline double expectation(const ComplexMatrix2& projector, const ComplexMatrix2& m) {
    return (projector * m).trace().real();
}

CorrelationRecord run_leg(const ComplexMatrix2& rho0, const ProjectorPair& p,
                          const Propagator* to_first, const Propagator& between) {
    const ComplexMatrix2 rho_i = to_first ? to_first->apply(rho0) : rho0;

    // Unnormalized branches P_q rho P_q; their traces are the outcome probabilities.
    const ComplexMatrix2 branch_plus = p.plus * rho_i * p.plus;
    const ComplexMatrix2 branch_minus = p.minus * rho_i * p.minus;
    const ComplexMatrix2 evolved_plus = between.apply(branch_plus);
    const ComplexMatrix2 evolved_minus = between.apply(branch_minus);

    CorrelationRecord rec;
    rec.joint_probs = {expectation(p.plus, evolved_plus), expectation(p.minus, evolved_plus),
                       expectation(p.plus, evolved_minus), expectation(p.minus, evolved_minus)};
    for (double& q : rec.joint_probs) q = std::clamp(q, 0.0, 1.0);
    rec.correlation =
        rec.joint_probs[0] - rec.joint_probs[1] - rec.joint_probs[2] + rec.joint_probs[3];

    const ComplexMatrix2 after_first = branch_plus + branch_minus;
    const ComplexMatrix2 before_second = evolved_plus + evolved_minus;
    const ComplexMatrix2 after_second =
        p.plus * before_second * p.plus + p.minus * before_second * p.minus;

    const double e0 = energy_of(rho0);
    const double e1 = energy_of(rho_i);
    const double e2 = energy_of(after_first);
    const double e3 = energy_of(before_second);
    const double e4 = energy_of(after_second);
    rec.step_energies = {e1 - e0, e2 - e1, e3 - e2, e4 - e3};
    rec.energy_cost = e4 - e0;
    return rec;
}

LGOutcome assemble(const CorrelationRecord& r12, const CorrelationRecord& r23,
                   const CorrelationRecord& r13) {
    LGOutcome out;
    out.c12 = r12.correlation;
    out.c23 = r23.correlation;
    out.c13 = r13.correlation;
    out.k3 = out.c12 + out.c23 - out.c13;
    out.delta_e12 = r12.energy_cost;
    out.delta_e23 = r23.energy_cost;
    out.delta_e13 = r13.energy_cost;
    out.delta_e_avg = (out.delta_e12 + out.delta_e23 + out.delta_e13) / 3.0;
    return out;
}

void require_interval(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("lg_run: dt must be finite and > 0, got " + std::to_string(dt));
    }
}

}  // namespace

CorrelationRecord two_time_correlation(const DensityMatrix& rho0,
                                       const MeasurementSetting& setting,
                                       const DephasingModel& model, double t_i, double t_j) {
    if (!(t_i >= 0.0) || !(t_j > t_i) || !std::isfinite(t_j)) {
        throw DomainError("two_time_correlation: requires 0 <= t_i < t_j");
    }
    const Evolution evolution(model);
    return two_time_correlation(rho0, observable(setting), evolution.at(t_i),
                                evolution.at(t_j - t_i));
}

CorrelationRecord two_time_correlation(const DensityMatrix& rho0, const ProjectorPair& proj,
                                       const Propagator& to_first, const Propagator& between) {
    return run_leg(rho0.matrix(), proj, &to_first, between);
}

LGOutcome lg_run(const DensityMatrix& rho0, const MeasurementSetting& setting,
                 const DephasingModel& model, double dt) {
    require_interval(dt);
    return lg_run(rho0, setting, Evolution(model), dt);
}

LGOutcome lg_run(const DensityMatrix& rho0, const MeasurementSetting& setting,
                 const Evolution& evolution, double dt) {
    require_interval(dt);
    return lg_run(rho0, observable(setting), evolution.at(dt), evolution.at(2.0 * dt));
}

LGOutcome lg_run(const DensityMatrix& rho0, const ProjectorPair& proj, const Propagator& step,
                 const Propagator& double_step) {
    const ComplexMatrix2& rho = rho0.matrix();
    return assemble(run_leg(rho, proj, nullptr, step), run_leg(rho, proj, &step, step),
                    run_leg(rho, proj, nullptr, double_step));
}

double k3_closed_form_noiseless(double theta, double dt) {
    const double s_theta = std::sin(theta);
    const double s1 = std::sin(dt);
    const double s2 = std::sin(2.0 * dt);
    return 1.0 - 2.0 * s_theta * s_theta * (2.0 * s1 * s1 - s2 * s2);
}

double k3_closed_form_dephasing_z(double theta, double dt, double gamma) {
    if (!(gamma >= 0.0)) {
        throw DomainError("k3_closed_form_dephasing_z: gamma must be >= 0");
    }
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    // e^{-2 g dt}(2 e^{g dt} cos dt - cos 2dt), expanded so gamma = inf gives 0.
    const double damped = dt == 0.0 ? 1.0
                                     : 2.0 * std::exp(-gamma * dt) * std::cos(dt) -
                                           std::exp(-2.0 * gamma * dt) * std::cos(2.0 * dt);
    return c * c + damped * s * s;
}

EnergyCosts delta_e_closed_forms(const DensityMatrix& rho, const MeasurementSetting& setting,
                                 double dt, double gamma, ClosedFormCase form, double J) {
    if (!(gamma >= 0.0)) {
        throw DomainError("delta_e_closed_forms: gamma must be >= 0");
    }
    if (form == ClosedFormCase::Noiseless && gamma != 0.0) {
        throw DomainError("delta_e_closed_forms: the noiseless case requires gamma = 0");
    }
    if (!(dt >= 0.0)) {
        throw DomainError("delta_e_closed_forms: dt must be >= 0");
    }
    const double theta = setting.theta();
    const double half = 0.5 * theta;
    const Complex phase = std::polar(1.0, setting.phi());
    const Eigen::Vector2cd mu(std::cos(half), phase * std::sin(half));
    const Eigen::Vector2cd mu_perp(std::sin(half), -phase * std::cos(half));
    const auto sandwich = [](const Eigen::Vector2cd& v, const ComplexMatrix2& m) {
        return (v.adjoint() * m * v)(0, 0).real();
    };

    // rho(dt): unitary conjugation, or the damped-precession Bloch vector.
    ComplexMatrix2 rho_dt;
    if (form == ClosedFormCase::Noiseless) {
        const ComplexMatrix2 u = unitary_propagator(dt);
        rho_dt = u * rho.matrix() * u.adjoint();
    } else {
        rho_dt = mixed_state(dephasing_z_closed_form(to_bloch(rho), dt, gamma)).matrix();
    }

    const double p_diff = sandwich(mu, rho.matrix()) - sandwich(mu_perp, rho.matrix());
    const double p_diff_dt = sandwich(mu, rho_dt) - sandwich(mu_perp, rho_dt);

    const double c = std::cos(theta);
    const double s2 = std::sin(theta) * std::sin(theta);
    const double decay = form == ClosedFormCase::Noiseless ? 1.0 : std::exp(-gamma * dt);
    const double leg_single = c * c + decay * s2 * std::cos(2.0 * dt);
    const double leg_double = c * c + decay * decay * s2 * std::cos(4.0 * dt);
    const double initial = (hamiltonian(J) * rho.matrix()).trace().real();

    return {J * p_diff * leg_single * c - initial, J * p_diff_dt * leg_single * c - initial,
            J * p_diff * leg_double * c - initial};
}

}  // namespace lgi
