#pragma once

// Energy-constrained maximization of K3 ("canonical" K3):
//
//   K3_opt = max_{theta, phi, dt} K3   subject to   Delta E(theta, phi, dt) = delta
//
// Search strategy: a dense (theta, phi, dt) grid is evaluated once per
// (state, model). For a target delta, grid points inside the band
// |Delta E - delta| <= tolerance and sign changes of Delta E - delta between
// neighbouring grid points seed a few local refinements. Each refinement
// eliminates the coordinate along which Delta E varies fastest (solving the
// constraint for it by Newton steps) and runs Nelder-Mead over the other two,
// with a penalty on any residual left above the tolerance.

#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "lgi/dynamics.hpp"
#include "lgi/protocol.hpp"
#include "lgi/quantum.hpp"

namespace lgi {

struct ConstraintSpec {
    /// Target energy cost delta, units of J.
    double delta = 0.0;
    /// Half-width of the accepted band around delta, units of J.
    double tolerance = 1e-4;

    void validate() const;
};

struct SearchConfig {
    int theta_points = 64;
    int phi_points = 32;
    int dt_points = 256;
    /// Upper end of the dt window (0, dt_max], units of hbar/J.
    double dt_max = 2.0 * std::numbers::pi;
    int refine_iterations = 200;
    /// Penalty per unit J of constraint violation beyond the tolerance.
    double penalty_weight = 1e3;
    /// Number of distinct grid seeds refined per target delta.
    int refine_starts = 4;

    void validate() const;
    bool operator==(const SearchConfig&) const = default;
};

/// Smallest dt the search evaluates; the window is open at 0.
inline constexpr double kMinInterval = 1e-9;

struct SearchPoint {
    double theta = 0.0;
    double phi = 0.0;
    double dt = 0.0;

    bool operator==(const SearchPoint&) const = default;
};

/// Closed interval of reachable energy costs, units of J.
struct EnergyBand {
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double delta, double tolerance = 0.0) const {
        return delta >= lower - tolerance && delta <= upper + tolerance;
    }
    /// Signed gap (nearest edge - delta); zero inside the band.
    double gap(double delta) const;
};

struct OptimizationResult {
    bool feasible = false;
    /// Present iff feasible.
    std::optional<double> k3_opt;
    std::optional<SearchPoint> argmax;
    std::optional<LGOutcome> outcome;
    /// Delta E(argmax) - delta when feasible, else the signed gap to the reachable band.
    double constraint_residual = 0.0;
    std::size_t evaluations = 0;
};

struct FeasibilityResult {
    bool feasible = false;
    std::optional<SearchPoint> witness;
    double residual = 0.0;
    EnergyBand attained;
};

struct UnconstrainedResult {
    double k3_max = 0.0;
    SearchPoint argmax;
    std::size_t evaluations = 0;
};

/// One (state, model, search grid) instance. Construction evaluates the grid
/// and the reachable energy band; every query afterwards is const and
/// thread-safe, so a sweep can reuse one problem for a whole delta column.
class CanonicalProblem {
public:
    CanonicalProblem(const DensityMatrix& rho, const DephasingModel& model,
                     const SearchConfig& config = {});

    const DensityMatrix& state() const { return rho_; }
    const DephasingModel& model() const { return evolution_.model(); }
    const SearchConfig& config() const { return config_; }

    /// Full protocol at one point (theta and phi are reduced, dt clamped to
    /// [kMinInterval, dt_max]).
    LGOutcome evaluate(const SearchPoint& point) const;

    /// Reachable Delta E over the search window (grid plus local refinement).
    const EnergyBand& energy_band() const { return band_; }

    FeasibilityResult feasibility(const ConstraintSpec& spec) const;
    OptimizationResult optimize(const ConstraintSpec& spec) const;
    UnconstrainedResult unconstrained_max() const;

    std::size_t grid_size() const { return k3_.size(); }
    const std::vector<double>& theta_grid() const { return thetas_; }
    const std::vector<double>& phi_grid() const { return phis_; }
    const std::vector<double>& dt_grid() const { return dts_; }

private:
    struct Evaluated;
    struct Candidate;

    std::size_t index(int t, int p, int d) const {
        return (static_cast<std::size_t>(t) * phis_.size() + p) * dts_.size() + d;
    }
    SearchPoint grid_point(int t, int p, int d) const { return {thetas_[t], phis_[p], dts_[d]}; }
    SearchPoint normalized(const SearchPoint& point) const;

    Evaluated eval(const SearchPoint& point, std::size_t& counter) const;
    std::vector<Candidate> seeds(const ConstraintSpec& spec) const;
    std::vector<Candidate> pick_distinct(std::vector<Candidate> all, int count) const;
    std::optional<Evaluated> witness(const ConstraintSpec& spec, std::size_t& counter) const;
    std::optional<Evaluated> settle(const Candidate& seed, const ConstraintSpec& spec,
                                    std::size_t& counter) const;
    Evaluated project(const SearchPoint& start, int axis, double delta,
                      std::size_t& counter) const;
    Evaluated bisect(const SearchPoint& a, const SearchPoint& b, double delta,
                     std::size_t& counter) const;
    Evaluated refine(const Evaluated& start, const ConstraintSpec& spec,
                     std::size_t& counter) const;
    Evaluated extremize(double sign, bool energy, std::size_t& counter) const;

    DensityMatrix rho_;
    Evolution evolution_;
    SearchConfig config_;
    std::vector<double> thetas_;
    std::vector<double> phis_;
    std::vector<double> dts_;
    std::vector<double> k3_;
    std::vector<double> energy_;
    EnergyBand band_;
    SearchPoint band_lower_point_;
    SearchPoint band_upper_point_;
    SearchPoint grid_lower_point_;
    SearchPoint grid_upper_point_;
    double grid_lower_ = 0.0;
    double grid_upper_ = 0.0;
};

/// Closed-form accessible band for |psi(alpha)> without noise: [-alpha^2, 1 - alpha^2] (units of J).
EnergyBand feasible_bounds_pure(double alpha);

FeasibilityResult feasible_numeric(const DensityMatrix& rho, const DephasingModel& model,
                                   const ConstraintSpec& spec, const SearchConfig& config = {});

OptimizationResult k3_opt(const DensityMatrix& rho, const DephasingModel& model,
                          const ConstraintSpec& spec, const SearchConfig& config = {});

/// -tr(rho H): the energy cost at which K3_opt peaks when the dephasing axis is
/// the energy axis or orthogonal to it.
double max_violation_delta(const DensityMatrix& rho, double J = 1.0);

struct MaxLineReport {
    /// No delta in the grid was feasible.
    bool degenerate = false;
    double argmax_delta = 0.0;
    double predicted_delta = 0.0;
    double deviation = 0.0;
    /// Grid spacing around the argmax.
    double grid_step = 0.0;
    bool shifted = false;
    double k3_at_argmax = 0.0;
    /// K3_opt evaluated exactly at the predicted delta.
    std::optional<double> k3_on_line;
    std::vector<double> delta_grid;
    std::vector<std::optional<double>> profile;
};

/// Scans K3_opt over an ascending delta grid and compares its argmax with
/// -tr(rho H). `shifted` is set when they differ by more than one grid step.
MaxLineReport verify_theorem_max_line(const DensityMatrix& rho, const DephasingModel& model,
                                      std::span<const double> delta_grid,
                                      const SearchConfig& config = {}, double tolerance = 1e-4);

/// `count` evenly spaced values from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, int count);

}  // namespace lgi
