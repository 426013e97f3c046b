#include "lgi/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "lgi/errors.hpp"
#include "nelder_mead.hpp"

namespace lgi {

namespace {

// Projection onto the constraint surface stops at this |Delta E - delta|.
constexpr double kProjectionTolerance = 1e-13;
// K3 values closer than this count as equal when ranking local optima.
constexpr double kTieTolerance = 1e-9;
constexpr int kMaxNewtonSteps = 40;
constexpr int kMaxBisections = 80;

using Coords = std::array<double, 3>;

Coords coords(const SearchPoint& p) { return {p.theta, p.phi, p.dt}; }
SearchPoint point_of(const Coords& x) { return {x[0], x[1], x[2]}; }

}  // namespace

struct CanonicalProblem::Evaluated {
    SearchPoint point;
    LGOutcome outcome;

    double residual(double delta) const { return outcome.delta_e_avg - delta; }
};

struct CanonicalProblem::Candidate {
    double score = 0.0;
    int t = 0;
    int p = 0;
    int d = 0;
    // -1: the grid point itself; 0/1/2: sign change towards the next index on that axis.
    int axis = -1;
};

namespace {

// Cross-seed ranking: higher K3, then smaller dt, theta, phi.
template <class E>
bool ranks_above(const E& a, const E& b) {
    const double ka = a.outcome.k3;
    const double kb = b.outcome.k3;
    if (ka > kb + kTieTolerance) return true;
    if (kb > ka + kTieTolerance) return false;
    return std::tie(a.point.dt, a.point.theta, a.point.phi) <
           std::tie(b.point.dt, b.point.theta, b.point.phi);
}

}  // namespace

void ConstraintSpec::validate() const {
    if (!std::isfinite(delta)) {
        throw DomainError("delta must be finite");
    }
    if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
        throw DomainError("constraint tolerance must be finite and > 0");
    }
}

void SearchConfig::validate() const {
    if (theta_points < 2 || phi_points < 1 || dt_points < 2) {
        throw ConfigError("search grid needs theta_points >= 2, phi_points >= 1, dt_points >= 2");
    }
    if (!(dt_max > kMinInterval) || !std::isfinite(dt_max)) {
        throw ConfigError("dt_max must be finite and > " + std::to_string(kMinInterval));
    }
    if (refine_iterations < 0 || refine_starts < 1) {
        throw ConfigError("refine_iterations must be >= 0 and refine_starts >= 1");
    }
    if (!(penalty_weight >= 0.0) || !std::isfinite(penalty_weight)) {
        throw ConfigError("penalty_weight must be finite and >= 0");
    }
}

double EnergyBand::gap(double delta) const {
    if (delta < lower) return lower - delta;
    if (delta > upper) return upper - delta;
    return 0.0;
}

CanonicalProblem::CanonicalProblem(const DensityMatrix& rho, const DephasingModel& model,
                                   const SearchConfig& config)
    : rho_(rho), evolution_(model), config_(config) {
    config_.validate();
    const int nt = config_.theta_points;
    const int np = config_.phi_points;
    const int nd = config_.dt_points;

    thetas_.resize(nt);
    phis_.resize(np);
    dts_.resize(nd);
    for (int t = 0; t < nt; ++t) thetas_[t] = std::numbers::pi * t / nt;
    for (int p = 0; p < np; ++p) phis_[p] = 2.0 * std::numbers::pi * p / np;
    for (int d = 0; d < nd; ++d) dts_[d] = config_.dt_max * (d + 1) / nd;

    std::vector<Propagator> steps;
    std::vector<Propagator> double_steps;
    steps.reserve(nd);
    double_steps.reserve(nd);
    for (double dt : dts_) {
        steps.push_back(evolution_.at(dt));
        double_steps.push_back(evolution_.at(2.0 * dt));
    }

    k3_.resize(static_cast<std::size_t>(nt) * np * nd);
    energy_.resize(k3_.size());
    for (int t = 0; t < nt; ++t) {
        for (int p = 0; p < np; ++p) {
            const ProjectorPair proj = observable(MeasurementSetting(thetas_[t], phis_[p]));
            for (int d = 0; d < nd; ++d) {
                const LGOutcome out = lg_run(rho_, proj, steps[d], double_steps[d]);
                k3_[index(t, p, d)] = out.k3;
                energy_[index(t, p, d)] = out.delta_e_avg;
            }
        }
    }

    const auto [lo, hi] = std::minmax_element(energy_.begin(), energy_.end());
    const auto unravel = [&](std::size_t i) {
        const int d = static_cast<int>(i % nd);
        const int p = static_cast<int>((i / nd) % np);
        const int t = static_cast<int>(i / (static_cast<std::size_t>(nd) * np));
        return grid_point(t, p, d);
    };
    grid_lower_ = *lo;
    grid_upper_ = *hi;
    grid_lower_point_ = unravel(static_cast<std::size_t>(lo - energy_.begin()));
    grid_upper_point_ = unravel(static_cast<std::size_t>(hi - energy_.begin()));

    std::size_t counter = 0;
    const Evaluated low = extremize(-1.0, true, counter);
    const Evaluated high = extremize(1.0, true, counter);
    band_ = {std::min(grid_lower_, low.outcome.delta_e_avg),
             std::max(grid_upper_, high.outcome.delta_e_avg)};
    band_lower_point_ = low.outcome.delta_e_avg < grid_lower_ ? low.point : grid_lower_point_;
    band_upper_point_ = high.outcome.delta_e_avg > grid_upper_ ? high.point : grid_upper_point_;
}

SearchPoint CanonicalProblem::normalized(const SearchPoint& point) const {
    const MeasurementSetting setting(point.theta, point.phi);
    const double dt = std::isfinite(point.dt)
                          ? std::clamp(point.dt, kMinInterval, config_.dt_max)
                          : config_.dt_max;
    return {setting.theta(), setting.phi(), dt};
}

CanonicalProblem::Evaluated CanonicalProblem::eval(const SearchPoint& point,
                                                   std::size_t& counter) const {
    ++counter;
    const SearchPoint p = normalized(point);
    const ProjectorPair proj = observable(MeasurementSetting(p.theta, p.phi));
    return {p, lg_run(rho_, proj, evolution_.at(p.dt), evolution_.at(2.0 * p.dt))};
}

LGOutcome CanonicalProblem::evaluate(const SearchPoint& point) const {
    std::size_t counter = 0;
    return eval(point, counter).outcome;
}

CanonicalProblem::Evaluated CanonicalProblem::extremize(double sign, bool energy,
                                                        std::size_t& counter) const {
    const std::vector<double>& table = energy ? energy_ : k3_;
    const int nt = config_.theta_points;
    const int np = config_.phi_points;
    const int nd = config_.dt_points;

    std::vector<Candidate> all;
    all.reserve(table.size());
    for (int t = 0; t < nt; ++t)
        for (int p = 0; p < np; ++p)
            for (int d = 0; d < nd; ++d) all.push_back({sign * table[index(t, p, d)], t, p, d, -1});
    const std::vector<Candidate> starts = pick_distinct(std::move(all), config_.refine_starts);

    const auto value = [&](const Evaluated& e) {
        return sign * (energy ? e.outcome.delta_e_avg : e.outcome.k3);
    };
    const std::vector<double> step = {0.5 * std::numbers::pi / nt, std::numbers::pi / np,
                                      0.5 * config_.dt_max / nd};
    detail::NelderMeadOptions options;
    options.max_iterations = 4 * config_.refine_iterations;

    std::optional<Evaluated> best;
    for (const Candidate& c : starts) {
        const Evaluated start = eval(grid_point(c.t, c.p, c.d), counter);
        Evaluated local = start;
        const auto objective = [&](const std::vector<double>& x) {
            const Evaluated e = eval({x[0], x[1], x[2]}, counter);
            if (value(e) > value(local)) local = e;
            return -value(e);
        };
        const Coords x0 = coords(start.point);
        detail::nelder_mead(objective, {x0[0], x0[1], x0[2]}, step, options);
        const bool better = energy || sign < 0 ? !best || value(local) > value(*best)
                                   : !best || ranks_above(local, *best);
        if (better) best = local;
    }
    return *best;
}

std::vector<CanonicalProblem::Candidate> CanonicalProblem::pick_distinct(
    std::vector<Candidate> all, int count) const {
    // Scores equal to within the tie tolerance prefer the shorter interval.
    const auto key = [](const Candidate& c) {
        return std::make_tuple(-std::llround(c.score / kTieTolerance), c.d, c.t, c.p);
    };
    std::stable_sort(all.begin(), all.end(),
                     [&](const Candidate& a, const Candidate& b) { return key(a) < key(b); });
    const int np = config_.phi_points;
    const auto close = [np](const Candidate& a, const Candidate& b) {
        const int dp = std::abs(a.p - b.p);
        return std::abs(a.t - b.t) <= 2 && std::min(dp, np - dp) <= 2 && std::abs(a.d - b.d) <= 4;
    };
    std::vector<Candidate> picked;
    for (const Candidate& c : all) {
        if (static_cast<int>(picked.size()) >= count) break;
        if (std::none_of(picked.begin(), picked.end(),
                         [&](const Candidate& q) { return close(c, q); })) {
            picked.push_back(c);
        }
    }
    return picked;
}

std::vector<CanonicalProblem::Candidate> CanonicalProblem::seeds(
    const ConstraintSpec& spec) const {
    const int nt = config_.theta_points;
    const int np = config_.phi_points;
    const int nd = config_.dt_points;
    std::vector<Candidate> out;
    for (int t = 0; t < nt; ++t) {
        for (int p = 0; p < np; ++p) {
            for (int d = 0; d < nd; ++d) {
                const std::size_t i = index(t, p, d);
                const double r = energy_[i] - spec.delta;
                if (std::abs(r) <= spec.tolerance) {
                    out.push_back({k3_[i], t, p, d, -1});
                }
                const auto bracket = [&](std::size_t j, int axis) {
                    const double rj = energy_[j] - spec.delta;
                    if ((r < 0.0) == (rj < 0.0) || r == rj) return;
                    const double s = r / (r - rj);
                    out.push_back({k3_[i] + s * (k3_[j] - k3_[i]), t, p, d, axis});
                };
                if (t + 1 < nt) bracket(index(t + 1, p, d), 0);
                if (np > 1) bracket(index(t, (p + 1) % np, d), 1);
                if (d + 1 < nd) bracket(index(t, p, d + 1), 2);
            }
        }
    }
    return out;
}

CanonicalProblem::Evaluated CanonicalProblem::bisect(const SearchPoint& a, const SearchPoint& b,
                                                     double delta, std::size_t& counter) const {
    Coords lo = coords(a);
    Coords hi = coords(b);
    Evaluated best = eval(a, counter);
    const Evaluated eb = eval(b, counter);
    double r_lo = best.residual(delta);
    if (std::abs(eb.residual(delta)) < std::abs(r_lo)) best = eb;
    for (int it = 0; it < kMaxBisections; ++it) {
        if (std::abs(best.residual(delta)) <= kProjectionTolerance) break;
        Coords mid;
        for (int k = 0; k < 3; ++k) mid[k] = 0.5 * (lo[k] + hi[k]);
        const Evaluated em = eval(point_of(mid), counter);
        const double rm = em.residual(delta);
        if (std::abs(rm) < std::abs(best.residual(delta))) best = em;
        if ((rm < 0.0) == (r_lo < 0.0)) {
            lo = mid;
            r_lo = rm;
        } else {
            hi = mid;
        }
    }
    return best;
}

CanonicalProblem::Evaluated CanonicalProblem::project(const SearchPoint& start, int axis,
                                                      double delta,
                                                      std::size_t& counter) const {
    const std::array<double, 3> max_step = {4.0 * std::numbers::pi / config_.theta_points,
                                            8.0 * std::numbers::pi / config_.phi_points,
                                            4.0 * config_.dt_max / config_.dt_points};
    Coords x = coords(start);
    Evaluated best = eval(start, counter);
    Evaluated current = best;
    for (int it = 0; it < kMaxNewtonSteps; ++it) {
        const double r = current.residual(delta);
        if (std::abs(r) <= kProjectionTolerance) break;
        const double h = axis == 2 ? 1e-7 * std::max(1.0, x[2]) : 1e-7;
        Coords probe = x;
        probe[axis] += axis == 2 && x[axis] + h > config_.dt_max ? -h : h;
        const double slope =
            (eval(point_of(probe), counter).residual(delta) - r) / (probe[axis] - x[axis]);
        if (!(std::abs(slope) > 1e-12)) break;
        const double step = std::clamp(-r / slope, -max_step[axis], max_step[axis]);
        x[axis] += step;
        if (axis == 2) x[2] = std::clamp(x[2], kMinInterval, config_.dt_max);
        current = eval(point_of(x), counter);
        if (std::abs(current.residual(delta)) < std::abs(best.residual(delta))) best = current;
    }
    return best;
}

std::optional<CanonicalProblem::Evaluated> CanonicalProblem::settle(
    const Candidate& seed, const ConstraintSpec& spec, std::size_t& counter) const {
    const SearchPoint a = grid_point(seed.t, seed.p, seed.d);
    if (seed.axis < 0) {
        const Evaluated here = eval(a, counter);
        if (std::abs(here.residual(spec.delta)) <= kProjectionTolerance) return here;
        const Evaluated projected = project(a, 2, spec.delta, counter);
        if (std::abs(projected.residual(spec.delta)) < std::abs(here.residual(spec.delta))) {
            return projected;
        }
        return here;
    }
    SearchPoint b = a;
    if (seed.axis == 0) b.theta = thetas_[seed.t + 1];
    if (seed.axis == 1) b.phi = a.phi + 2.0 * std::numbers::pi / config_.phi_points;
    if (seed.axis == 2) b.dt = dts_[seed.d + 1];
    const Evaluated e = bisect(a, b, spec.delta, counter);
    if (std::abs(e.residual(spec.delta)) > spec.tolerance) return std::nullopt;
    return e;
}

CanonicalProblem::Evaluated CanonicalProblem::refine(const Evaluated& start,
                                                     const ConstraintSpec& spec,
                                                     std::size_t& counter) const {
    const Coords x0 = coords(start.point);

    // Eliminate the coordinate along which Delta E is steepest.
    std::array<double, 3> slope{};
    for (int k = 0; k < 3; ++k) {
        const double h = 1e-6;
        Coords up = x0;
        Coords down = x0;
        up[k] += h;
        down[k] -= h;
        if (k == 2) {
            up[2] = std::min(up[2], config_.dt_max);
            down[2] = std::max(down[2], kMinInterval);
        }
        if (up[k] == down[k]) continue;
        slope[k] = (eval(point_of(up), counter).outcome.delta_e_avg -
                    eval(point_of(down), counter).outcome.delta_e_avg) /
                   (up[k] - down[k]);
    }
    int eliminated = static_cast<int>(
        std::max_element(slope.begin(), slope.end(),
                         [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        slope.begin());
    if (config_.refine_iterations == 0) return start;
    // Delta E flat here: every nearby point meets the constraint, search all three.
    if (!(std::abs(slope[eliminated]) > 1e-10)) eliminated = -1;

    std::vector<int> free;
    for (int k = 0; k < 3; ++k)
        if (k != eliminated) free.push_back(k);

    const std::array<double, 3> spacing = {std::numbers::pi / config_.theta_points,
                                           2.0 * std::numbers::pi / config_.phi_points,
                                           config_.dt_max / config_.dt_points};
    Evaluated best = start;
    const auto objective = [&](const std::vector<double>& y) {
        Coords x = x0;
        for (std::size_t k = 0; k < free.size(); ++k) x[free[k]] = y[k];
        const Evaluated e = eliminated < 0 ? eval(point_of(x), counter)
                                           : project(point_of(x), eliminated, spec.delta, counter);
        const double excess = std::abs(e.residual(spec.delta)) - spec.tolerance;
        if (excess <= 0.0 && e.outcome.k3 > best.outcome.k3) best = e;
        return -e.outcome.k3 + config_.penalty_weight * std::max(0.0, excess);
    };

    detail::NelderMeadOptions options;
    options.max_iterations = config_.refine_iterations;
    options.f_tolerance = 1e-15;
    options.x_tolerance = 1e-11;
    std::vector<double> y0;
    std::vector<double> step;
    for (int k : free) {
        y0.push_back(x0[k]);
        step.push_back(0.5 * spacing[k]);
    }
    detail::nelder_mead(objective, y0, step, options);
    return best;
}

std::optional<CanonicalProblem::Evaluated> CanonicalProblem::witness(
    const ConstraintSpec& spec, std::size_t& counter) const {
    if (!band_.contains(spec.delta, spec.tolerance)) return std::nullopt;

    std::optional<Candidate> in_band;
    double best_gap = std::numeric_limits<double>::infinity();
    for (const Candidate& c : seeds(spec)) {
        if (c.axis >= 0) {
            if (auto e = settle(c, spec, counter)) return e;
            continue;
        }
        const double gap = std::abs(energy_[index(c.t, c.p, c.d)] - spec.delta);
        if (gap < best_gap) {
            best_gap = gap;
            in_band = c;
        }
    }
    if (in_band) return eval(grid_point(in_band->t, in_band->p, in_band->d), counter);

    // Target lies between the grid extreme and the refined band edge.
    const bool above = spec.delta > grid_upper_;
    const SearchPoint from = above ? grid_upper_point_ : grid_lower_point_;
    const SearchPoint to = above ? band_upper_point_ : band_lower_point_;
    const Evaluated edge = eval(to, counter);
    if (std::abs(edge.residual(spec.delta)) <= spec.tolerance) return edge;
    const Evaluated e = bisect(from, to, spec.delta, counter);
    if (std::abs(e.residual(spec.delta)) <= spec.tolerance) return e;
    return std::nullopt;
}

FeasibilityResult CanonicalProblem::feasibility(const ConstraintSpec& spec) const {
    spec.validate();
    FeasibilityResult out;
    out.attained = band_;
    std::size_t counter = 0;
    if (const auto w = witness(spec, counter)) {
        out.feasible = true;
        out.witness = w->point;
        out.residual = w->residual(spec.delta);
    } else {
        out.residual = band_.gap(spec.delta);
    }
    return out;
}

OptimizationResult CanonicalProblem::optimize(const ConstraintSpec& spec) const {
    spec.validate();
    OptimizationResult out;
    std::size_t counter = 0;
    const auto fallback = witness(spec, counter);
    if (!fallback) {
        out.constraint_residual = band_.gap(spec.delta);
        out.evaluations = grid_size() + counter;
        return out;
    }

    std::optional<Evaluated> best;
    const auto consider = [&](const Evaluated& e) {
        if (!best || ranks_above(e, *best)) best = e;
    };
    for (const Candidate& seed : pick_distinct(seeds(spec), config_.refine_starts)) {
        if (const auto start = settle(seed, spec, counter)) {
            consider(refine(*start, spec, counter));
        }
    }
    if (!best) consider(refine(*fallback, spec, counter));

    out.feasible = true;
    out.k3_opt = best->outcome.k3;
    out.argmax = best->point;
    out.outcome = best->outcome;
    out.constraint_residual = best->residual(spec.delta);
    out.evaluations = grid_size() + counter;
    return out;
}

UnconstrainedResult CanonicalProblem::unconstrained_max() const {
    std::size_t counter = 0;
    const Evaluated best = extremize(1.0, false, counter);
    return {best.outcome.k3, best.point, grid_size() + counter};
}

EnergyBand feasible_bounds_pure(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw DomainError("alpha must lie in [0, 1]");
    }
    return {-alpha * alpha, 1.0 - alpha * alpha};
}

FeasibilityResult feasible_numeric(const DensityMatrix& rho, const DephasingModel& model,
                                   const ConstraintSpec& spec, const SearchConfig& config) {
    spec.validate();
    return CanonicalProblem(rho, model, config).feasibility(spec);
}

OptimizationResult k3_opt(const DensityMatrix& rho, const DephasingModel& model,
                          const ConstraintSpec& spec, const SearchConfig& config) {
    spec.validate();
    return CanonicalProblem(rho, model, config).optimize(spec);
}

double max_violation_delta(const DensityMatrix& rho, double J) { return -energy(rho, J); }

MaxLineReport verify_theorem_max_line(const DensityMatrix& rho, const DephasingModel& model,
                                      std::span<const double> delta_grid,
                                      const SearchConfig& config, double tolerance) {
    if (delta_grid.empty()) {
        throw ConfigError("delta grid must not be empty");
    }
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        if (!std::isfinite(delta_grid[i]) || (i > 0 && !(delta_grid[i] > delta_grid[i - 1]))) {
            throw ConfigError("delta grid must be finite and strictly ascending");
        }
    }

    const CanonicalProblem problem(rho, model, config);
    MaxLineReport report;
    report.delta_grid.assign(delta_grid.begin(), delta_grid.end());
    report.predicted_delta = max_violation_delta(rho);

    std::optional<std::size_t> arg;
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        const auto k3 = problem.optimize({delta_grid[i], tolerance}).k3_opt;
        report.profile.push_back(k3);
        if (k3 && (!arg || *k3 > *report.profile[*arg] + 1e-12)) arg = i;
    }
    report.k3_on_line = problem.optimize({report.predicted_delta, tolerance}).k3_opt;
    if (!arg) {
        report.degenerate = true;
        return report;
    }

    const std::size_t i = *arg;
    report.argmax_delta = delta_grid[i];
    report.k3_at_argmax = *report.profile[i];
    report.deviation = std::abs(report.argmax_delta - report.predicted_delta);
    if (i > 0) report.grid_step = delta_grid[i] - delta_grid[i - 1];
    if (i + 1 < delta_grid.size()) {
        report.grid_step = std::max(report.grid_step, delta_grid[i + 1] - delta_grid[i]);
    }
    report.shifted = report.deviation > report.grid_step * (1.0 + 1e-9);
    return report;
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
    if (count < 1 || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ConfigError("uniform_grid needs count >= 1 and finite bounds");
    }
    if (count == 1) return {lo};
    std::vector<double> out(count);
    for (int k = 0; k < count; ++k) out[k] = lo + (hi - lo) * k / (count - 1);
    out.back() = hi;
    return out;
}

}  // namespace lgi
