#pragma once

// Parameter sweeps over (state family value, delta, gamma) and their flat-file
// exports. Cell order is family outer, delta middle, gamma inner.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lgi/dynamics.hpp"
#include "lgi/optimizer.hpp"
#include "lgi/quantum.hpp"

namespace lgi {

enum class StateFamily { PureAlpha, BlochMx, BlochMz, BlochGeneral };

std::string_view to_string(StateFamily family);
/// Accepts pure_alpha, bloch_mx, bloch_mz, bloch_general.
StateFamily parse_state_family(std::string_view text);

struct GridRange {
    double lo = 0.0;
    double hi = 1.0;
    int count = 101;

    std::vector<double> values() const { return uniform_grid(lo, hi, count); }
    bool operator==(const GridRange&) const = default;
};

struct SweepSpec {
    StateFamily family = StateFamily::PureAlpha;
    /// bloch_general only: the fixed Bloch components; the `vary_axis`
    /// component (0 = x, 1 = y, 2 = z) is replaced by the family value.
    BlochVector fixed;
    int vary_axis = 2;
    GridRange family_grid{0.0, 1.0, 101};
    GridRange delta_grid{-1.0, 1.0, 101};
    std::vector<double> gammas{0.0};
    DephasingKind model = DephasingKind::None;
    /// GeneralAxis only.
    std::array<double, 3> axis{0.0, 0.0, 1.0};
    SearchConfig search;
    /// Constraint half-width for every cell, units of J.
    double tolerance = 1e-4;

    /// Throws ConfigError on any inconsistency, before computation.
    void validate() const;
    DensityMatrix state_at(double family_value) const;
    DephasingModel model_at(double gamma) const;

    bool operator==(const SweepSpec&) const = default;
};

/// {0.1, 0.5, 1.0, 1.5} for z, {0.1, 0.5, 1.0} for x/diag45/axis, {0} for none.
std::vector<double> default_gammas(DephasingKind kind);

struct SweepCell {
    std::string family;
    double family_value = 0.0;
    double delta_over_J = 0.0;
    double gamma = 0.0;
    std::string model;
    /// Absent iff infeasible.
    std::optional<double> k3_opt;
    bool feasible = false;
    std::optional<double> theta_star;
    std::optional<double> phi_star;
    std::optional<double> dt_star;
    double residual = 0.0;

    bool operator==(const SweepCell&) const = default;
};

using SweepLog = std::function<void(const std::string&)>;

/// Evaluates every cell. `jobs` <= 0 means hardware concurrency. `log`, if
/// set, receives one line per completed gamma.
std::vector<SweepCell> run_sweep(const SweepSpec& spec, int jobs = 0, const SweepLog& log = {});

/// Comment line declaring the grid resolution of a sweep (starts with '#').
std::string resolution_comment(const SweepSpec& spec);

inline constexpr std::string_view kCsvHeader =
    "family,family_value,delta_over_J,gamma,model,k3_opt,feasible,theta_star,phi_star,dt_star,"
    "residual";

/// CSV text; `comment` (without the leading '#') is written first when non-empty.
std::string to_csv(const std::vector<SweepCell>& cells, const std::string& comment = {});
std::string to_json(const std::vector<SweepCell>& cells);
std::vector<SweepCell> parse_csv(std::string_view text);

/// File variants. Throw IoError naming the path and the cause.
void export_csv(const std::vector<SweepCell>& cells, const std::string& path,
                const std::string& comment = {});
void export_json(const std::vector<SweepCell>& cells, const std::string& path);
std::vector<SweepCell> import_csv(const std::string& path);

}  // namespace lgi
