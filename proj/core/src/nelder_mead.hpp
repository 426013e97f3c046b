#pragma once

// Minimal Nelder-Mead simplex minimizer for the optimizer's 2-3 dimensional
// local refinements. Deterministic: no randomness, stable vertex ordering.

#include <functional>
#include <vector>

namespace lgi::detail {

struct NelderMeadOptions {
    int max_iterations = 200;
    /// Stop once the spread of simplex values and the simplex extent both fall
    /// below these.
    double f_tolerance = 1e-14;
    double x_tolerance = 1e-10;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Minimizes `f` starting from the simplex {x0, x0 + step_k e_k}.
NelderMeadResult nelder_mead(const Objective& f, const std::vector<double>& x0,
                             const std::vector<double>& step, const NelderMeadOptions& options);

}  // namespace lgi::detail
