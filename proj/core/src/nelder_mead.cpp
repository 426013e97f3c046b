#include "nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lgi::detail {

NelderMeadResult nelder_mead(const Objective& f, const std::vector<double>& x0,
                             const std::vector<double>& step, const NelderMeadOptions& options) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> values(n + 1);
    for (std::size_t k = 0; k < n; ++k) simplex[k + 1][k] += step[k];
    for (std::size_t k = 0; k <= n; ++k) values[k] = f(simplex[k]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    const auto point_along = [&](double coeff, std::vector<double>& out) {
        const auto& worst = simplex[order[n]];
        for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + coeff * (worst[k] - centroid[k]);
    };

    int it = 0;
    for (; it < options.max_iterations; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

        const double spread = values[order[n]] - values[order[0]];
        double extent = 0.0;
        for (std::size_t v = 1; v <= n; ++v)
            for (std::size_t k = 0; k < n; ++k)
                extent = std::max(extent, std::abs(simplex[order[v]][k] - simplex[order[0]][k]));
        if (spread <= options.f_tolerance && extent <= options.x_tolerance) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[order[v]][k] / n;

        point_along(-1.0, trial);
        const double reflected = f(trial);
        if (reflected < values[order[0]]) {
            point_along(-2.0, trial2);
            const double expanded = f(trial2);
            if (expanded < reflected) {
                simplex[order[n]] = trial2;
                values[order[n]] = expanded;
            } else {
                simplex[order[n]] = trial;
                values[order[n]] = reflected;
            }
            continue;
        }
        if (reflected < values[order[n - 1]]) {
            simplex[order[n]] = trial;
            values[order[n]] = reflected;
            continue;
        }
        // Contraction: outside if the reflection improved on the worst, else inside.
        const bool outside = reflected < values[order[n]];
        point_along(outside ? -0.5 : 0.5, trial2);
        const double contracted = f(trial2);
        if (contracted < std::min(reflected, values[order[n]])) {
            simplex[order[n]] = trial2;
            values[order[n]] = contracted;
            continue;
        }
        const auto best = simplex[order[0]];
        for (std::size_t v = 1; v <= n; ++v) {
            auto& vertex = simplex[order[v]];
            for (std::size_t k = 0; k < n; ++k) vertex[k] = best[k] + 0.5 * (vertex[k] - best[k]);
            values[order[v]] = f(vertex);
        }
    }

    const auto best = static_cast<std::size_t>(
        std::min_element(values.begin(), values.end()) - values.begin());
    return {simplex[best], values[best], it};
}

}  // namespace lgi::detail
