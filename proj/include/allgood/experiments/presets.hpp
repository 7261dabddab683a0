#pragma once

// Named synthetic instances. Defaults are scaled down from the full-size
// settings, which are noted on each preset.

#include <cstddef>
#include <vector>

#include "allgood/core.hpp"
#include "allgood/error.hpp"

namespace allgood::experiments {

namespace detail {
inline std::vector<double> linspace(double from, double to, std::size_t count) {
    std::vector<double> out;
    if (count == 1) return {from};
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1));
    return out;
}
}  // namespace detail

/// Evenly spread means: ceil(n/2) good arms from `top` down to
/// top - eps + alpha, the rest bad from top - eps - beta down by eps - alpha.
/// Full-scale setting: alpha = beta = 0.05, delta = 0.1. The defaults use
/// alpha = beta = 0.1.
inline BanditInstance fig3a(std::size_t n, double epsilon = 0.5, double alpha = 0.1, double beta = 0.1,
                            double top = 1.0) {
    if (n < 2) throw InvalidSpec("fig3a needs n >= 2");
    if (!(alpha > 0.0 && alpha < epsilon && beta > 0.0)) throw InvalidSpec("fig3a needs 0 < alpha < eps and beta > 0");
    const std::size_t good = (n + 1) / 2, bad = n - good;
    auto means = detail::linspace(top, top - epsilon + alpha, good);
    const double hi = top - epsilon - beta;
    for (double m : detail::linspace(hi, hi - (epsilon - alpha), bad)) means.push_back(m);
    return BanditInstance(std::move(means), "fig3a");
}

/// n - 1 arms at `top` and one arm at top - eps - beta.
/// Full-scale setting: eps = 0.99, beta = 0.01, delta = 0.01; the default
/// uses eps = 0.9, beta = 0.1.
inline BanditInstance fig3b(std::size_t n, double epsilon = 0.9, double beta = 0.1, double top = 1.0) {
    if (n < 2) throw InvalidSpec("fig3b needs n >= 2");
    std::vector<double> means(n - 1, top);
    means.push_back(top - epsilon - beta);
    return BanditInstance(std::move(means), "fig3b");
}

/// fig3a layout with one arm planted strictly inside the slack band, at
/// top - eps - gamma/2; the other bad arms sit beta below top - eps - gamma.
inline BanditInstance planted(std::size_t n, double epsilon = 0.5, double gamma = 0.3, double alpha = 0.1,
                              double beta = 0.1, double top = 1.0) {
    if (n < 3) throw InvalidSpec("planted needs n >= 3");
    if (!(gamma > 0.0)) throw InvalidSpec("planted needs gamma > 0");
    const std::size_t good = (n + 1) / 2, bad = n - good;
    auto means = detail::linspace(top, top - epsilon + alpha, good);
    means.push_back(top - epsilon - gamma / 2.0);
    const double hi = top - epsilon - gamma - beta;
    if (bad > 1)
        for (double m : detail::linspace(hi, hi - (epsilon - alpha), bad - 1)) means.push_back(m);
    return BanditInstance(std::move(means), "planted");
}

}  // namespace allgood::experiments
