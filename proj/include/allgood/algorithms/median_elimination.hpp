#pragma once

// Finders of a single epsilon-good arm: Median Elimination with a
// deterministic pull schedule, and an LUCB-style adaptive alternative.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "allgood/confidence.hpp"
#include "allgood/error.hpp"
#include "allgood/sampling.hpp"

namespace allgood {

/// Called before every batch of pulls; may throw to interrupt the finder.
using BatchGuard = std::function<void()>;

struct FinderResult {
    std::size_t arm = 0;
    std::uint64_t pulls = 0;
};

namespace detail {

inline void require_finder_args(double epsilon, double kappa) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidSpec("finder epsilon must be > 0");
    if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidSpec("finder kappa must lie in (0, 1)");
}

/// Per-arm pulls in a phase with accuracy e and confidence k.
inline std::uint64_t me_phase_pulls(double e, double k) {
    return static_cast<std::uint64_t>(std::ceil(4.0 / ((e / 2.0) * (e / 2.0)) * std::log(3.0 / k)));
}

}  // namespace detail

/// Exact pull count of median_elimination on n arms. Phases use
/// e_1 = epsilon/4, k_1 = kappa/2, then e <- 3e/4, k <- k/2, and halve the
/// survivors (rounding up) until one arm is left.
inline std::uint64_t median_elimination_pulls(std::size_t n, double epsilon, double kappa) {
    detail::require_finder_args(epsilon, kappa);
    std::uint64_t total = 0;
    double e = epsilon / 4.0, k = kappa / 2.0;
    for (std::size_t m = n; m > 1; m = (m + 1) / 2) {
        total += static_cast<std::uint64_t>(m) * detail::me_phase_pulls(e, k);
        e *= 0.75;
        k *= 0.5;
    }
    return total;
}

/// Median Elimination over every arm of `lane`. Each phase uses fresh
/// batch means; survivors are the top half by batch mean, lower index first
/// on ties. Returns an arm within epsilon of the best w.p. >= 1 - kappa.
inline FinderResult median_elimination(ArmLane& lane, double epsilon, double kappa, const BatchGuard& guard = {}) {
    detail::require_finder_args(epsilon, kappa);
    std::vector<std::size_t> alive(lane.size());
    std::iota(alive.begin(), alive.end(), std::size_t{0});
    std::vector<double> batch(lane.size(), 0.0);
    FinderResult out;
    double e = epsilon / 4.0, k = kappa / 2.0;
    while (alive.size() > 1) {
        const std::uint64_t per_arm = detail::me_phase_pulls(e, k);
        for (std::size_t i : alive) {
            if (guard) guard();
            batch[i] = lane.pull_batch(i, per_arm);
            out.pulls += per_arm;
        }
        std::stable_sort(alive.begin(), alive.end(), [&](std::size_t a, std::size_t b) { return batch[a] > batch[b]; });
        alive.resize((alive.size() + 1) / 2);
        std::sort(alive.begin(), alive.end());
        e *= 0.75;
        k *= 0.5;
    }
    out.arm = alive.front();
    return out;
}

/// LUCB-style finder: pulls the empirical leader h and the highest upper
/// bound l among the rest until lcb_h > ucb_l - epsilon. Widths are
/// C_{kappa/n}. Statistics start fresh; stream positions continue.
inline FinderResult lucb_good_arm(ArmLane& lane, double epsilon, double kappa, const BatchGuard& guard = {},
                                  const ConfidenceConfig& cfg = {}) {
    detail::require_finder_args(epsilon, kappa);
    const std::size_t n = lane.size();
    FinderResult out;
    if (n == 1) return out;
    lane.reset_statistics();
    const double d = kappa / static_cast<double>(n);
    std::vector<double> widths(n, 0.0);
    auto pull = [&](std::size_t i) {
        lane.pull(i);
        widths[i] = width(lane.pulls(i), d, cfg);
        ++out.pulls;
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (guard) guard();
        pull(i);
    }
    for (;;) {
        std::size_t h = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (lane.mean(i) > lane.mean(h)) h = i;
        std::size_t l = h == 0 ? 1 : 0;
        double best_ucb = -kInfinity;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == h) continue;
            const double u = lane.mean(i) + widths[i];
            if (u > best_ucb) {
                best_ucb = u;
                l = i;
            }
        }
        if (lane.mean(h) - widths[h] > best_ucb - epsilon) {
            out.arm = h;
            return out;
        }
        if (guard) guard();
        pull(h);
        pull(l);
    }
}

/// Standalone Median Elimination on its own lane of `bank`.
inline FinderResult median_elimination_run(const SamplerBank& bank, double epsilon, double kappa,
                                           std::uint32_t slot = 0) {
    PullLedger ledger(bank.size());
    ArmLane lane(bank, stream_id(slot, Lane::finder), ledger);
    return median_elimination(lane, epsilon, kappa);
}

}  // namespace allgood
