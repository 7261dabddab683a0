#pragma once

// Elimination with a sampled threshold. Every active arm is pulled once per
// round; the threshold is bracketed by mapping [top - C, top + C] through
// the threshold function, where top is the best active empirical mean.

#include <algorithm>
#include <vector>

#include "allgood/confidence.hpp"
#include "allgood/core.hpp"
#include "allgood/run.hpp"
#include "allgood/sampling.hpp"

namespace allgood {

namespace detail {

/// [L_t, U_t] for a best active empirical mean `top` and width `c`.
inline Interval threshold_bounds(const ThresholdSpec& spec, double top, double c) {
    return spec.threshold_range(top - c, top + c);
}

/// Slack stopping rule, evaluated on the current threshold bracket.
inline bool slack_resolved(const ThresholdSpec& spec, const Interval& b, double c) {
    if (!(spec.slack > 0.0)) return false;
    const double spread = b.hi - b.lo;
    switch (spec.mode) {
        case ThresholdMode::additive: return spread < spec.slack / 2.0;
        case ThresholdMode::multiplicative: return spread < spec.slack * b.lo / (2.0 - spec.epsilon);
        case ThresholdMode::lipschitz: return std::max(2.0 * c, spread) <= spec.slack / 2.0;
    }
    return false;
}

inline IndexSet members(const std::vector<char>& flags) {
    IndexSet out;
    for (std::size_t i = 0; i < flags.size(); ++i)
        if (flags[i]) out.push_back(i);
    return out;
}

}  // namespace detail

/// Runs EAST in any of the three threshold modes.
///
/// Widths are C_{delta/n}(t) with t the common pull count of the active arms.
/// Stops when the active set is inside G (returns G) or when the slack rule
/// fires (returns G and the active set). The budget is checked once per
/// round, so runs may overshoot it by fewer than n pulls.
inline RunResult east_run(const SamplerBank& bank, const ThresholdSpec& spec, const RunOptions& opt) {
    spec.validate();
    detail::require_delta(opt.delta, 0.5, true, "east");

    const std::size_t n = bank.size();
    const double conf_delta = opt.delta / static_cast<double>(n);
    RunResult r;
    PullLedger ledger(n, opt.budget);
    detail::Tracer tracer(opt, r.trace);
    ArmLane lane(bank, stream_id(opt.slot, Lane::main), ledger);

    std::vector<char> active(n, 1), good(n, 0);
    std::uint64_t t = 0;
    double top = 0.0;
    Interval bounds{0.0, 0.0};

    auto recommendation = [&] {
        IndexSet out;
        if (t == 0) return out;
        const double thr = spec.threshold(top);
        for (std::size_t i = 0; i < n; ++i)
            if (good[i] || (active[i] && lane.mean(i) >= thr)) out.push_back(i);
        return out;
    };

    for (;;) {
        if (ledger.exhausted()) {
            r.stop_reason = StopReason::budget;
            r.returned_set = recommendation();
            break;
        }
        for (std::size_t i = 0; i < n; ++i)
            if (active[i]) lane.pull(i);
        ++t;
        const double c = width(t, conf_delta, opt.confidence);
        top = -kInfinity;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i]) top = std::max(top, lane.mean(i));
        bounds = detail::threshold_bounds(spec, top, c);

        std::size_t strict_top_count = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i] && lane.mean(i) == top) ++strict_top_count;

        std::vector<char> was_active = active;
        for (std::size_t i = 0; i < n; ++i) {
            if (!was_active[i]) continue;
            const double m = lane.mean(i);
            if (m - c > bounds.hi) good[i] = 1;
            bool drop_bad = m + c < bounds.lo;
            bool drop_good = !drop_bad && good[i] && m + c < top - c;
            if (drop_bad || drop_good) {
                active[i] = 0;
                r.eliminations.push_back({i, t, drop_good, m == top && strict_top_count == 1});
            }
        }
        tracer.poll(ledger.total(), recommendation);

        bool inside = true;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i] && !good[i]) inside = false;
        if (inside) {
            r.stop_reason = StopReason::active_subset_good;
            r.returned_set = detail::members(good);
            break;
        }
        if (detail::slack_resolved(spec, bounds, c)) {
            r.stop_reason = StopReason::gamma_resolved;
            IndexSet out;
            for (std::size_t i = 0; i < n; ++i)
                if (good[i] || active[i]) out.push_back(i);
            r.returned_set = std::move(out);
            break;
        }
    }
    detail::finish(r, ledger, bank);
    return r;
}

}  // namespace allgood
