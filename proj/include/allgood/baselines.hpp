#pragma once

// Comparison samplers evaluated anytime: they never certify, they run to
// the budget and expose an empirical recommendation at every checkpoint.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "allgood/confidence.hpp"
#include "allgood/core.hpp"
#include "allgood/error.hpp"
#include "allgood/run.hpp"
#include "allgood/sampling.hpp"

namespace allgood {

enum class BaselineKind { ucb, lucb1, apt, uniform };

inline const char* to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::ucb: return "Ucb";
        case BaselineKind::lucb1: return "Lucb1";
        case BaselineKind::apt: return "Apt";
        case BaselineKind::uniform: return "Uniform";
    }
    return "?";
}

struct BaselineSpec {
    BaselineKind kind = BaselineKind::uniform;
    std::size_t k = 1;   // lucb1: size of the recommended top set
    double tau = 0.0;    // apt: threshold

    static BaselineSpec ucb() { return {BaselineKind::ucb}; }
    static BaselineSpec uniform() { return {BaselineKind::uniform}; }
    static BaselineSpec lucb1(std::size_t k) { return {BaselineKind::lucb1, k}; }
    static BaselineSpec apt(double tau) { return {BaselineKind::apt, 1, tau}; }
};

namespace detail {

inline IndexSet empirical_good(const ArmLane& lane, const ThresholdSpec& spec) {
    double top = -kInfinity;
    for (std::size_t i = 0; i < lane.size(); ++i) top = std::max(top, lane.mean(i));
    const double thr = spec.threshold(top);
    IndexSet out;
    for (std::size_t i = 0; i < lane.size(); ++i)
        if (lane.mean(i) >= thr) out.push_back(i);
    return out;
}

/// Arms ordered by empirical mean, highest first, lower index first on ties.
inline std::vector<std::size_t> by_mean(const ArmLane& lane) {
    std::vector<std::size_t> order(lane.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lane.mean(a) > lane.mean(b); });
    return order;
}

inline IndexSet top_k(const ArmLane& lane, std::size_t k) {
    auto order = by_mean(lane);
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace detail

/// Runs a baseline until `budget` pulls. Every baseline first pulls each arm
/// once, so the budget must be at least n. LUCB1 pulls two arms per step and
/// may overshoot by one.
inline RunResult baseline_run(const SamplerBank& bank, const BaselineSpec& b, const ThresholdSpec& spec,
                              std::uint64_t budget, const RunOptions& opt) {
    spec.validate();
    const std::size_t n = bank.size();
    if (budget < n) throw InvalidSpec("baseline budget must be at least the number of arms");
    if (b.kind == BaselineKind::lucb1 && (b.k < 1 || b.k >= n) && n > 1)
        throw InvalidSpec("lucb1 k must lie in [1, n-1]");
    if (b.kind == BaselineKind::lucb1 && n == 1 && b.k != 1) throw InvalidSpec("lucb1 k must be 1 for a single arm");
    if (b.kind == BaselineKind::apt && !std::isfinite(b.tau)) throw InvalidSpec("apt tau must be finite");

    const double d = opt.delta / static_cast<double>(n);
    if (b.kind == BaselineKind::ucb || b.kind == BaselineKind::lucb1)
        detail::require_delta(opt.delta, 1.0, false, to_string(b.kind));

    RunResult r;
    PullLedger ledger(n, budget);
    detail::Tracer tracer(opt, r.trace);
    ArmLane lane(bank, stream_id(opt.slot, Lane::main), ledger);

    auto recommend = [&]() -> IndexSet {
        switch (b.kind) {
            case BaselineKind::lucb1: return detail::top_k(lane, b.k);
            case BaselineKind::apt: {
                IndexSet out;
                for (std::size_t i = 0; i < n; ++i)
                    if (lane.mean(i) >= b.tau) out.push_back(i);
                return out;
            }
            default: return detail::empirical_good(lane, spec);
        }
    };
    // Widths only change for the arm just pulled.
    std::vector<double> widths(n, 0.0);
    const bool needs_widths = b.kind == BaselineKind::ucb || b.kind == BaselineKind::lucb1;
    auto pull = [&](std::size_t i) {
        lane.pull(i);
        if (needs_widths) widths[i] = width(lane.pulls(i), d, opt.confidence);
    };
    auto conf = [&](std::size_t i) { return widths[i]; };

    for (std::size_t i = 0; i < n; ++i) pull(i);
    tracer.poll(ledger.total(), recommend);
    std::size_t next_uniform = 0;
    while (!ledger.exhausted()) {
        switch (b.kind) {
            case BaselineKind::uniform:
                pull(next_uniform);
                next_uniform = (next_uniform + 1) % n;
                break;
            case BaselineKind::ucb: {
                std::size_t best = 0;
                double best_u = -kInfinity;
                for (std::size_t i = 0; i < n; ++i) {
                    const double u = lane.mean(i) + conf(i);
                    if (u > best_u) {
                        best_u = u;
                        best = i;
                    }
                }
                pull(best);
                break;
            }
            case BaselineKind::apt: {
                std::size_t best = 0;
                double best_v = kInfinity;
                for (std::size_t i = 0; i < n; ++i) {
                    const double v = std::sqrt(static_cast<double>(lane.pulls(i))) * std::abs(lane.mean(i) - b.tau);
                    if (v < best_v) {
                        best_v = v;
                        best = i;
                    }
                }
                pull(best);
                break;
            }
            case BaselineKind::lucb1: {
                if (n == 1) {
                    pull(0);
                    break;
                }
                const auto order = detail::by_mean(lane);
                std::size_t low = order[0], high = order[b.k];
                double low_v = kInfinity, high_v = -kInfinity;
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t i = order[j];
                    if (j < b.k) {
                        const double v = lane.mean(i) - conf(i);
                        if (v < low_v || (v == low_v && i < low)) {
                            low_v = v;
                            low = i;
                        }
                    } else {
                        const double v = lane.mean(i) + conf(i);
                        if (v > high_v || (v == high_v && i < high)) {
                            high_v = v;
                            high = i;
                        }
                    }
                }
                pull(low);
                pull(high);
                break;
            }
        }
        tracer.poll(ledger.total(), recommend);
    }
    r.stop_reason = StopReason::budget;
    r.returned_set = recommend();
    detail::finish(r, ledger, bank);
    return r;
}

}  // namespace allgood
