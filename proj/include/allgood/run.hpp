#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "allgood/confidence.hpp"
#include "allgood/core.hpp"
#include "allgood/sampling.hpp"

namespace allgood {

enum class StopReason { all_known, active_subset_good, gamma_resolved, budget };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::all_known: return "AllKnown";
        case StopReason::active_subset_good: return "ActiveSubsetGood";
        case StopReason::gamma_resolved: return "GammaResolved";
        case StopReason::budget: return "Budget";
    }
    return "?";
}

/// Recommendation in force once cumulative pulls first reached `pulls`.
struct Snapshot {
    std::uint64_t pulls = 0;
    IndexSet set;
};

/// Called with (checkpoint pulls, current recommendation).
using TraceHook = std::function<void(std::uint64_t, const IndexSet&)>;

struct RunOptions {
    double delta = 0.1;
    std::optional<std::uint64_t> budget;
    /// Pulls between trace checkpoints; 0 disables tracing.
    std::uint64_t trace_interval = 0;
    bool keep_trace = true;
    TraceHook hook;
    /// Separates the random streams of different algorithms sharing one bank.
    std::uint32_t slot = 0;
    ConfidenceConfig confidence;
};

/// Arm dropped from an elimination active set.
struct Elimination {
    std::size_t arm = 0;
    std::uint64_t t = 0;
    bool was_good = false;          // dropped through the good-arm rule
    bool had_strict_top_mean = false;
};

/// Per-round bookkeeping of the two-filter algorithm.
struct FilterRound {
    std::uint64_t round = 0;
    std::uint64_t tau = 0;
    std::size_t undecided = 0;
    std::uint64_t finder_pulls = 0;
    std::uint64_t bad_filter_pulls = 0;   // finder + tau * (undecided + 1)
    std::uint64_t good_filter_pulls = 0;  // delivered this round; equals bad_filter_pulls unless stopped
    IndexSet good;
    IndexSet bad;
    std::uint64_t min_count = 0;          // good-filter counts over the active set at round end
    std::uint64_t max_count = 0;
};

struct RunResult {
    IndexSet returned_set;
    std::uint64_t total_pulls = 0;
    std::vector<std::uint64_t> per_arm_pulls;
    StopReason stop_reason = StopReason::all_known;
    bool budget_exhausted = false;
    std::vector<Snapshot> trace;
    std::vector<std::string> warnings;
    std::vector<Elimination> eliminations;
    std::vector<FilterRound> rounds;
};

inline bool operator==(const Snapshot& a, const Snapshot& b) { return a.pulls == b.pulls && a.set == b.set; }

namespace detail {

class Tracer {
public:
    Tracer(const RunOptions& opt, std::vector<Snapshot>& sink)
        : interval_(opt.trace_interval), next_(opt.trace_interval), keep_(opt.keep_trace), hook_(opt.hook),
          sink_(&sink) {}

    template <class Recommend>
    void poll(std::uint64_t total, Recommend&& recommend) {
        if (interval_ == 0 || total < next_) return;
        const IndexSet set = recommend();
        while (next_ <= total) {
            if (keep_) sink_->push_back({next_, set});
            if (hook_) hook_(next_, set);
            next_ += interval_;
        }
    }

private:
    std::uint64_t interval_;
    std::uint64_t next_;
    bool keep_;
    TraceHook hook_;
    std::vector<Snapshot>* sink_;
};

inline void finish(RunResult& r, const PullLedger& ledger, const SamplerBank& bank) {
    r.total_pulls = ledger.total();
    r.per_arm_pulls = ledger.per_arm();
    r.budget_exhausted = r.stop_reason == StopReason::budget;
    if (bank.max_stddev() > 1.0)
        r.warnings.emplace_back("arm stddev exceeds 1; confidence widths assume 1-sub-Gaussian rewards");
}

inline void require_delta(double delta, double upper, bool inclusive, const char* who) {
    const bool ok = delta > 0.0 && (inclusive ? delta <= upper : delta < upper);
    if (!ok)
        throw InvalidSpec(std::string(who) + ": delta must lie in (0, " + std::to_string(upper) +
                          (inclusive ? "]" : ")"));
}

template <class Less>
std::optional<std::size_t> arg_best(std::size_t n, Less&& better, const std::vector<char>& eligible) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < n; ++i) {
        if (!eligible[i]) continue;
        if (!best || better(i, *best)) best = i;
    }
    return best;
}

}  // namespace detail
}  // namespace allgood
