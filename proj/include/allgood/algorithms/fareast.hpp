#pragma once

// Two coupled filters run in rounds. The bad filter compares every
// undecided arm against an approximately best anchor found by a finder;
// the good filter is EAST split across rounds and receives exactly as many
// pulls per round as the bad filter consumed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "allgood/algorithms/east.hpp"
#include "allgood/algorithms/median_elimination.hpp"
#include "allgood/confidence.hpp"
#include "allgood/core.hpp"
#include "allgood/error.hpp"
#include "allgood/run.hpp"
#include "allgood/sampling.hpp"

namespace allgood {

enum class FinderKind { median_elimination, lucb };

struct FareastOptions {
    FinderKind finder = FinderKind::median_elimination;
    double finder_kappa = 1.0 / 16.0;
};

namespace detail {

struct BudgetStop {};

inline std::uint64_t fareast_tau(std::uint64_t round, std::size_t n, double delta) {
    const double r = static_cast<double>(round);
    const double delta_r = delta / (2.0 * r * r);
    return static_cast<std::uint64_t>(
        std::ceil(std::ldexp(1.0, static_cast<int>(2 * round + 3)) * std::log(8.0 * static_cast<double>(n) / delta_r)));
}

class Fareast {
public:
    Fareast(const SamplerBank& bank, const ThresholdSpec& spec, const RunOptions& opt, const FareastOptions& fo,
            RunResult& r)
        : spec_(spec), opt_(opt), fo_(fo), r_(r), n_(bank.size()), ledger_(n_, opt.budget), tracer_(opt, r.trace),
          good_lane_(bank, stream_id(opt.slot, Lane::good_filter), ledger_),
          bad_lane_(bank, stream_id(opt.slot, Lane::bad_filter), ledger_),
          finder_lane_(bank, stream_id(opt.slot, Lane::finder), ledger_), good_(n_, 0), bad_(n_, 0), active_(n_, 1),
          gf_delta_(opt.delta / (2.0 * static_cast<double>(n_))), bank_(bank) {}

    void run() {
        try {
            for (std::uint64_t round = 1;; ++round) {
                if (play_round(round)) break;
            }
        } catch (const BudgetStop&) {
            r_.stop_reason = StopReason::budget;
            r_.returned_set = recommendation();
        }
        finish(r_, ledger_, bank_);
    }

private:
    void guard() {
        if (ledger_.exhausted()) throw BudgetStop{};
    }
    void poll() {
        tracer_.poll(ledger_.total(), [&] { return recommendation(); });
    }

    /// Returns true once a stopping rule fired.
    bool play_round(std::uint64_t round) {
        FilterRound log;
        log.round = round;
        log.tau = fareast_tau(round, n_, opt_.delta);

        std::vector<std::size_t> undecided;
        for (std::size_t i = 0; i < n_; ++i)
            if (!good_[i] && !bad_[i]) undecided.push_back(i);
        log.undecided = undecided.size();

        const std::uint64_t before = ledger_.total();
        const double eps_r = std::ldexp(1.0, -static_cast<int>(round));
        const BatchGuard g = [this] {
            guard();
            poll();
        };
        const FinderResult found = fo_.finder == FinderKind::lucb
                                       ? lucb_good_arm(finder_lane_, eps_r, fo_.finder_kappa, g, opt_.confidence)
                                       : median_elimination(finder_lane_, eps_r, fo_.finder_kappa, g);
        log.finder_pulls = found.pulls;
        guard();
        const double anchor = bad_lane_.pull_batch(found.arm, log.tau);
        poll();
        if (spec_.mode == ThresholdMode::multiplicative && anchor + width(log.tau, opt_.delta, opt_.confidence) < 0.0)
            throw AlgorithmAbort("fareast: bad-filter anchor mean is confidently negative (" + std::to_string(anchor) +
                                 "); multiplicative thresholds need a nonnegative best mean");
        for (std::size_t i : undecided) {
            guard();
            const double m = bad_lane_.pull_batch(i, log.tau);
            poll();
            if (declared_bad(anchor, m, round) && !good_[i]) bad_[i] = 1;
        }
        log.bad_filter_pulls = ledger_.total() - before;

        const bool stopped = good_filter(log.bad_filter_pulls, log);
        log.good = members(good_);
        log.bad = members(bad_);
        std::uint64_t lo = ~0ull, hi = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (!active_[i]) continue;
            lo = std::min(lo, good_lane_.pulls(i));
            hi = std::max(hi, good_lane_.pulls(i));
        }
        log.min_count = lo == ~0ull ? 0 : lo;
        log.max_count = hi;
        r_.rounds.push_back(std::move(log));
        return stopped;
    }

    bool declared_bad(double anchor, double m, std::uint64_t round) const {
        if (spec_.mode == ThresholdMode::additive)
            return anchor - m >= spec_.epsilon + std::ldexp(1.0, 1 - static_cast<int>(round));
        return (1.0 - spec_.epsilon) * anchor - m > std::ldexp(1.0, -static_cast<int>(round + 1)) * (2.0 - spec_.epsilon);
    }

    std::size_t next_active(std::size_t from) const {
        while (from < n_ && !active_[from]) ++from;
        return from;
    }

    bool good_filter(std::uint64_t quota, FilterRound& log) {
        for (std::uint64_t s = 0; s < quota; ++s) {
            guard();
            cursor_ = next_active(cursor_);
            good_lane_.pull(cursor_);
            ++log.good_filter_pulls;
            poll();
            cursor_ = next_active(cursor_ + 1);
            if (cursor_ < n_) continue;
            cursor_ = 0;
            ++t_;
            if (evaluate()) return true;
        }
        return false;
    }

    /// Good-filter update once every active arm has t_ samples.
    bool evaluate() {
        const double c = width(t_, gf_delta_, opt_.confidence);
        double top = -kInfinity;
        for (std::size_t i = 0; i < n_; ++i)
            if (active_[i]) top = std::max(top, good_lane_.mean(i));
        if (spec_.mode == ThresholdMode::multiplicative && top + c < 0.0)
            throw AlgorithmAbort("fareast: good-filter upper bound on the best mean is negative (" +
                                 std::to_string(top + c) + "); multiplicative thresholds need a nonnegative best mean");
        top_ = top;
        const Interval b = threshold_bounds(spec_, top, c);
        const std::vector<char> was_active = active_;
        for (std::size_t i = 0; i < n_; ++i) {
            if (!was_active[i]) continue;
            const double m = good_lane_.mean(i);
            if (m - c >= b.hi && !bad_[i]) good_[i] = 1;
            const bool drop_bad = m + c <= b.lo;
            const bool drop_good = !drop_bad && good_[i] && m + c <= top - c;
            if (drop_bad) {
                active_[i] = 0;
                if (!good_[i]) bad_[i] = 1;
                r_.eliminations.push_back({i, t_, false, false});
            } else if (drop_good) {
                active_[i] = 0;
                r_.eliminations.push_back({i, t_, true, false});
            }
        }
        bool inside = true, covered = true;
        for (std::size_t i = 0; i < n_; ++i) {
            if (active_[i] && !good_[i]) inside = false;
            if (!good_[i] && !bad_[i]) covered = false;
        }
        if (inside || covered) {
            r_.stop_reason = inside ? StopReason::active_subset_good : StopReason::all_known;
            r_.returned_set = members(good_);
            return true;
        }
        if (slack_resolved(spec_, b, c)) {
            r_.stop_reason = StopReason::gamma_resolved;
            IndexSet out;
            for (std::size_t i = 0; i < n_; ++i)
                if (good_[i] || active_[i]) out.push_back(i);
            r_.returned_set = std::move(out);
            return true;
        }
        return false;
    }

    /// Declared good arms plus active, undeclared-bad arms that clear the
    /// good filter's empirical threshold.
    IndexSet recommendation() const {
        IndexSet out;
        const bool have = t_ > 0;
        const double thr = have ? spec_.threshold(top_) : 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (good_[i]) {
                out.push_back(i);
            } else if (have && active_[i] && !bad_[i] && good_lane_.pulls(i) > 0 && good_lane_.mean(i) >= thr) {
                out.push_back(i);
            }
        }
        return out;
    }

    const ThresholdSpec& spec_;
    const RunOptions& opt_;
    const FareastOptions& fo_;
    RunResult& r_;
    std::size_t n_;
    PullLedger ledger_;
    Tracer tracer_;
    ArmLane good_lane_, bad_lane_, finder_lane_;
    std::vector<char> good_, bad_, active_;
    double gf_delta_;
    const SamplerBank& bank_;
    std::size_t cursor_ = 0;
    std::uint64_t t_ = 0;
    double top_ = 0.0;
};

}  // namespace detail

/// Runs FAREAST (additive or multiplicative). delta must lie in (0, 1/8).
///
/// Stops when the good filter's active set is inside the declared good set
/// or every arm is declared, returning the good set; with slack, the
/// threshold-bracket rule returns good and active arms together. The budget
/// is checked before every batch, so a run can overshoot by one batch.
inline RunResult fareast_run(const SamplerBank& bank, const ThresholdSpec& spec, const RunOptions& opt,
                             const FareastOptions& fo = {}) {
    spec.validate();
    if (spec.mode == ThresholdMode::lipschitz) throw InvalidSpec("fareast: lipschitz thresholds are not supported");
    detail::require_delta(opt.delta, 0.125, false, "fareast");
    if (!(fo.finder_kappa > 0.0 && fo.finder_kappa < 1.0)) throw InvalidSpec("fareast: finder kappa must lie in (0, 1)");
    RunResult r;
    detail::Fareast f(bank, spec, opt, fo, r);
    f.run();
    return r;
}

}  // namespace allgood
