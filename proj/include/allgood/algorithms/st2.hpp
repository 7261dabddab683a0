#pragma once

// Optimism-based all-epsilon search: one UCB-style pull to refine the
// threshold estimate and two LUCB-style pulls on either side of it, until
// every arm is certified above the upper or below the lower threshold bound.

#include <algorithm>
#include <vector>

#include "allgood/confidence.hpp"
#include "allgood/core.hpp"
#include "allgood/run.hpp"
#include "allgood/sampling.hpp"

namespace allgood {

namespace detail {

class St2Machine {
public:
    St2Machine(const SamplerBank& bank, const ThresholdSpec& spec, const RunOptions& opt, PullLedger& ledger)
        : spec_(spec), opt_(opt), lane_(bank, stream_id(opt.slot, Lane::main), ledger), n_(bank.size()),
          mean_(n_), lcb_(n_), ucb_(n_), good_(n_), known_(n_), conf_delta_(opt.delta / static_cast<double>(n_)) {}

    void pull(std::size_t i) {
        lane_.pull(i);
        mean_[i] = lane_.mean(i);
        const double c = width(lane_.pulls(i), conf_delta_, opt_.confidence);
        lcb_[i] = mean_[i] - c;
        ucb_[i] = mean_[i] + c;
    }

    void initialize() {
        for (std::size_t i = 0; i < n_; ++i) pull(i);
        refresh();
    }

    /// Recomputes the threshold bounds, the empirical good set and the known set.
    /// Returns true when every arm is known.
    bool refresh() {
        const double top = *std::max_element(mean_.begin(), mean_.end());
        const double max_ucb = *std::max_element(ucb_.begin(), ucb_.end());
        const double max_lcb = *std::max_element(lcb_.begin(), lcb_.end());
        const double emp_thr = spec_.threshold(top);
        if (spec_.mode == ThresholdMode::additive) {
            upper_ = max_ucb - spec_.epsilon - spec_.slack;
            lower_ = max_lcb - spec_.epsilon;
        } else {
            upper_ = (1.0 - spec_.epsilon - spec_.slack) * max_ucb;
            lower_ = (1.0 - spec_.epsilon) * max_lcb;
        }
        bool all = true;
        for (std::size_t i = 0; i < n_; ++i) {
            good_[i] = mean_[i] >= emp_thr;
            known_[i] = ucb_[i] < lower_ || lcb_[i] > upper_;
            all = all && known_[i];
        }
        return all;
    }

    /// One iteration: up to three pulls.
    void step() {
        std::optional<std::size_t> i1, i2;
        for (std::size_t i = 0; i < n_; ++i) {
            if (known_[i]) continue;
            if (good_[i]) {
                if (!i1 || lcb_[i] < lcb_[*i1]) i1 = i;
            } else {
                if (!i2 || ucb_[i] > ucb_[*i2]) i2 = i;
            }
        }
        if (i1) pull(*i1);
        if (i2) pull(*i2);
        std::size_t top = 0;
        for (std::size_t i = 1; i < n_; ++i)
            if (ucb_[i] > ucb_[top]) top = i;
        pull(top);
    }

    IndexSet certified() const {
        IndexSet out;
        for (std::size_t i = 0; i < n_; ++i)
            if (lcb_[i] > upper_) out.push_back(i);
        return out;
    }

    IndexSet empirical_good() const {
        IndexSet out;
        for (std::size_t i = 0; i < n_; ++i)
            if (good_[i]) out.push_back(i);
        return out;
    }

private:
    const ThresholdSpec& spec_;
    const RunOptions& opt_;
    ArmLane lane_;
    std::size_t n_;
    std::vector<double> mean_, lcb_, ucb_;
    std::vector<char> good_, known_;
    double conf_delta_;
    double upper_ = 0.0, lower_ = 0.0;
};

}  // namespace detail

/// Runs (ST)^2 until every arm is known or the budget is reached.
///
/// Arms are certified with widths C_{delta/n}(T_i). Returns
/// {i : lcb_i > U_t}. On budget exhaustion the empirical good set is
/// returned instead and the result is flagged. Overshoot past the budget is
/// at most 2 pulls (one partial iteration).
inline RunResult st2_run(const SamplerBank& bank, const ThresholdSpec& spec, const RunOptions& opt) {
    spec.validate();
    if (spec.mode == ThresholdMode::lipschitz) throw InvalidSpec("st2: lipschitz thresholds are not supported");
    detail::require_delta(opt.delta, 0.5, true, "st2");

    RunResult r;
    PullLedger ledger(bank.size(), opt.budget);
    detail::Tracer tracer(opt, r.trace);
    detail::St2Machine m(bank, spec, opt, ledger);

    m.initialize();
    tracer.poll(ledger.total(), [&] { return m.empirical_good(); });
    bool done = m.refresh();
    while (!done) {
        if (ledger.exhausted()) break;
        m.step();
        done = m.refresh();
        tracer.poll(ledger.total(), [&] { return m.empirical_good(); });
    }
    if (done) {
        r.stop_reason = StopReason::all_known;
        r.returned_set = m.certified();
    } else {
        r.stop_reason = StopReason::budget;
        r.returned_set = m.empirical_good();
    }
    detail::finish(r, ledger, bank);
    return r;
}

}  // namespace allgood
