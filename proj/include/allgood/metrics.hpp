#pragma once

// Set-recovery metrics and closed-form sample-complexity bounds.
//
// Bounds whose universal constants are unknown are evaluated with those
// constants set to 1 and flagged order_only. Natural logs throughout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "allgood/core.hpp"
#include "allgood/error.hpp"

namespace allgood {

struct Prf1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Precision, recall and F1 of `guessed` against `truth`. Both must be
/// sorted and duplicate-free. An empty guess has precision 1.
inline Prf1 prf1(const IndexSet& guessed, const IndexSet& truth) {
    if (truth.empty()) throw DomainError("prf1: truth set is empty");
    std::size_t tp = 0;
    auto g = guessed.begin();
    auto t = truth.begin();
    while (g != guessed.end() && t != truth.end()) {
        if (*g < *t) {
            ++g;
        } else if (*t < *g) {
            ++t;
        } else {
            ++tp;
            ++g;
            ++t;
        }
    }
    Prf1 out;
    out.precision = guessed.empty() ? 1.0 : static_cast<double>(tp) / static_cast<double>(guessed.size());
    out.recall = static_cast<double>(tp) / static_cast<double>(truth.size());
    const double s = out.precision + out.recall;
    out.f1 = s == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / s;
    return out;
}

struct BoundValue {
    double value = 0.0;
    bool defined = false;
    bool order_only = true;   // unknown universal constants set to 1
    bool degenerate = false;  // an infinite term made the value +inf
    std::string reason;       // why the value is undefined or degenerate
    /// value == log_factor * sum + extra when defined. For the instance lower bound
    /// bounds log_factor carries 2 ln(1/(2.4 delta)).
    double sum = 0.0;
    double log_factor = 0.0;
    double extra = 0.0;
    std::vector<double> terms;  // per-arm summands of `sum`
};

enum class UpperBoundKind { st2, fareast, east };

struct BoundReport {
    BoundValue lower_bound_thm1;
    BoundValue lower_bound_moderate;
    BoundValue st2_upper_order;
    BoundValue fareast_upper_order;
    BoundValue east_upper;
};

namespace detail {

inline double inv_sq(double x) { return x == 0.0 ? kInfinity : 1.0 / (x * x); }

inline BoundValue undefined(std::string why) {
    BoundValue b;
    b.value = std::nan("");
    b.reason = std::move(why);
    return b;
}

inline void settle(BoundValue& b) {
    b.defined = true;
    double s = 0.0;
    for (double t : b.terms) s += t;
    b.sum = s;
    b.value = b.log_factor * b.sum + b.extra;
    if (std::isinf(b.value)) {
        b.degenerate = true;
        if (b.reason.empty()) b.reason = "an arm lies on the threshold";
    }
}

/// Additive and multiplicative offsets shared by every bound:
/// threshold distance, alpha distance and beta distance of arm i.
struct Distances {
    std::vector<double> to_threshold;  // mu_1 - eps - mu_i  or (1-eps) mu_1 - mu_i
    std::vector<double> to_alpha;      // mu_1 + alpha - mu_i (alpha scaled by 1/(1-eps) when multiplicative)
    std::vector<double> to_beta;       // same with beta; +inf when the bad set is empty
    GapSummary gaps;
    double top = 0.0;
};

inline Distances distances(const BanditInstance& instance, const ThresholdSpec& spec) {
    Distances d;
    d.gaps = gap_summary(instance, spec.exact());
    d.top = instance.top();
    const double scale = spec.mode == ThresholdMode::multiplicative ? 1.0 / (1.0 - spec.epsilon) : 1.0;
    for (std::size_t i = 0; i < instance.size(); ++i) {
        const double m = instance.mean(i);
        d.to_threshold.push_back(d.gaps.threshold - m);
        d.to_alpha.push_back(d.top + d.gaps.alpha * scale - m);
        d.to_beta.push_back(std::isinf(d.gaps.beta) ? kInfinity : d.top + d.gaps.beta * scale - m);
    }
    return d;
}

inline const char* require_supported(const ThresholdSpec& spec) {
    if (spec.mode == ThresholdMode::lipschitz) return "bounds are evaluated for additive and multiplicative thresholds only";
    return nullptr;
}

/// max(Delta_i, |shift - Delta_i|) <= cap for every arm.
inline bool gaps_within(const Distances& d, double shift, double cap) {
    for (double delta : d.gaps.delta)
        if (std::max(delta, std::abs(shift - delta)) > cap) return false;
    return true;
}

inline double lil_term(double c, double x, double d, double n, double inner) {
    // c / x^2 * ln((2n/delta) * log2(inner * n / (delta x^2)))
    if (std::isinf(x)) return 0.0;
    if (x == 0.0) return kInfinity;
    const double x2 = x * x;
    return c / x2 * std::log(2.0 * n / d * std::log2(inner * n / (d * x2)));
}

}  // namespace detail

/// Instance lower bound for Gaussian arms:
/// 2 sum_i max{1/(mu_1 - eps - mu_i)^2, 1/(mu_1 + alpha - mu_i)^2} ln(1/(2.4 delta)),
/// with the multiplicative analogue using (1-eps) mu_1 and alpha/(1-eps).
inline BoundValue lower_bound_thm1(const BanditInstance& instance, const ThresholdSpec& spec, double delta) {
    if (const char* why = detail::require_supported(spec)) return detail::undefined(why);
    if (!(delta > 0.0 && delta < 1.0 / 2.4)) return detail::undefined("delta must lie in (0, 1/2.4)");
    const auto d = detail::distances(instance, spec);
    BoundValue b;
    b.order_only = false;
    b.log_factor = 2.0 * std::log(1.0 / (2.4 * delta));
    for (std::size_t i = 0; i < instance.size(); ++i)
        b.terms.push_back(std::max(detail::inv_sq(d.to_threshold[i]), detail::inv_sq(d.to_alpha[i])));
    detail::settle(b);
    return b;
}

/// Moderate-confidence lower bound: the instance lower-bound sum plus
/// sum_i 1/(mu_1 + beta - mu_i)^2, with the unknown constant set to 1.
/// Defined for additive thresholds with |G_{2 beta}| = 1 and beta < eps/2.
inline BoundValue lower_bound_moderate(const BanditInstance& instance, const ThresholdSpec& spec, double delta) {
    if (spec.mode != ThresholdMode::additive) return detail::undefined("moderate bound is additive only");
    BoundValue base = lower_bound_thm1(instance, spec, delta);
    if (!base.defined) return base;
    const auto d = detail::distances(instance, spec);
    const double beta = d.gaps.beta;
    if (std::isinf(beta)) return detail::undefined("no bad arms, beta is infinite");
    if (!(beta < spec.epsilon / 2.0)) return detail::undefined("requires beta < eps/2");
    std::size_t near = 0;
    for (std::size_t i = 0; i < instance.size(); ++i)
        if (instance.mean(i) >= d.top - 2.0 * beta) ++near;
    if (near != 1) return detail::undefined("requires exactly one arm within 2 beta of the best");
    BoundValue b = base;
    b.order_only = true;
    b.reason.clear();
    b.degenerate = false;
    b.extra = 0.0;
    for (std::size_t i = 0; i < instance.size(); ++i) b.extra += detail::inv_sq(d.to_beta[i]);
    detail::settle(b);
    return b;
}

/// Upper-bound expressions. St2 and Fareast are order expressions
/// (constants 1); East uses the explicit constants.
inline BoundValue upper_bound_order(const BanditInstance& instance, const ThresholdSpec& spec, double delta,
                                    UpperBoundKind which) {
    using detail::inv_sq;
    if (const char* why = detail::require_supported(spec)) return detail::undefined(why);
    const auto d = detail::distances(instance, spec);
    const bool mult = spec.mode == ThresholdMode::multiplicative;
    const double n = static_cast<double>(instance.size());
    const double eps = spec.epsilon, gamma = spec.slack, top = d.top;
    const double shift = mult ? eps * top : eps;

    auto st2 = [&]() {
        if (!(delta > 0.0 && delta <= 0.5)) return detail::undefined("requires delta in (0, 1/2]");
        if (mult) {
            if (!(top > 0.0)) return detail::undefined("requires mu_1 > 0");
            if (gamma > std::min(16.0 / top, 0.5)) return detail::undefined("requires gamma <= min(16/mu_1, 1/2)");
            if (!detail::gaps_within(d, shift, 2.0)) return detail::undefined("requires max(Delta_i, |eps mu_1 - Delta_i|) <= 2");
        } else {
            if (gamma > 16.0) return detail::undefined("requires gamma <= 16");
            if (!detail::gaps_within(d, shift, 8.0)) return detail::undefined("requires max(Delta_i, |eps - Delta_i|) <= 8");
        }
        BoundValue b;
        b.log_factor = std::log(n / delta);
        const double cap = gamma > 0.0 ? (mult ? 1.0 / (gamma * gamma * top * top) : 1.0 / (gamma * gamma)) : kInfinity;
        for (std::size_t i = 0; i < instance.size(); ++i) {
            const double m = std::max({inv_sq(d.to_threshold[i]), inv_sq(d.to_alpha[i]), inv_sq(d.to_beta[i])});
            b.terms.push_back(std::min(m, cap));
        }
        detail::settle(b);
        return b;
    };

    switch (which) {
        case UpperBoundKind::st2: return st2();
        case UpperBoundKind::fareast: {
            if (!(delta > 0.0 && delta < 0.125)) return detail::undefined("requires delta in (0, 1/8)");
            if (gamma > 0.0) {
                BoundValue b = st2();
                if (b.defined) b.reason = "slack > 0: bounded by a constant times the (ST)^2 expression";
                return b;
            }
            if (mult) {
                if (!(top >= 0.0)) return detail::undefined("requires mu_1 >= 0");
                if (!detail::gaps_within(d, shift, 6.0)) return detail::undefined("requires max(Delta_i, |eps mu_1 - Delta_i|) <= 6");
            } else if (!detail::gaps_within(d, shift, 8.0)) {
                return detail::undefined("requires max(Delta_i, |eps - Delta_i|) <= 8");
            }
            BoundValue b;
            b.log_factor = std::log(n / delta);
            for (std::size_t i = 0; i < instance.size(); ++i) {
                b.terms.push_back(std::max(inv_sq(d.to_threshold[i]), inv_sq(d.to_alpha[i])));
                if (instance.mean(i) < d.gaps.threshold) b.extra += n * inv_sq(d.to_threshold[i]);
            }
            detail::settle(b);
            return b;
        }
        case UpperBoundKind::east: {
            if (!(delta > 0.0 && delta <= 0.5)) return detail::undefined("requires delta in (0, 1/2]");
            double c_thr = 64, c_gap = 256, in_thr = 768, in_gap = 768, c_cap = 64, in_cap = 192;
            double cap_scale = 1.0;
            if (mult) {
                if (!(top > 0.0)) return detail::undefined("requires mu_1 > 0");
                if (!(gamma < std::min(1.0, 6.0 / top))) return detail::undefined("requires gamma < min(1, 6/mu_1)");
                if (!detail::gaps_within(d, shift, 6.0)) return detail::undefined("requires max(Delta_i, |eps mu_1 - Delta_i|) <= 6");
                c_gap = 576;
                in_thr = 192;
                in_gap = 1728;
                c_cap = 144 * (1.0 - eps + gamma);
                in_cap = 432 * (1.0 - eps + gamma);
                cap_scale = top;
            } else {
                if (!(gamma <= 8.0)) return detail::undefined("requires gamma in [0, 8]");
                if (!detail::gaps_within(d, shift, 8.0)) return detail::undefined("requires max(Delta_i, |eps - Delta_i|) <= 8");
            }
            BoundValue b;
            b.order_only = false;
            b.log_factor = 1.0;
            const double cap = gamma > 0.0 ? detail::lil_term(c_cap, gamma * cap_scale, delta, n, in_cap) : kInfinity;
            for (std::size_t i = 0; i < instance.size(); ++i) {
                const double m = std::max({detail::lil_term(c_thr, d.to_threshold[i], delta, n, in_thr),
                                           detail::lil_term(c_gap, d.to_alpha[i], delta, n, in_gap),
                                           detail::lil_term(c_gap, d.to_beta[i], delta, n, in_gap)});
                b.terms.push_back(std::min(m, cap));
            }
            detail::settle(b);
            return b;
        }
    }
    return detail::undefined("unknown bound");
}

inline BoundReport bound_report(const BanditInstance& instance, const ThresholdSpec& spec, double delta) {
    BoundReport r;
    r.lower_bound_thm1 = lower_bound_thm1(instance, spec, delta);
    r.lower_bound_moderate = lower_bound_moderate(instance, spec, delta);
    r.st2_upper_order = upper_bound_order(instance, spec, delta, UpperBoundKind::st2);
    r.fareast_upper_order = upper_bound_order(instance, spec, delta, UpperBoundKind::fareast);
    r.east_upper = upper_bound_order(instance, spec, delta, UpperBoundKind::east);
    return r;
}

}  // namespace allgood
