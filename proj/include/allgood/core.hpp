#pragma once

// Instances, threshold semantics and the gap quantities shared by every
// algorithm and bound evaluator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "allgood/error.hpp"

namespace allgood {

using IndexSet = std::vector<std::size_t>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class BanditInstance {
public:
    BanditInstance() = default;
    explicit BanditInstance(std::vector<double> means, std::string label = {})
        : means_(std::move(means)), label_(std::move(label)) {
        if (means_.empty()) throw InvalidSpec("instance needs at least one arm");
        for (double m : means_)
            if (!std::isfinite(m)) throw InvalidSpec("instance means must be finite");
    }

    std::size_t size() const noexcept { return means_.size(); }
    std::span<const double> means() const noexcept { return means_; }
    double mean(std::size_t i) const { return means_.at(i); }
    double top() const { return *std::max_element(means_.begin(), means_.end()); }
    const std::string& label() const noexcept { return label_; }

private:
    std::vector<double> means_;
    std::string label_;
};

struct Interval {
    double lo;
    double hi;
};

/// Threshold map x -> Gamma(x) applied to the best mean, with interval
/// extrema. Built-ins are evaluated in closed form; custom maps carry
/// callables.
class ThresholdFunction {
public:
    using Eval = std::function<double(double)>;
    using Extrema = std::function<Interval(double, double)>;

    /// Gamma(x) = slope * x + intercept.
    static ThresholdFunction affine(double slope, double intercept) {
        ThresholdFunction f;
        f.kind_ = Kind::affine;
        f.slope_ = slope;
        f.intercept_ = intercept;
        f.lipschitz_ = std::abs(slope);
        return f;
    }
    /// Gamma(x) = x - epsilon, the additive threshold.
    static ThresholdFunction shift(double epsilon) {
        ThresholdFunction f;
        f.kind_ = Kind::shift;
        f.intercept_ = epsilon;
        f.lipschitz_ = 1.0;
        return f;
    }
    /// Gamma(x) = (1 - epsilon) x, the multiplicative threshold.
    static ThresholdFunction scale(double epsilon) {
        ThresholdFunction f;
        f.kind_ = Kind::scale;
        f.slope_ = 1.0 - epsilon;
        f.lipschitz_ = std::abs(1.0 - epsilon);
        return f;
    }
    /// User map that is monotone on the real line: extrema over [a, b] are
    /// attained at the endpoints.
    static ThresholdFunction monotone(Eval fn, double lipschitz, std::string name = "custom") {
        ThresholdFunction f;
        f.kind_ = Kind::custom;
        f.eval_ = fn;
        f.extrema_ = [fn](double a, double b) {
            const double fa = fn(a), fb = fn(b);
            return Interval{std::min(fa, fb), std::max(fa, fb)};
        };
        f.lipschitz_ = lipschitz;
        f.name_ = std::move(name);
        return f;
    }
    /// Fully general map; `extrema` must return (min, max) of Gamma over [a, b].
    static ThresholdFunction custom(Eval fn, Extrema extrema, double lipschitz,
                                    std::string name = "custom") {
        ThresholdFunction f;
        f.kind_ = Kind::custom;
        f.eval_ = std::move(fn);
        f.extrema_ = std::move(extrema);
        f.lipschitz_ = lipschitz;
        f.name_ = std::move(name);
        return f;
    }

    double operator()(double x) const {
        switch (kind_) {
            case Kind::affine: return slope_ * x + intercept_;
            case Kind::shift: return x - intercept_;
            case Kind::scale: return slope_ * x;
            case Kind::custom: return eval_(x);
        }
        return x;
    }

    Interval range(double a, double b) const {
        if (kind_ == Kind::custom) return extrema_(a, b);
        const double fa = (*this)(a), fb = (*this)(b);
        return fa <= fb ? Interval{fa, fb} : Interval{fb, fa};
    }

    double lipschitz() const noexcept { return lipschitz_; }
    bool valid() const noexcept {
        return lipschitz_ > 0.0 && (kind_ != Kind::custom || (eval_ && extrema_));
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::affine:
                return "affine(" + std::to_string(slope_) + "," + std::to_string(intercept_) + ")";
            case Kind::shift: return "shift(" + std::to_string(intercept_) + ")";
            case Kind::scale: return "scale(" + std::to_string(1.0 - slope_) + ")";
            case Kind::custom: return name_;
        }
        return {};
    }

    ThresholdFunction lowered(double amount) const {
        ThresholdFunction base = *this;
        return custom([base, amount](double x) { return base(x) - amount; },
                      [base, amount](double a, double b) {
                          Interval r = base.range(a, b);
                          return Interval{r.lo - amount, r.hi - amount};
                      },
                      lipschitz_, describe() + "-" + std::to_string(amount));
    }

private:
    enum class Kind { affine, shift, scale, custom };
    Kind kind_ = Kind::shift;
    double slope_ = 1.0;
    double intercept_ = 0.0;
    double lipschitz_ = 1.0;
    Eval eval_;
    Extrema extrema_;
    std::string name_;
};

enum class ThresholdMode { additive, multiplicative, lipschitz };

inline const char* to_string(ThresholdMode m) {
    switch (m) {
        case ThresholdMode::additive: return "additive";
        case ThresholdMode::multiplicative: return "multiplicative";
        case ThresholdMode::lipschitz: return "lipschitz";
    }
    return "?";
}

/// Which arms count as good, plus the slack gamma allowed in returned sets.
struct ThresholdSpec {
    ThresholdMode mode = ThresholdMode::additive;
    double epsilon = 0.0;  // unused for lipschitz
    ThresholdFunction gamma_fn = ThresholdFunction::shift(0.0);  // lipschitz only
    double slack = 0.0;

    static ThresholdSpec additive(double epsilon, double slack = 0.0) {
        ThresholdSpec s;
        s.mode = ThresholdMode::additive;
        s.epsilon = epsilon;
        s.slack = slack;
        return s;
    }
    static ThresholdSpec multiplicative(double epsilon, double slack = 0.0) {
        ThresholdSpec s;
        s.mode = ThresholdMode::multiplicative;
        s.epsilon = epsilon;
        s.slack = slack;
        return s;
    }
    static ThresholdSpec lipschitz(ThresholdFunction fn, double slack = 0.0) {
        ThresholdSpec s;
        s.mode = ThresholdMode::lipschitz;
        s.gamma_fn = std::move(fn);
        s.slack = slack;
        return s;
    }

    /// Threshold value when the best mean is `top`.
    double threshold(double top) const {
        switch (mode) {
            case ThresholdMode::additive: return top - epsilon;
            case ThresholdMode::multiplicative: return (1.0 - epsilon) * top;
            case ThresholdMode::lipschitz: return gamma_fn(top);
        }
        return top;
    }

    /// Extrema of the threshold when the best mean is only known to lie in [lo, hi].
    Interval threshold_range(double lo, double hi) const {
        switch (mode) {
            case ThresholdMode::additive: return {lo - epsilon, hi - epsilon};
            case ThresholdMode::multiplicative: return {(1.0 - epsilon) * lo, (1.0 - epsilon) * hi};
            case ThresholdMode::lipschitz: return gamma_fn.range(lo, hi);
        }
        return {lo, hi};
    }

    /// Spec whose good set is the largest set an algorithm may return:
    /// G_{eps+gamma}, M_{eps+gamma}, or {i : mu_i >= Gamma(mu_1) - gamma}.
    ThresholdSpec relaxed() const {
        ThresholdSpec s = *this;
        s.slack = 0.0;
        if (mode == ThresholdMode::lipschitz) {
            if (slack > 0.0) s.gamma_fn = gamma_fn.lowered(slack);
        } else {
            s.epsilon = epsilon + slack;
        }
        return s;
    }

    ThresholdSpec exact() const {
        ThresholdSpec s = *this;
        s.slack = 0.0;
        return s;
    }

    /// Checks the parameter invariants; throws InvalidSpec.
    void validate() const {
        if (!(slack >= 0.0) || !std::isfinite(slack)) throw InvalidSpec("slack gamma must be >= 0");
        switch (mode) {
            case ThresholdMode::additive:
                if (!(epsilon > 0.0) || !std::isfinite(epsilon))
                    throw InvalidSpec("additive epsilon must be > 0");
                break;
            case ThresholdMode::multiplicative:
                if (!(epsilon > 0.0 && epsilon <= 0.5))
                    throw InvalidSpec("multiplicative epsilon must lie in (0, 1/2]");
                break;
            case ThresholdMode::lipschitz:
                if (!gamma_fn.valid())
                    throw InvalidSpec("lipschitz threshold needs evaluation, extrema and L > 0");
                break;
        }
    }

    std::string describe() const {
        std::string s = to_string(mode);
        if (mode == ThresholdMode::lipschitz)
            s += ":" + gamma_fn.describe();
        else
            s += ":" + std::to_string(epsilon);
        if (slack > 0.0) s += ":gamma=" + std::to_string(slack);
        return s;
    }
};

namespace detail {
inline void require_usable(const BanditInstance& instance, const ThresholdSpec& spec) {
    if (spec.mode == ThresholdMode::multiplicative && !(instance.top() > 0.0))
        throw InvalidSpec("multiplicative threshold requires a positive best mean");
    if (spec.mode != ThresholdMode::lipschitz && !(spec.epsilon > 0.0))
        throw InvalidSpec("epsilon must be > 0");
}
}  // namespace detail

/// Ground-truth good set. The slack is ignored; ties at the threshold are good.
inline IndexSet good_set(const BanditInstance& instance, const ThresholdSpec& spec) {
    detail::require_usable(instance, spec);
    const double thr = spec.threshold(instance.top());
    IndexSet out;
    for (std::size_t i = 0; i < instance.size(); ++i)
        if (instance.mean(i) >= thr) out.push_back(i);
    return out;
}

struct GapSummary {
    std::vector<double> delta;  // mu_1 - mu_i
    double threshold = 0.0;
    double alpha = 0.0;         // smallest margin of a good arm above the threshold
    double beta = kInfinity;    // smallest margin of a bad arm below it
    IndexSet good;
};

inline GapSummary gap_summary(const BanditInstance& instance, const ThresholdSpec& spec) {
    detail::require_usable(instance, spec);
    GapSummary g;
    const double top = instance.top();
    g.threshold = spec.threshold(top);
    g.alpha = kInfinity;
    for (std::size_t i = 0; i < instance.size(); ++i) {
        const double m = instance.mean(i);
        g.delta.push_back(top - m);
        if (m >= g.threshold) {
            g.good.push_back(i);
            g.alpha = std::min(g.alpha, m - g.threshold);
        } else {
            g.beta = std::min(g.beta, g.threshold - m);
        }
    }
    return g;
}

/// True when good(exact) is a subset of `returned`, which in turn is a subset of good(relaxed).
inline bool contains_correctly(const IndexSet& returned, const IndexSet& lower, const IndexSet& upper) {
    return std::includes(returned.begin(), returned.end(), lower.begin(), lower.end()) &&
           std::includes(upper.begin(), upper.end(), returned.begin(), returned.end());
}

}  // namespace allgood
