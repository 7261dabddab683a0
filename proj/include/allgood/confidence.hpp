#pragma once

// Anytime confidence widths C_delta(t) = sqrt(c_phi * ln(log2(2t) / delta) / t)
// and their inversion h(x, delta).

#include <cmath>
#include <cstdint>
#include <limits>

#include "allgood/error.hpp"

namespace allgood {

struct ConfidenceConfig {
    double c_phi = 4.0;
};

/// Width after `t` samples at failure probability `delta`.
inline double width(std::uint64_t t, double delta, const ConfidenceConfig& cfg = {}) {
    if (t == 0) throw DomainError("confidence width needs t >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("confidence width needs delta in (0, 1)");
    const double td = static_cast<double>(t);
    const double arg = std::log2(2.0 * td) / delta;
    return std::sqrt(cfg.c_phi * std::log(arg) / td);
}

/// Closed-form sufficient sample count: for delta < 2e^{-e/2} and x <= 2,
/// t >= (4/x^2) ln((2/delta) log2(12/(delta x^2))) implies C_delta(t) <= x
/// when c_phi = 4.
inline double width_inverse_bound(double x, double delta) {
    return 4.0 / (x * x) * std::log(2.0 / delta * std::log2(12.0 / (delta * x * x)));
}

inline bool width_inverse_bound_applies(double x, double delta, const ConfidenceConfig& cfg = {}) {
    return cfg.c_phi == 4.0 && x > 0.0 && x <= 2.0 && delta > 0.0 &&
           delta < 2.0 * std::exp(-std::exp(1.0) / 2.0);
}

/// Smallest t with width(t, delta) <= x.
///
/// Small counts are scanned directly (the width can rise for t < 64 when
/// delta is close to 1); past t = 64 the width is strictly decreasing for
/// every delta < 1, so the boundary is found by bisection between 64 and an
/// upper bracket taken from the closed-form bound when it applies.
inline std::uint64_t samples_for_width(double x, double delta, const ConfidenceConfig& cfg = {}) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("target width must be positive");
    constexpr std::uint64_t kScan = 64;
    for (std::uint64_t t = 1; t <= kScan; ++t)
        if (width(t, delta, cfg) <= x) return t;

    std::uint64_t hi = 0;
    if (width_inverse_bound_applies(x, delta, cfg)) {
        const double seed = std::ceil(width_inverse_bound(x, delta));
        if (seed > static_cast<double>(kScan) && seed < 9.0e18) {
            hi = static_cast<std::uint64_t>(seed);
            if (width(hi, delta, cfg) > x) hi = 0;
        }
    }
    if (hi == 0) {
        hi = 2 * kScan;
        while (width(hi, delta, cfg) > x) {
            if (hi > (std::numeric_limits<std::uint64_t>::max() >> 2))
                throw DomainError("target width unreachable");
            hi *= 2;
        }
    }
    std::uint64_t lo = kScan;  // width(lo) > x
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (width(mid, delta, cfg) <= x)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// min(h(a, delta), h(b, delta)) <= h((a + b) / 2, delta); returns the right side.
inline std::uint64_t min_of_h_bound(double a, double b, double delta, const ConfidenceConfig& cfg = {}) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("min_of_h_bound needs positive arguments");
    return samples_for_width(0.5 * (a + b), delta, cfg);
}

}  // namespace allgood
