// Prints lower and upper sample-complexity expressions as n grows on the
// many-equal-arms family.

#include <cstdio>

#include "allgood/experiments/presets.hpp"
#include "allgood/metrics.hpp"

int main() {
    using namespace allgood;
    const auto spec = ThresholdSpec::additive(0.99);
    std::printf("%6s %14s %14s %14s\n", "n", "lower", "st2 (order)", "fareast (order)");
    for (std::size_t n : {10, 25, 50, 100, 200, 400}) {
        const auto inst = experiments::fig3b(n, 0.99, 0.01);
        const auto r = bound_report(inst, spec, 0.01);
        std::printf("%6zu %14.4g %14.4g %14.4g\n", n, r.lower_bound_thm1.value, r.st2_upper_order.value,
                    r.fareast_upper_order.value);
    }
}
