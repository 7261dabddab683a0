// EAST with a user-supplied monotone threshold Gamma(mu_1) = mu_1 / 2 - 0.1.

#include <cstdio>

#include "allgood/algorithms/east.hpp"

int main() {
    using namespace allgood;
    const auto gamma = ThresholdFunction::monotone([](double x) { return 0.5 * x - 0.1; }, 0.5, "half minus 0.1");
    const auto spec = ThresholdSpec::lipschitz(gamma);
    const BanditInstance instance({2.0, 1.4, 0.8, 0.5, -0.3});
    std::printf("threshold: %s, value at the best mean %.2f\n", spec.describe().c_str(), spec.threshold(instance.top()));

    const auto base = SamplerBank::gaussian(instance, 7);
    const auto truth = good_set(instance, spec);
    int correct = 0;
    for (std::uint64_t t = 0; t < 50; ++t) {
        RunOptions opt;
        opt.keep_trace = false;
        correct += east_run(base.for_trial(t), spec, opt).returned_set == truth;
    }
    std::printf("correct in %d of 50 trials\n", correct);
}
