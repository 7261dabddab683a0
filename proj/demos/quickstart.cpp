// Finds every arm within 0.5 of the best on a five-arm Gaussian instance.

#include <cstdio>

#include "allgood/algorithms/east.hpp"
#include "allgood/algorithms/fareast.hpp"
#include "allgood/algorithms/st2.hpp"

int main() {
    using namespace allgood;
    const BanditInstance instance({1.0, 0.8, 0.6, 0.2, 0.0});
    const auto spec = ThresholdSpec::additive(0.5);
    const auto bank = SamplerBank::gaussian(instance, 2024);

    RunOptions opt;
    opt.delta = 0.05;

    const auto print = [](const char* name, const RunResult& r) {
        std::printf("%-8s pulls=%-8llu stop=%-16s set={", name, static_cast<unsigned long long>(r.total_pulls),
                    to_string(r.stop_reason));
        for (std::size_t i = 0; i < r.returned_set.size(); ++i) std::printf(i ? ", %zu" : "%zu", r.returned_set[i]);
        std::printf("}\n");
    };
    print("St2", st2_run(bank, spec, opt));
    print("East", east_run(bank, spec, opt));
    print("Fareast", fareast_run(bank, spec, opt));

    std::printf("true good set has %zu arms\n", good_set(instance, spec).size());
}
