// Loads a means file and runs one experiment through the runner, writing
// the usual result files under ./results.

#include <cstdio>

#include "allgood/experiments/runner.hpp"

int main(int argc, char** argv) {
    using namespace allgood::experiments;
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s CONFIG\n", argv[0]);
        return 1;
    }
    const auto config = load_config(argv[1]);
    const auto rec = run_experiment(config);
    for (const auto& a : config.algorithms) {
        const auto& agg = rec.aggregate[a.label];
        std::printf("%-12s success=%.3f mean pulls=%.0f\n", a.label.c_str(), agg["success_rate"].get<double>(),
                    agg["total_pulls"]["mean"].get<double>());
    }
    std::printf("wrote %s\n", rec.directory.string().c_str());
}
