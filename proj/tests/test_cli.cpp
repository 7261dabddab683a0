#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "allgood/cli.hpp"

using namespace allgood;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "allgood_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("allgood_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string two_arm_config(const fs::path& out) {
    return "name: two\ninstance: {means: [1.0, 0.0]}\nthreshold: {mode: additive, epsilon: 0.5}\n"
           "algorithms: [st2, uniform]\nbudget: 20000\ntrials: 3\nseed: 5\ntrace_interval: 100\noutput: " +
           out.string() + "\n";
}

}  // namespace

TEST_CASE("bounds subcommand") {
    const auto r = run({"bounds", "1,0", "additive:0.5", "0.05"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["lower_bound_thm1"]["value"].get<double>() == Catch::Approx(16.0 * std::log(1.0 / 0.12)).epsilon(1e-12));
    CHECK(std::abs(j["lower_bound_thm1"]["value"].get<double>() - 33.92) < 5e-3);
    CHECK(j["means"] == nlohmann::json::array({1.0, 0.0}));
    CHECK(j["delta"] == 0.05);
    CHECK(j["st2_upper_order"]["order_only"] == true);
    CHECK(run({"bounds", "2,1", "multiplicative:0.25:0.1", "0.05"}).code == 0);
    CHECK(run({"bounds", "1,0", "lipschitz:0.8:0", "0.05"}).code == 0);
}

TEST_CASE("bounds argument errors exit with 1") {
    CHECK(run({"bounds", "1,x", "additive:0.5", "0.05"}).code == 1);
    CHECK(run({"bounds", "1,0", "additive", "0.05"}).code == 1);
    CHECK(run({"bounds", "1,0", "cubic:1", "0.05"}).code == 1);
    CHECK(run({"bounds", "1,0", "additive:-1", "0.05"}).code == 1);
    CHECK(run({"bounds", "1,0", "additive:0.5", "2"}).code == 1);
    CHECK(run({"bounds", "1,0"}).code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("simulate writes results and trace-plot reads them") {
    const auto dir = scratch("simulate");
    write(dir / "two.yaml", two_arm_config(dir / "results"));
    const auto r = run({"simulate", (dir / "two.yaml").string(), "--threads", "2"});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto res = dir / "results" / "two";
    for (const char* f : {"trials.csv", "trial_0.csv", "trial_2.csv", "aggregate.json", "bounds.json", "config_echo.json"})
        CHECK(fs::exists(res / f));
    CHECK(slurp(res / "trials.csv").rfind("trial,algorithm,status,total_pulls,stop_reason,returned_set,correct,precision,recall,f1\n", 0) == 0);

    const auto p = run({"trace-plot", res.string()});
    REQUIRE(p.code == 0);
    CHECK(p.out.rfind("algorithm,pulls,metric,value,lo,hi\n", 0) == 0);
    CHECK(p.out.find("St2,100,f1,") != std::string::npos);
    CHECK(p.out.find("Uniform,20000,recall,") != std::string::npos);
    const auto q = run({"trace-plot", res.string(), "--out", (dir / "plot.csv").string()});
    CHECK(q.code == 0);
    CHECK(slurp(dir / "plot.csv") == p.out);

    // Overrides land in the echoed config.
    CHECK(run({"simulate", "--config", (dir / "two.yaml").string(), "--seed", "77", "--budget", "5000", "--out",
               (dir / "other").string()})
              .code == 0);
    const auto echo = nlohmann::json::parse(slurp(dir / "other" / "two" / "config_echo.json"));
    CHECK(echo["config"]["seed"] == 77);
    CHECK(echo["config"]["budget"] == 5000);
}

TEST_CASE("simulate and dataset check the instance source") {
    const auto dir = scratch("dataset");
    write(dir / "means.csv", "id,mean\na,1.0\nb,0.0\nc,0.9\n");
    write(dir / "d.yaml", "name: d\ninstance: {dataset: means.csv}\nthreshold: {mode: additive, epsilon: 0.5}\n"
                          "algorithms: [st2]\ntrials: 2\noutput: " +
                              (dir / "results").string() + "\n");
    write(dir / "two.yaml", two_arm_config(dir / "results"));
    CHECK(run({"simulate", (dir / "d.yaml").string()}).code == 1);
    CHECK(run({"dataset", (dir / "two.yaml").string()}).code == 1);
    const auto r = run({"dataset", (dir / "d.yaml").string()});
    INFO(r.err);
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "results" / "d" / "trials.csv"));
}

TEST_CASE("config errors exit with 1 and leave error.json") {
    const auto dir = scratch("config_error");
    CHECK(run({"simulate"}).code == 1);
    CHECK(run({"simulate", (dir / "missing.yaml").string()}).code == 1);
    write(dir / "bad.yaml", "name: bad\ninstance: {means: [1.0, 0.0, 0.5]}\nthreshold: {mode: additive, epsilon: 0.5}\n"
                            "algorithms: [uniform]\nbudget: 2\noutput: " +
                                (dir / "results").string() + "\n");
    const auto r = run({"simulate", (dir / "bad.yaml").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("config error") != std::string::npos);
    const auto e = nlohmann::json::parse(slurp(dir / "results" / "bad" / "error.json"));
    CHECK(e["kind"] == "config-error");
    CHECK(run({"trace-plot", (dir / "nowhere").string()}).code == 1);
}

TEST_CASE("runtime failures exit with 2") {
    const auto dir = scratch("runtime");
    write(dir / "fail.yaml", "name: fail\ninstance: {means: [1.0, 0.0]}\n"
                             "threshold: {mode: additive, epsilon: 0.5}\nalgorithms: [fareast]\ndelta: 0.2\n"
                             "trials: 1\noutput: " +
                                 (dir / "results").string() + "\n");
    const auto r = run({"simulate", (dir / "fail.yaml").string()});
    CHECK(r.code == 2);
    const auto e = nlohmann::json::parse(slurp(dir / "results" / "fail" / "error.json"));
    CHECK(e["failed_trials"][0]["kind"] == "invalid-spec");

    // Output root that is a regular file.
    write(dir / "blocker", "");
    write(dir / "two.yaml", two_arm_config(dir / "blocker"));
    CHECK(run({"simulate", (dir / "two.yaml").string()}).code == 2);
}
