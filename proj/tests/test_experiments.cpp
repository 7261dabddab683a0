#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "allgood/experiments/runner.hpp"

using namespace allgood;
using namespace allgood::experiments;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("allgood_test_experiments_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_config(const std::string& name, const fs::path& out) {
    return parse_config(json::parse(R"({
        "name": ")" + name + R"(",
        "instance": {"means": [1.0, 0.8, 0.2, 0.0]},
        "threshold": {"mode": "additive", "epsilon": 0.5},
        "algorithms": ["st2", "east", "fareast", "ucb", {"name": "lucb1"}, "apt", "uniform"],
        "delta": 0.1, "trials": 4, "seed": 11, "budget": 200000, "trace_interval": 500,
        "output": ")" + out.string() + R"("
    })"));
}

}  // namespace

TEST_CASE("generic and caption datasets") {
    const auto dir = scratch("datasets");
    write(dir / "g.csv", "id,mean\na,1.5\nb, -0.25\n\nc,0\n");
    const auto g = load_means_csv((dir / "g.csv").string(), DatasetFormat::generic_means);
    CHECK(g.ids == std::vector<std::string>{"a", "b", "c"});
    CHECK(g.instance.mean(1) == -0.25);
    write(dir / "c.csv", "id,mean_rating,extra\n1,2.5,x\n2,1.0,y\n");
    const auto c = load_means_csv((dir / "c.csv").string(), DatasetFormat::caption_contest);
    CHECK(c.instance.size() == 2);
    CHECK(c.instance.mean(0) == 2.5);
    write(dir / "c_bad.csv", "id,mean_rating\n1,3.5\n");
    CHECK_THROWS_AS(load_means_csv((dir / "c_bad.csv").string(), DatasetFormat::caption_contest), ParseError);
}

TEST_CASE("pkis2 log transform and dropped rows") {
    const auto dir = scratch("pkis2");
    write(dir / "k.csv", "id,percent_inhibition\nk1,0.9\nk2,1\nk3,0\n");
    const auto k = load_means_csv((dir / "k.csv").string(), DatasetFormat::pkis2);
    REQUIRE(k.instance.size() == 2);
    CHECK(k.instance.mean(0) == Approx(-2.302585).margin(1e-6));
    CHECK(k.instance.mean(1) == 0.0);
    CHECK(k.ids == std::vector<std::string>{"k1", "k3"});
    REQUIRE(k.warnings.size() == 1);
    CHECK(k.warnings[0].find("line 3") != std::string::npos);
    write(dir / "k_bad.csv", "id,percent_inhibition\nk1,1.2\n");
    CHECK_THROWS_AS(load_means_csv((dir / "k_bad.csv").string(), DatasetFormat::pkis2), ParseError);
}

TEST_CASE("dataset parse errors carry line numbers") {
    const auto dir = scratch("errors");
    write(dir / "a.csv", "id,mean\na,1\nb,oops\n");
    try {
        load_means_csv((dir / "a.csv").string(), DatasetFormat::generic_means);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    write(dir / "b.csv", "id,mean\na,1,2\n");
    try {
        load_means_csv((dir / "b.csv").string(), DatasetFormat::generic_means);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    write(dir / "c.csv", "name,mean\na,1\n");
    CHECK_THROWS_AS(load_means_csv((dir / "c.csv").string(), DatasetFormat::generic_means), ParseError);
    write(dir / "d.csv", "");
    CHECK_THROWS_AS(load_means_csv((dir / "d.csv").string(), DatasetFormat::generic_means), ParseError);
    write(dir / "e.csv", "id,mean\na,nan\n");
    CHECK_THROWS_AS(load_means_csv((dir / "e.csv").string(), DatasetFormat::generic_means), ParseError);
    CHECK_THROWS_AS(load_means_csv((dir / "missing.csv").string(), DatasetFormat::generic_means), ParseError);
    CHECK_THROWS_AS(parse_format("xml"), ConfigError);
}

TEST_CASE("means round trip exactly") {
    const auto dir = scratch("roundtrip");
    const BanditInstance inst({0.1, 1.0 / 3.0, -2.718281828459045, 1e-300});
    save_means_csv((dir / "m.csv").string(), inst, {"x", "y"});
    const auto back = load_means_csv((dir / "m.csv").string(), DatasetFormat::generic_means);
    REQUIRE(back.instance.size() == inst.size());
    for (std::size_t i = 0; i < inst.size(); ++i) CHECK(back.instance.mean(i) == inst.mean(i));
    CHECK(back.ids == std::vector<std::string>{"x", "y", "2", "3"});
}

TEST_CASE("ratings replay") {
    const auto dir = scratch("ratings");
    write(dir / "r.csv", "id,rating\na,1\nb,3\na,2\n");
    const auto r = load_ratings_csv((dir / "r.csv").string(), {"a", "b"});
    CHECK(r == std::vector<std::vector<double>>{{1.0, 2.0}, {3.0}});
    CHECK_THROWS_AS(load_ratings_csv((dir / "r.csv").string(), {"a", "z"}), ParseError);
}

TEST_CASE("yaml and json configs parse to the same experiment") {
    const auto dir = scratch("config");
    write(dir / "c.yaml", R"(name: demo
instance:
  preset: {kind: fig3a, n: 10, alpha: 0.1}
threshold: {mode: additive, epsilon: 0.5}
algorithms: [st2, {name: fareast, finder: lucb}, {name: lucb1, k: 3, label: top3}]
delta: 0.05
trials: 3
seed: 9
budget: 50000
)");
    write(dir / "c.json", R"({"name": "demo",
 "instance": {"preset": {"kind": "fig3a", "n": 10, "alpha": 0.1}},
 "threshold": {"mode": "additive", "epsilon": 0.5},
 "algorithms": ["st2", {"name": "fareast", "finder": "lucb"}, {"name": "lucb1", "k": 3, "label": "top3"}],
 "delta": 0.05, "trials": 3, "seed": 9, "budget": 50000})");
    const auto y = load_config(dir / "c.yaml");
    const auto j = load_config(dir / "c.json");
    CHECK(config_to_json(y) == config_to_json(j));
    CHECK(y.instance.source == InstanceSource::preset);
    CHECK(y.instance.preset.n == 10);
    CHECK(y.algorithms.size() == 3);
    CHECK(y.algorithms[1].fareast.finder == FinderKind::lucb);
    CHECK(y.algorithms[2].label == "top3");
    CHECK(*y.algorithms[2].k == 3);
    CHECK(y.delta == 0.05);
    CHECK(*y.budget == 50000);
    CHECK(y.trace_interval == 1000);
    CHECK(y.c_phi == 4.0);
    CHECK(y.base_dir == dir);
}

TEST_CASE("config errors") {
    auto bad = [](const std::string& text) { return parse_config(json::parse(text)); };
    const std::string inst = R"("instance": {"means": [1, 0]}, )";
    const std::string thr = R"("threshold": {"mode": "additive", "epsilon": 0.5}, )";
    CHECK_NOTHROW(bad("{" + inst + thr + R"("algorithms": ["st2"]})"));
    CHECK_THROWS_AS(bad("[]"), ConfigError);
    CHECK_THROWS_AS(bad("{" + thr + R"("algorithms": ["st2"]})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"instance": {"means": [1], "preset": "fig3a"}, )" + thr + R"("algorithms": ["st2"]})"),
                    ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + R"("algorithms": ["st2"]})"), ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + R"("threshold": {"mode": "additive", "epsilon": -1}, "algorithms": ["st2"]})"),
                    ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + R"("threshold": {"mode": "cubic"}, "algorithms": ["st2"]})"), ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + thr + R"("algorithms": []})"), ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + thr + R"("algorithms": ["thompson"]})"), ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + thr + R"("algorithms": ["st2", "st2"]})"), ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + thr + R"("algorithms": ["ucb"]})"), ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + thr + R"("algorithms": ["st2"], "delta": 1.5})"), ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + thr + R"("algorithms": ["st2"], "trials": 0})"), ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + thr + R"("algorithms": ["st2"], "trials": -2})"), ConfigError);
    CHECK_THROWS_AS(bad("{" + inst + thr + R"("algorithms": ["st2"], "name": "a/b"})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"instance": {"preset": {"kind": "fig9", "n": 4}}, )" + thr + R"("algorithms": ["st2"]})"),
                    ConfigError);
    CHECK_THROWS_AS(bad(R"({"instance": {"dataset": "x.csv", "sampling": "replay"}, )" + thr +
                        R"("algorithms": ["st2"]})"),
                    ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
    const auto dir = scratch("config_errors");
    write(dir / "broken.yaml", "name: [unclosed\n");
    CHECK_THROWS_AS(load_config(dir / "broken.yaml"), ConfigError);
}

TEST_CASE("presets") {
    const auto a = fig3a(10);
    REQUIRE(a.size() == 10);
    const auto g = gap_summary(a, ThresholdSpec::additive(0.5));
    CHECK(g.good.size() == 5);
    CHECK(g.alpha == Approx(0.1));
    CHECK(g.beta == Approx(0.1));
    CHECK(a.mean(0) == 1.0);

    const auto b = fig3b(6);
    CHECK(good_set(b, ThresholdSpec::additive(0.9)) == IndexSet{0, 1, 2, 3, 4});
    CHECK(gap_summary(b, ThresholdSpec::additive(0.9)).beta == Approx(0.1));

    const auto p = planted(10);
    const auto spec = ThresholdSpec::additive(0.5, 0.3);
    const auto exact = good_set(p, spec.exact());
    const auto relaxed = good_set(p, spec.relaxed());
    CHECK(exact.size() == 5);
    CHECK(relaxed.size() == 6);
    CHECK(p.mean(5) == Approx(0.35));
    CHECK_THROWS_AS(fig3a(1), InvalidSpec);
    CHECK_THROWS_AS(planted(10, 0.5, 0.0), InvalidSpec);
}

TEST_CASE("runner derives oracles and writes every file") {
    const auto out = scratch("runner");
    auto c = small_config("all", out);
    const auto rec = run_experiment(c, {1, true, std::nullopt});
    CHECK(rec.truth == IndexSet{0, 1});
    REQUIRE(rec.oracles.size() == 2);
    CHECK(rec.oracles[0].parameter == "k");
    CHECK(rec.oracles[0].value == 2.0);
    CHECK_FALSE(rec.oracles[0].from_config);
    CHECK(rec.oracles[1].parameter == "tau");
    CHECK(rec.oracles[1].value == Approx(0.5));
    CHECK(rec.rows.size() == 4 * 7);
    for (const auto& r : rec.rows) {
        CHECK(r.ok);
        REQUIRE_FALSE(r.checkpoints.empty());
        CHECK(r.checkpoints.back().final);
        CHECK(r.checkpoints.back().pulls == r.total_pulls);
    }
    for (const char* f : {"trials.csv", "trial_0.csv", "trial_3.csv", "aggregate.json", "bounds.json", "config_echo.json"})
        CHECK(fs::exists(rec.directory / f));
    CHECK_FALSE(fs::exists(rec.directory / "error.json"));
    const auto echo = json::parse(slurp(rec.directory / "config_echo.json"));
    CHECK(echo["resolved"]["oracles"][0]["source"] == "derived");
    CHECK(echo["resolved"]["good_set"] == json::array({0, 1}));
    const auto agg = json::parse(slurp(rec.directory / "aggregate.json"));
    CHECK(agg["St2"]["runs"] == 4);
    const auto bounds = json::parse(slurp(rec.directory / "bounds.json"));
    CHECK(bounds["lower_bound_thm1"]["defined"] == true);
}

TEST_CASE("aggregate is recomputable from the rows") {
    const auto out = scratch("reaggregate");
    auto c = small_config("re", out);
    const auto rec = run_experiment(c, {1, false, std::nullopt});
    std::vector<std::string> labels;
    for (const auto& a : c.algorithms) labels.push_back(a.label);
    const auto again = aggregate_rows(rec.rows, labels, c.trace_interval);
    for (const auto& label : labels) {
        const auto& x = rec.aggregate[label];
        const auto& y = again[label];
        CHECK(x["runs"] == y["runs"]);
        CHECK(x["total_pulls"]["mean"].get<double>() == Approx(y["total_pulls"]["mean"].get<double>()).epsilon(1e-12));
        const auto& fx = x["curves"]["f1"]["mean"];
        const auto& fy = y["curves"]["f1"]["mean"];
        REQUIRE(fx.size() == fy.size());
        for (std::size_t i = 0; i < fx.size(); ++i)
            CHECK(fx[i].get<double>() == Approx(fy[i].get<double>()).margin(1e-12));

        // Independent recomputation of the mean pulls and success rate.
        double sum = 0, correct = 0, n = 0;
        for (const auto& r : rec.rows)
            if (r.algorithm == label) {
                sum += static_cast<double>(r.total_pulls);
                correct += r.correct;
                ++n;
            }
        CHECK(x["total_pulls"]["mean"].get<double>() == Approx(sum / n).epsilon(1e-12));
        CHECK(x["success_rate"].get<double>() == Approx(correct / n).epsilon(1e-12));
    }
}

TEST_CASE("runner output is byte identical across runs and thread counts") {
    const auto out1 = scratch("det1"), out2 = scratch("det2");
    auto c = small_config("det", out1);
    const auto a = run_experiment(c, {1, true, std::nullopt});
    const auto b = run_experiment(c, {3, true, out2.string()});
    for (const char* f : {"trials.csv", "trial_0.csv", "trial_2.csv", "aggregate.json", "bounds.json"})
        CHECK(slurp(a.directory / f) == slurp(b.directory / f));
}

TEST_CASE("single uniform trial with budget n") {
    const auto out = scratch("uniform");
    auto c = parse_config(json::parse(R"({"name": "u", "instance": {"means": [1, 0.2, 0.9]},
        "threshold": {"mode": "additive", "epsilon": 0.5}, "algorithms": ["uniform"],
        "trials": 1, "budget": 3, "trace_interval": 1})"));
    const auto rec = run_experiment(c, {1, false, out.string()});
    REQUIRE(rec.rows.size() == 1);
    CHECK(rec.rows[0].total_pulls == 3);
    CHECK(rec.rows[0].stop_reason == StopReason::budget);
    c.budget = 2;
    CHECK_THROWS_AS(run_experiment(c, {1, false, out.string()}), ConfigError);
}

TEST_CASE("failing trials are flagged, the rest still run") {
    const auto out = scratch("failing");
    // Fareast needs delta < 1/8; the other algorithms accept 0.2.
    auto c = parse_config(json::parse(R"({"name": "neg", "instance": {"means": [1, 0]},
        "threshold": {"mode": "additive", "epsilon": 0.5}, "algorithms": ["fareast", "uniform"],
        "delta": 0.2, "trials": 2, "budget": 1000, "output": ")" + out.string() + R"("})"));
    const auto rec = run_experiment(c, {1, true, std::nullopt});
    REQUIRE(rec.rows.size() == 4);
    CHECK_FALSE(rec.rows[0].ok);
    CHECK(rec.rows[0].error_kind == "invalid-spec");
    CHECK(rec.rows[1].ok);
    CHECK(rec.aggregate["Fareast"]["failed"] == 2);
    const auto err = json::parse(slurp(rec.directory / "error.json"));
    CHECK(err["failed_trials"].size() == 2);
    CHECK(slurp(rec.directory / "trials.csv").find("0,Fareast,error") != std::string::npos);
}

TEST_CASE("multiplicative thresholds need a positive best mean") {
    auto c = parse_config(json::parse(R"({"instance": {"means": [-5, -6]},
        "threshold": {"mode": "multiplicative", "epsilon": 0.5}, "algorithms": ["st2"]})"));
    CHECK_THROWS_AS(run_experiment(c, {1, false, std::nullopt}), ConfigError);
}

TEST_CASE("dataset configs resolve relative paths and replay ratings") {
    const auto dir = scratch("dataset_cfg");
    write(dir / "means.csv", "id,mean_rating\na,2.8\nb,1.2\nc,2.6\n");
    std::string ratings = "id,rating\n";
    for (int k = 0; k < 30; ++k) ratings += "a,3\nb,1\nc," + std::string(k % 2 ? "3" : "2") + "\n";
    write(dir / "ratings.csv", ratings);
    write(dir / "cfg.yaml", "name: caption\ninstance:\n  dataset: means.csv\n  format: caption\n  sampling: replay\n"
                            "  ratings: ratings.csv\nthreshold: {mode: additive, epsilon: 0.5}\n"
                            "algorithms: [uniform]\nbudget: 60\ntrials: 2\noutput: " +
                                (dir / "out").string() + "\n");
    const auto c = load_config(dir / "cfg.yaml");
    const auto rec = run_experiment(c, {1, true, std::nullopt});
    CHECK(rec.truth == IndexSet{0, 2});
    CHECK(rec.rows[0].returned == IndexSet{0, 2});
    const auto echo = json::parse(slurp(rec.directory / "config_echo.json"));
    CHECK(echo["config"]["instance"]["sampling"] == "replay");
}

TEST_CASE("format_double") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(kInfinity) == "inf");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
