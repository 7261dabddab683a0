#pragma once

// Command-line front end. Exit codes: 0 success, 1 configuration error,
// 2 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "allgood/core.hpp"
#include "allgood/error.hpp"
#include "allgood/experiments/config.hpp"
#include "allgood/experiments/runner.hpp"
#include "allgood/metrics.hpp"

namespace allgood {

namespace cli_detail {

inline std::vector<double> parse_means(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw ConfigError("means must be comma-separated numbers, got '" + cell + "'");
        }
    }
    if (out.empty()) throw ConfigError("means list is empty");
    return out;
}

/// additive:EPS[:GAMMA] | multiplicative:EPS[:GAMMA] | lipschitz:SLOPE:INTERCEPT[:GAMMA]
inline ThresholdSpec parse_spec(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ':')) parts.push_back(cell);
    auto num = [&](std::size_t i) {
        try {
            return std::stod(parts.at(i));
        } catch (const std::exception&) {
            throw ConfigError("bad threshold spec '" + text + "'");
        }
    };
    if (parts.empty()) throw ConfigError("empty threshold spec");
    ThresholdSpec s;
    if (parts[0] == "additive" && (parts.size() == 2 || parts.size() == 3))
        s = ThresholdSpec::additive(num(1), parts.size() == 3 ? num(2) : 0.0);
    else if (parts[0] == "multiplicative" && (parts.size() == 2 || parts.size() == 3))
        s = ThresholdSpec::multiplicative(num(1), parts.size() == 3 ? num(2) : 0.0);
    else if (parts[0] == "lipschitz" && (parts.size() == 3 || parts.size() == 4))
        s = ThresholdSpec::lipschitz(ThresholdFunction::affine(num(1), num(2)), parts.size() == 4 ? num(3) : 0.0);
    else
        throw ConfigError("threshold spec must be additive:EPS[:GAMMA], multiplicative:EPS[:GAMMA] or "
                          "lipschitz:SLOPE:INTERCEPT[:GAMMA]");
    try {
        s.validate();
    } catch (const InvalidSpec& e) {
        throw ConfigError(e.what());
    }
    return s;
}

inline void write_error_record(const std::filesystem::path& dir, const std::string& kind, const std::string& message) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return;
    std::ofstream out(dir / "error.json");
    out << nlohmann::json{{"kind", kind}, {"message", message}}.dump(2) << "\n";
}

/// Long-format curve table from an aggregate.json.
inline std::string trace_plot(const std::filesystem::path& dir) {
    std::ifstream in(dir / "aggregate.json");
    if (!in) throw ConfigError("no aggregate.json in " + dir.string());
    nlohmann::json agg;
    try {
        in >> agg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("aggregate.json: ") + e.what());
    }
    std::string out = "algorithm,pulls,metric,value,lo,hi\n";
    for (const auto& [label, a] : agg.items()) {
        const auto& curves = a.at("curves");
        const auto& grid = curves.at("pulls");
        for (const char* metric : {"f1", "precision", "recall"}) {
            const auto& c = curves.at(metric);
            for (std::size_t i = 0; i < grid.size(); ++i)
                out += label + "," + std::to_string(grid[i].get<std::uint64_t>()) + "," + metric + "," +
                       experiments::format_double(c.at("mean")[i].get<double>()) + "," +
                       experiments::format_double(c.at("lo")[i].get<double>()) + "," +
                       experiments::format_double(c.at("hi")[i].get<double>()) + "\n";
        }
    }
    return out;
}

}  // namespace cli_detail

/// Entry point shared by the executable and the tests.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"all-epsilon-good arm identification experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed, budget;

    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("config,--config", config_path, "experiment config (.json, .yaml)");
        sub->add_option("--out", out_dir, "results root, overrides the config's output");
        sub->add_option("--threads", threads, "worker threads (default: available parallelism)");
        sub->add_option("--seed", seed, "master seed, overrides the config");
        sub->add_option("--budget", budget, "pull budget, overrides the config");
    };
    auto* simulate = app.add_subcommand("simulate", "run an experiment on inline or synthetic means");
    add_run_flags(simulate);
    auto* dataset = app.add_subcommand("dataset", "load a means CSV and run an experiment on it");
    add_run_flags(dataset);

    std::string means_text, spec_text;
    double delta = 0.05;
    auto* bounds = app.add_subcommand("bounds", "print closed-form bounds as JSON");
    bounds->add_option("means", means_text, "comma-separated means, e.g. 1,0")->required();
    bounds->add_option("spec", spec_text, "additive:EPS[:GAMMA], multiplicative:EPS[:GAMMA], lipschitz:A:B[:GAMMA]")
        ->required();
    bounds->add_option("delta", delta, "failure probability")->required();

    std::string results_dir, plot_out;
    auto* plot = app.add_subcommand("trace-plot", "long-format curve CSV from a results directory");
    plot->add_option("results", results_dir, "results directory containing aggregate.json")->required();
    plot->add_option("--out", plot_out, "write to a file instead of standard output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    std::filesystem::path error_dir;
    try {
        if (*simulate || *dataset) {
            if (config_path.empty()) throw ConfigError("a config file is required");
            auto cfg = experiments::load_config(config_path);
            const bool wants_dataset = cfg.instance.source == experiments::InstanceSource::dataset;
            if (*simulate && wants_dataset) throw ConfigError("config loads a dataset; use the 'dataset' subcommand");
            if (*dataset && !wants_dataset) throw ConfigError("config has no 'instance.dataset'");
            if (seed) cfg.seed = *seed;
            if (budget) cfg.budget = *budget;
            experiments::RunnerOptions ro;
            ro.threads = threads;
            if (!out_dir.empty()) ro.output = out_dir;
            error_dir = std::filesystem::path(ro.output.value_or(cfg.output)) / cfg.name;
            const auto rec = experiments::run_experiment(cfg, ro);
            std::size_t failed = 0;
            for (const auto& r : rec.rows) failed += r.ok ? 0 : 1;
            out << "wrote " << rec.directory.string() << " (" << rec.rows.size() << " runs, " << failed << " failed)\n";
            for (const auto& w : rec.warnings) err << "warning: " << w << "\n";
            return failed ? 2 : 0;
        }
        if (*bounds) {
            const BanditInstance inst(cli_detail::parse_means(means_text));
            const ThresholdSpec spec = cli_detail::parse_spec(spec_text);
            if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
            nlohmann::json j = experiments::to_json(bound_report(inst, spec, delta));
            j["means"] = std::vector<double>(inst.means().begin(), inst.means().end());
            j["threshold"] = spec.describe();
            j["delta"] = delta;
            out << j.dump(2) << "\n";
            return 0;
        }
        if (*plot) {
            const std::string csv = cli_detail::trace_plot(results_dir);
            if (plot_out.empty()) {
                out << csv;
            } else {
                std::ofstream f(plot_out, std::ios::binary);
                if (!f) throw std::runtime_error("cannot write " + plot_out);
                f << csv;
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        if (!error_dir.empty()) cli_detail::write_error_record(error_dir, e.kind(), e.what());
        return 1;
    } catch (const InvalidSpec& e) {
        err << "config error: " << e.what() << "\n";
        if (!error_dir.empty()) cli_detail::write_error_record(error_dir, e.kind(), e.what());
        return 1;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << "\n";
        if (!error_dir.empty()) cli_detail::write_error_record(error_dir, e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        if (!error_dir.empty()) cli_detail::write_error_record(error_dir, "runtime-error", e.what());
        return 2;
    }
    return 0;
}

}  // namespace allgood
