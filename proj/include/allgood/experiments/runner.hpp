#pragma once

// Multi-trial experiment runner and result files.
//
// Layout under <output>/<name>/:
//   trials.csv        one row per (trial, algorithm)
//   trial_<i>.csv     metric checkpoints of trial i; the last row of every
//                     algorithm (final=1) is its returned set at stop time
//   aggregate.json    per-algorithm statistics and metric curves
//   bounds.json       closed-form bounds for the instance
//   config_echo.json  normalized config plus the resolved instance
//   error.json        only when some trial failed

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "allgood/algorithms/east.hpp"
#include "allgood/algorithms/fareast.hpp"
#include "allgood/algorithms/st2.hpp"
#include "allgood/baselines.hpp"
#include "allgood/core.hpp"
#include "allgood/experiments/config.hpp"
#include "allgood/experiments/datasets.hpp"
#include "allgood/experiments/presets.hpp"
#include "allgood/metrics.hpp"
#include "allgood/sampling.hpp"

namespace allgood::experiments {

struct Checkpoint {
    std::uint64_t pulls = 0;
    Prf1 metrics;
    bool final = false;
};

struct TrialRow {
    std::uint64_t trial = 0;
    std::string algorithm;
    bool ok = true;
    std::string error_kind;
    std::string error;
    std::uint64_t total_pulls = 0;
    StopReason stop_reason = StopReason::all_known;
    IndexSet returned;
    bool correct = false;
    Prf1 final_metrics;
    std::vector<Checkpoint> checkpoints;
    std::vector<std::string> warnings;
};

/// Oracle parameter actually used by a baseline.
struct OracleChoice {
    std::string label;
    std::string parameter;  // "k" or "tau"
    double value = 0.0;
    bool from_config = false;
};

struct ResolvedInstance {
    BanditInstance instance;
    SamplerBank bank;
    std::vector<std::string> ids;
    std::vector<std::string> warnings;
};

struct ResultRecord {
    ExperimentConfig config;
    BanditInstance instance;
    IndexSet truth;          // exact good set
    IndexSet truth_relaxed;  // good set widened by the slack
    std::vector<OracleChoice> oracles;
    std::vector<TrialRow> rows;  // trial-major, algorithms in config order
    std::vector<std::string> warnings;
    BoundReport bounds;
    nlohmann::json aggregate;
    std::filesystem::path directory;
};

struct RunnerOptions {
    unsigned threads = 0;  // 0 = available parallelism
    bool write_files = true;
    std::optional<std::string> output;  // overrides config.output
};

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string join_set(const IndexSet& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(s[i]);
    }
    return out;
}

inline ResolvedInstance resolve_instance(const ExperimentConfig& c) {
    ResolvedInstance r;
    const auto& ic = c.instance;
    switch (ic.source) {
        case InstanceSource::means: r.instance = BanditInstance(ic.means, "inline"); break;
        case InstanceSource::preset: {
            const auto& p = ic.preset;
            if (p.kind == "fig3a")
                r.instance = fig3a(p.n, p.epsilon, p.alpha, p.beta, p.top);
            else if (p.kind == "fig3b")
                r.instance = fig3b(p.n, p.epsilon, p.beta, p.top);
            else
                r.instance = planted(p.n, p.epsilon, p.gamma, p.alpha, p.beta, p.top);
            break;
        }
        case InstanceSource::dataset: {
            auto path = std::filesystem::path(ic.dataset);
            if (path.is_relative()) path = c.base_dir / path;
            auto loaded = load_means_csv(path.string(), ic.format);
            r.instance = loaded.instance;
            r.ids = loaded.ids;
            r.warnings = loaded.warnings;
            if (ic.sampling == SamplingModel::replay) {
                auto rpath = std::filesystem::path(ic.ratings);
                if (rpath.is_relative()) rpath = c.base_dir / rpath;
                std::vector<ArmSampler> arms;
                for (auto& values : load_ratings_csv(rpath.string(), r.ids))
                    arms.emplace_back(ReplayArm{std::move(values), ReplayFallback::resample});
                r.bank = SamplerBank(std::move(arms), c.seed);
                return r;
            }
            break;
        }
    }
    r.bank = SamplerBank::gaussian(r.instance, c.seed, ic.stddev);
    return r;
}

namespace detail {

inline TrialRow run_one(const SamplerBank& bank, const ExperimentConfig& c, const AlgorithmConfig& a,
                        std::uint32_t slot, const ThresholdSpec& spec, const IndexSet& truth,
                        const IndexSet& relaxed, const OracleChoice* oracle, std::uint64_t trial) {
    TrialRow row;
    row.trial = trial;
    row.algorithm = a.label;
    RunOptions opt;
    opt.delta = c.delta;
    opt.budget = c.budget;
    opt.trace_interval = c.trace_interval;
    opt.keep_trace = false;
    opt.slot = slot;
    opt.confidence.c_phi = c.c_phi;
    opt.hook = [&](std::uint64_t pulls, const IndexSet& set) { row.checkpoints.push_back({pulls, prf1(set, truth)}); };
    try {
        RunResult r;
        switch (a.kind) {
            case AlgorithmKind::st2: r = st2_run(bank, spec, opt); break;
            case AlgorithmKind::east: r = east_run(bank, spec, opt); break;
            case AlgorithmKind::fareast: r = fareast_run(bank, spec, opt, a.fareast); break;
            case AlgorithmKind::ucb: r = baseline_run(bank, BaselineSpec::ucb(), spec, *c.budget, opt); break;
            case AlgorithmKind::uniform: r = baseline_run(bank, BaselineSpec::uniform(), spec, *c.budget, opt); break;
            case AlgorithmKind::lucb1:
                r = baseline_run(bank, BaselineSpec::lucb1(static_cast<std::size_t>(oracle->value)), spec, *c.budget, opt);
                break;
            case AlgorithmKind::apt: r = baseline_run(bank, BaselineSpec::apt(oracle->value), spec, *c.budget, opt); break;
        }
        row.total_pulls = r.total_pulls;
        row.stop_reason = r.stop_reason;
        row.returned = r.returned_set;
        row.correct = contains_correctly(r.returned_set, truth, relaxed);
        row.final_metrics = prf1(r.returned_set, truth);
        if (!row.checkpoints.empty() && row.checkpoints.back().pulls == r.total_pulls) row.checkpoints.pop_back();
        row.checkpoints.push_back({r.total_pulls, row.final_metrics, true});
        row.warnings = r.warnings;
    } catch (const Error& e) {
        row.ok = false;
        row.error_kind = e.kind();
        row.error = e.what();
        row.checkpoints.clear();
    } catch (const std::exception& e) {
        row.ok = false;
        row.error_kind = "error";
        row.error = e.what();
        row.checkpoints.clear();
    }
    return row;
}

struct Moments {
    double mean = 0.0, median = 0.0, stderr_ = 0.0;
};

inline Moments moments(std::vector<double> v) {
    Moments m;
    if (v.empty()) return m;
    double s = 0.0;
    for (double x : v) s += x;
    m.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
    }
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    m.median = k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
    return m;
}

/// Latest checkpoint at or below `pulls`; nullptr when none.
inline const Checkpoint* at_or_before(const std::vector<Checkpoint>& cps, std::uint64_t pulls) {
    const Checkpoint* best = nullptr;
    for (const auto& cp : cps) {
        if (cp.pulls > pulls) break;
        best = &cp;
    }
    return best;
}

}  // namespace detail

/// Statistics per algorithm label, recomputable from the per-trial rows.
///
/// Curves are sampled every `interval` pulls up to the longest successful
/// run; a trial contributes the latest checkpoint at or below each grid
/// point, so a stopped run carries its returned set forward. Bands are
/// mean +- 1.96 standard errors.
inline nlohmann::json aggregate_rows(const std::vector<TrialRow>& rows, const std::vector<std::string>& labels,
                                     std::uint64_t interval) {
    using nlohmann::json;
    json out = json::object();
    for (const auto& label : labels) {
        std::vector<const TrialRow*> ok;
        std::size_t failed = 0, correct = 0;
        std::map<std::string, std::size_t> reasons;
        for (const auto& r : rows) {
            if (r.algorithm != label) continue;
            if (!r.ok) {
                ++failed;
                continue;
            }
            ok.push_back(&r);
            if (r.correct) ++correct;
            ++reasons[to_string(r.stop_reason)];
        }
        json a;
        a["runs"] = ok.size() + failed;
        a["failed"] = failed;
        a["succeeded"] = ok.size();
        a["success_rate"] = ok.empty() ? json(nullptr) : json(static_cast<double>(correct) / static_cast<double>(ok.size()));
        a["stop_reasons"] = reasons;
        std::vector<double> pulls, f1;
        std::uint64_t longest = 0;
        for (const auto* r : ok) {
            pulls.push_back(static_cast<double>(r->total_pulls));
            f1.push_back(r->final_metrics.f1);
            longest = std::max(longest, r->total_pulls);
        }
        const auto pm = detail::moments(pulls);
        a["total_pulls"] = {{"mean", pm.mean}, {"median", pm.median}, {"stderr", pm.stderr_}};
        const auto fm = detail::moments(f1);
        a["final_f1"] = {{"mean", fm.mean}, {"median", fm.median}, {"stderr", fm.stderr_}};

        json curves;
        std::vector<std::uint64_t> grid;
        for (std::uint64_t g = interval; g <= longest; g += interval) grid.push_back(g);
        curves["pulls"] = grid;
        for (const char* metric : {"precision", "recall", "f1"}) {
            std::vector<double> mean, lo, hi;
            for (std::uint64_t g : grid) {
                std::vector<double> vals;
                for (const auto* r : ok) {
                    const auto* cp = detail::at_or_before(r->checkpoints, g);
                    if (!cp) continue;
                    const Prf1& m = cp->metrics;
                    vals.push_back(metric[0] == 'p' ? m.precision : metric[0] == 'r' ? m.recall : m.f1);
                }
                const auto mm = detail::moments(vals);
                mean.push_back(mm.mean);
                lo.push_back(mm.mean - 1.96 * mm.stderr_);
                hi.push_back(mm.mean + 1.96 * mm.stderr_);
            }
            curves[metric] = {{"mean", mean}, {"lo", lo}, {"hi", hi}};
        }
        a["curves"] = curves;
        out[label] = a;
    }
    return out;
}

inline nlohmann::json to_json(const BoundValue& b) {
    using nlohmann::json;
    json j;
    j["defined"] = b.defined;
    j["value"] = b.defined && std::isfinite(b.value) ? json(b.value) : json(nullptr);
    if (b.defined && std::isinf(b.value)) j["value_text"] = "inf";
    j["order_only"] = b.order_only;
    j["degenerate"] = b.degenerate;
    j["reason"] = b.reason;
    if (b.defined) {
        j["sum"] = std::isfinite(b.sum) ? json(b.sum) : json(nullptr);
        j["log_factor"] = b.log_factor;
        j["extra"] = std::isfinite(b.extra) ? json(b.extra) : json(nullptr);
    }
    return j;
}

inline nlohmann::json to_json(const BoundReport& r) {
    return {{"lower_bound_thm1", to_json(r.lower_bound_thm1)},
            {"lower_bound_moderate", to_json(r.lower_bound_moderate)},
            {"st2_upper_order", to_json(r.st2_upper_order)},
            {"fareast_upper_order", to_json(r.fareast_upper_order)},
            {"east_upper", to_json(r.east_upper)}};
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

inline std::string metrics_cells(const Prf1& m) {
    return format_double(m.precision) + "," + format_double(m.recall) + "," + format_double(m.f1);
}

inline void write_outputs(const ResultRecord& rec) {
    namespace fs = std::filesystem;
    fs::create_directories(rec.directory);
    {
        std::string s = "trial,algorithm,status,total_pulls,stop_reason,returned_set,correct,precision,recall,f1\n";
        for (const auto& r : rec.rows) {
            s += std::to_string(r.trial) + "," + r.algorithm + "," + (r.ok ? "ok" : "error") + ",";
            if (r.ok)
                s += std::to_string(r.total_pulls) + "," + to_string(r.stop_reason) + "," + join_set(r.returned) + "," +
                     (r.correct ? "1" : "0") + "," + metrics_cells(r.final_metrics);
            else
                s += ",,,,,,";
            s += "\n";
        }
        write_text(rec.directory / "trials.csv", s);
    }
    for (std::uint64_t t = 0; t < rec.config.trials; ++t) {
        std::string s = "algorithm,pulls,precision,recall,f1,final\n";
        for (const auto& r : rec.rows) {
            if (r.trial != t) continue;
            for (const auto& cp : r.checkpoints)
                s += r.algorithm + "," + std::to_string(cp.pulls) + "," + metrics_cells(cp.metrics) + "," +
                     (cp.final ? "1" : "0") + "\n";
        }
        write_text(rec.directory / ("trial_" + std::to_string(t) + ".csv"), s);
    }
    write_text(rec.directory / "aggregate.json", rec.aggregate.dump(2) + "\n");
    write_text(rec.directory / "bounds.json", to_json(rec.bounds).dump(2) + "\n");

    nlohmann::json echo;
    echo["config"] = config_to_json(rec.config);
    echo["resolved"] = {{"means", std::vector<double>(rec.instance.means().begin(), rec.instance.means().end())},
                        {"good_set", rec.truth},
                        {"good_set_relaxed", rec.truth_relaxed},
                        {"warnings", rec.warnings}};
    nlohmann::json oracles = nlohmann::json::array();
    for (const auto& o : rec.oracles)
        oracles.push_back({{"algorithm", o.label}, {"parameter", o.parameter}, {"value", o.value},
                           {"source", o.from_config ? "config" : "derived"}});
    echo["resolved"]["oracles"] = oracles;
    write_text(rec.directory / "config_echo.json", echo.dump(2) + "\n");

    nlohmann::json errors = nlohmann::json::array();
    for (const auto& r : rec.rows)
        if (!r.ok) errors.push_back({{"trial", r.trial}, {"algorithm", r.algorithm}, {"kind", r.error_kind}, {"message", r.error}});
    const auto err_path = rec.directory / "error.json";
    if (!errors.empty())
        write_text(err_path, nlohmann::json{{"failed_trials", errors}}.dump(2) + "\n");
    else if (fs::exists(err_path))
        fs::remove(err_path);
}

}  // namespace detail

/// Runs every configured algorithm on every trial. Trials execute in
/// parallel; rows are merged by trial index so output never depends on
/// scheduling. Algorithm errors are recorded per trial.
inline ResultRecord run_experiment(const ExperimentConfig& config, const RunnerOptions& ro = {}) {
    ResultRecord rec;
    rec.config = config;
    auto resolved = resolve_instance(config);
    rec.instance = resolved.instance;
    rec.warnings = resolved.warnings;
    const ThresholdSpec spec = config.threshold.spec();
    try {
        rec.truth = good_set(rec.instance, spec.exact());
        rec.truth_relaxed = good_set(rec.instance, spec.relaxed());
    } catch (const InvalidSpec& e) {
        throw ConfigError(std::string("threshold does not fit the instance: ") + e.what());
    }

    std::vector<const OracleChoice*> oracle_of(config.algorithms.size(), nullptr);
    rec.oracles.reserve(config.algorithms.size());
    for (std::size_t i = 0; i < config.algorithms.size(); ++i) {
        const auto& a = config.algorithms[i];
        if (a.kind == AlgorithmKind::lucb1) {
            OracleChoice o{a.label, "k", static_cast<double>(a.k.value_or(rec.truth.size())), a.k.has_value()};
            const std::size_t n = rec.instance.size();
            if (n > 1 && (o.value < 1 || o.value >= static_cast<double>(n)))
                throw ConfigError(a.label + ": k = " + std::to_string(static_cast<std::size_t>(o.value)) +
                                  " is outside [1, n-1]; every arm is good, so set k explicitly");
            rec.oracles.push_back(o);
        } else if (a.kind == AlgorithmKind::apt) {
            rec.oracles.push_back({a.label, "tau", a.tau.value_or(spec.threshold(rec.instance.top())), a.tau.has_value()});
        }
    }
    for (std::size_t i = 0, j = 0; i < config.algorithms.size(); ++i) {
        const auto k = config.algorithms[i].kind;
        if (k == AlgorithmKind::lucb1 || k == AlgorithmKind::apt) oracle_of[i] = &rec.oracles[j++];
    }
    if (config.budget)
        for (const auto& a : config.algorithms)
            if (is_baseline(a.kind) && *config.budget < rec.instance.size())
                throw ConfigError("budget must be at least the number of arms for baselines");

    const std::size_t algs = config.algorithms.size();
    std::vector<std::vector<TrialRow>> per_trial(config.trials);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::uint64_t t = next.fetch_add(1);
            if (t >= config.trials) return;
            const SamplerBank bank = resolved.bank.for_trial(t);
            auto& out = per_trial[t];
            for (std::size_t i = 0; i < algs; ++i)
                out.push_back(detail::run_one(bank, config, config.algorithms[i], static_cast<std::uint32_t>(i), spec,
                                              rec.truth, rec.truth_relaxed, oracle_of[i], t));
        }
    };
    unsigned threads = ro.threads ? ro.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, config.trials));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& v : per_trial)
        for (auto& r : v) rec.rows.push_back(std::move(r));

    std::vector<std::string> labels;
    for (const auto& a : config.algorithms) labels.push_back(a.label);
    rec.aggregate = aggregate_rows(rec.rows, labels, config.trace_interval);
    rec.bounds = bound_report(rec.instance, spec, config.delta);
    rec.directory = std::filesystem::path(ro.output.value_or(config.output)) / config.name;
    if (ro.write_files) detail::write_outputs(rec);
    return rec;
}

}  // namespace allgood::experiments
