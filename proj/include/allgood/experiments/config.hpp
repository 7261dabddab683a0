#pragma once

// Experiment configuration. Files are YAML (.yaml/.yml) or JSON; YAML is
// converted to the same JSON document before validation.
//
//   name: demo
//   instance:          # exactly one of means / preset / dataset
//     means: [1.0, 0.0]
//     # preset: {kind: fig3a, n: 20, epsilon: 0.5, alpha: 0.1}
//     # dataset: data.csv
//     # format: generic | caption | pkis2
//     # sampling: gaussian | replay     (replay needs ratings: file)
//     stddev: 1.0
//   threshold: {mode: additive, epsilon: 0.5, gamma: 0.0}
//     # {mode: lipschitz, slope: 0.8, intercept: 0.0}
//   algorithms: [st2, east, {name: fareast, finder: lucb}, ucb, uniform,
//                {name: lucb1, k: 3}, {name: apt, tau: 0.5}]
//   delta: 0.1
//   trials: 10
//   seed: 1
//   budget: 100000     # required by baselines; optional cap otherwise
//   trace_interval: 1000
//   output: results
//   c_phi: 4

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "allgood/algorithms/fareast.hpp"
#include "allgood/core.hpp"
#include "allgood/error.hpp"
#include "allgood/experiments/datasets.hpp"

namespace allgood::experiments {

using nlohmann::json;

enum class AlgorithmKind { st2, east, fareast, ucb, lucb1, apt, uniform };

inline const char* to_string(AlgorithmKind k) {
    switch (k) {
        case AlgorithmKind::st2: return "St2";
        case AlgorithmKind::east: return "East";
        case AlgorithmKind::fareast: return "Fareast";
        case AlgorithmKind::ucb: return "Ucb";
        case AlgorithmKind::lucb1: return "Lucb1";
        case AlgorithmKind::apt: return "Apt";
        case AlgorithmKind::uniform: return "Uniform";
    }
    return "?";
}

inline AlgorithmKind parse_algorithm(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "st2" || s == "(st)2" || s == "(st)^2") return AlgorithmKind::st2;
    if (s == "east") return AlgorithmKind::east;
    if (s == "fareast") return AlgorithmKind::fareast;
    if (s == "ucb") return AlgorithmKind::ucb;
    if (s == "lucb1" || s == "lucb") return AlgorithmKind::lucb1;
    if (s == "apt") return AlgorithmKind::apt;
    if (s == "uniform") return AlgorithmKind::uniform;
    throw ConfigError("unknown algorithm '" + s + "'");
}

inline bool is_baseline(AlgorithmKind k) {
    return k == AlgorithmKind::ucb || k == AlgorithmKind::lucb1 || k == AlgorithmKind::apt ||
           k == AlgorithmKind::uniform;
}

struct AlgorithmConfig {
    AlgorithmKind kind = AlgorithmKind::st2;
    std::string label;                 // unique column label; defaults to the kind name
    std::optional<std::size_t> k;      // lucb1 override
    std::optional<double> tau;         // apt override
    FareastOptions fareast;
};

enum class InstanceSource { means, preset, dataset };
enum class SamplingModel { gaussian, replay };

struct PresetConfig {
    std::string kind;  // fig3a | fig3b | planted
    std::size_t n = 0;
    double epsilon = 0.5;
    double alpha = 0.1;
    double beta = 0.1;
    double top = 1.0;
    double gamma = 0.3;  // planted
};

struct InstanceConfig {
    InstanceSource source = InstanceSource::means;
    std::vector<double> means;
    PresetConfig preset;
    std::string dataset;
    DatasetFormat format = DatasetFormat::generic_means;
    SamplingModel sampling = SamplingModel::gaussian;
    std::string ratings;
    double stddev = 1.0;
};

struct ThresholdConfig {
    ThresholdMode mode = ThresholdMode::additive;
    double epsilon = 0.0;
    double slope = 1.0;
    double intercept = 0.0;
    double gamma = 0.0;

    ThresholdSpec spec() const {
        switch (mode) {
            case ThresholdMode::additive: return ThresholdSpec::additive(epsilon, gamma);
            case ThresholdMode::multiplicative: return ThresholdSpec::multiplicative(epsilon, gamma);
            case ThresholdMode::lipschitz:
                return ThresholdSpec::lipschitz(ThresholdFunction::affine(slope, intercept), gamma);
        }
        return {};
    }
};

struct ExperimentConfig {
    std::string name = "experiment";
    InstanceConfig instance;
    ThresholdConfig threshold;
    std::vector<AlgorithmConfig> algorithms;
    double delta = 0.1;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> budget;
    std::uint64_t trace_interval = 1000;
    std::string output = "results";
    double c_phi = 4.0;
    std::filesystem::path base_dir;  // relative dataset paths resolve against this
};

namespace detail {

inline json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Sequence: {
            json arr = json::array();
            for (const auto& item : node) arr.push_back(yaml_to_json(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            json obj = json::object();
            for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return obj;
        }
        case YAML::NodeType::Scalar: {
            const std::string s = node.Scalar();
            if (node.Tag() == "!") return s;  // quoted scalar
            if (s == "true" || s == "True") return true;
            if (s == "false" || s == "False") return false;
            if (s == "null" || s == "~") return nullptr;
            try {
                std::size_t used = 0;
                const long long v = std::stoll(s, &used);
                if (used == s.size()) return v;
            } catch (...) {
            }
            try {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used == s.size()) return v;
            } catch (...) {
            }
            return s;
        }
    }
    return nullptr;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

inline std::uint64_t get_u64(const json& j, const char* key, std::uint64_t fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    const json& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    throw ConfigError(std::string("field '") + key + "' must be a nonnegative integer");
}

inline ThresholdMode parse_mode(const std::string& s) {
    if (s == "additive") return ThresholdMode::additive;
    if (s == "multiplicative") return ThresholdMode::multiplicative;
    if (s == "lipschitz") return ThresholdMode::lipschitz;
    throw ConfigError("unknown threshold mode '" + s + "'");
}

}  // namespace detail

inline json read_config_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto ext = path.extension().string();
    try {
        if (ext == ".yaml" || ext == ".yml") return detail::yaml_to_json(YAML::Load(text));
        return json::parse(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir = {}) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("config must be a mapping");
    ExperimentConfig c;
    c.base_dir = base_dir;
    c.name = get_or<std::string>(j, "name", c.name);
    if (c.name.empty() || c.name.find('/') != std::string::npos || c.name == "." || c.name == "..")
        throw ConfigError("name must be a nonempty file name");

    if (!j.contains("instance") || !j["instance"].is_object()) throw ConfigError("missing 'instance' section");
    const json& ji = j["instance"];
    const int sources = ji.contains("means") + ji.contains("preset") + ji.contains("dataset");
    if (sources != 1) throw ConfigError("instance needs exactly one of 'means', 'preset', 'dataset'");
    c.instance.stddev = get_or<double>(ji, "stddev", 1.0);
    if (!(c.instance.stddev > 0.0)) throw ConfigError("instance stddev must be > 0");
    if (ji.contains("means")) {
        c.instance.source = InstanceSource::means;
        c.instance.means = get_or<std::vector<double>>(ji, "means", {});
        if (c.instance.means.empty()) throw ConfigError("instance means must be nonempty");
    } else if (ji.contains("preset")) {
        c.instance.source = InstanceSource::preset;
        const json& jp = ji["preset"];
        if (jp.is_string()) {
            c.instance.preset.kind = jp.get<std::string>();
        } else if (jp.is_object()) {
            auto& p = c.instance.preset;
            p.kind = get_or<std::string>(jp, "kind", "");
            p.n = get_u64(jp, "n", 0);
            p.epsilon = get_or<double>(jp, "epsilon", p.epsilon);
            p.alpha = get_or<double>(jp, "alpha", p.alpha);
            p.beta = get_or<double>(jp, "beta", p.beta);
            p.top = get_or<double>(jp, "top", p.top);
            p.gamma = get_or<double>(jp, "gamma", p.gamma);
        } else {
            throw ConfigError("instance preset must be a name or a mapping");
        }
        if (c.instance.preset.kind != "fig3a" && c.instance.preset.kind != "fig3b" && c.instance.preset.kind != "planted")
            throw ConfigError("unknown preset '" + c.instance.preset.kind + "' (expected fig3a, fig3b or planted)");
        if (c.instance.preset.n < 2) throw ConfigError("preset n must be at least 2");
    } else {
        c.instance.source = InstanceSource::dataset;
        c.instance.dataset = get_or<std::string>(ji, "dataset", "");
        c.instance.format = parse_format(get_or<std::string>(ji, "format", "generic"));
        const auto sampling = get_or<std::string>(ji, "sampling", "gaussian");
        if (sampling == "gaussian")
            c.instance.sampling = SamplingModel::gaussian;
        else if (sampling == "replay")
            c.instance.sampling = SamplingModel::replay;
        else
            throw ConfigError("sampling must be gaussian or replay");
        c.instance.ratings = get_or<std::string>(ji, "ratings", "");
        if (c.instance.sampling == SamplingModel::replay && c.instance.ratings.empty())
            throw ConfigError("replay sampling needs a 'ratings' file");
    }

    if (!j.contains("threshold") || !j["threshold"].is_object()) throw ConfigError("missing 'threshold' section");
    const json& jt = j["threshold"];
    c.threshold.mode = parse_mode(get_or<std::string>(jt, "mode", "additive"));
    c.threshold.epsilon = get_or<double>(jt, "epsilon", 0.0);
    c.threshold.slope = get_or<double>(jt, "slope", 1.0);
    c.threshold.intercept = get_or<double>(jt, "intercept", 0.0);
    c.threshold.gamma = get_or<double>(jt, "gamma", 0.0);
    try {
        c.threshold.spec().validate();
    } catch (const InvalidSpec& e) {
        throw ConfigError(std::string("threshold: ") + e.what());
    }

    if (!j.contains("algorithms") || !j["algorithms"].is_array() || j["algorithms"].empty())
        throw ConfigError("'algorithms' must be a nonempty list");
    for (const json& ja : j["algorithms"]) {
        AlgorithmConfig a;
        if (ja.is_string()) {
            a.kind = parse_algorithm(ja.get<std::string>());
        } else if (ja.is_object()) {
            a.kind = parse_algorithm(get_or<std::string>(ja, "name", ""));
            a.label = get_or<std::string>(ja, "label", "");
            if (ja.contains("k")) a.k = get_u64(ja, "k", 0);
            if (ja.contains("tau")) a.tau = get_or<double>(ja, "tau", 0.0);
            const auto finder = get_or<std::string>(ja, "finder", "median_elimination");
            if (finder == "lucb")
                a.fareast.finder = FinderKind::lucb;
            else if (finder != "median_elimination")
                throw ConfigError("finder must be median_elimination or lucb");
            a.fareast.finder_kappa = get_or<double>(ja, "finder_kappa", a.fareast.finder_kappa);
        } else {
            throw ConfigError("algorithm entries must be names or mappings");
        }
        if (a.label.empty()) a.label = to_string(a.kind);
        for (const auto& other : c.algorithms)
            if (other.label == a.label) throw ConfigError("duplicate algorithm label '" + a.label + "'");
        c.algorithms.push_back(std::move(a));
    }

    c.delta = get_or<double>(j, "delta", c.delta);
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    c.trials = get_u64(j, "trials", c.trials);
    if (c.trials < 1) throw ConfigError("trials must be >= 1");
    c.seed = get_u64(j, "seed", c.seed);
    if (j.contains("budget") && !j["budget"].is_null()) c.budget = get_u64(j, "budget", 0);
    c.trace_interval = get_u64(j, "trace_interval", c.trace_interval);
    if (c.trace_interval < 1) throw ConfigError("trace_interval must be >= 1");
    c.output = get_or<std::string>(j, "output", c.output);
    c.c_phi = get_or<double>(j, "c_phi", c.c_phi);
    if (!(c.c_phi > 0.0)) throw ConfigError("c_phi must be > 0");

    for (const auto& a : c.algorithms)
        if (is_baseline(a.kind) && !c.budget) throw ConfigError(std::string(to_string(a.kind)) + " needs a budget");
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_config_document(path), path.parent_path());
}

/// Normalized echo of a parsed config, with every default filled in.
inline json config_to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    json ji;
    switch (c.instance.source) {
        case InstanceSource::means: ji["means"] = c.instance.means; break;
        case InstanceSource::preset:
            ji["preset"] = {{"kind", c.instance.preset.kind}, {"n", c.instance.preset.n},
                            {"epsilon", c.instance.preset.epsilon}, {"alpha", c.instance.preset.alpha},
                            {"beta", c.instance.preset.beta},       {"top", c.instance.preset.top},
                            {"gamma", c.instance.preset.gamma}};
            break;
        case InstanceSource::dataset:
            ji["dataset"] = c.instance.dataset;
            ji["format"] = c.instance.format == DatasetFormat::generic_means     ? "generic"
                           : c.instance.format == DatasetFormat::caption_contest ? "caption"
                                                                                 : "pkis2";
            ji["sampling"] = c.instance.sampling == SamplingModel::gaussian ? "gaussian" : "replay";
            if (!c.instance.ratings.empty()) ji["ratings"] = c.instance.ratings;
            break;
    }
    ji["stddev"] = c.instance.stddev;
    j["instance"] = ji;
    json jt{{"mode", allgood::to_string(c.threshold.mode)}, {"gamma", c.threshold.gamma}};
    if (c.threshold.mode == ThresholdMode::lipschitz) {
        jt["slope"] = c.threshold.slope;
        jt["intercept"] = c.threshold.intercept;
    } else {
        jt["epsilon"] = c.threshold.epsilon;
    }
    j["threshold"] = jt;
    json algs = json::array();
    for (const auto& a : c.algorithms) {
        json ja{{"name", to_string(a.kind)}, {"label", a.label}};
        if (a.k) ja["k"] = *a.k;
        if (a.tau) ja["tau"] = *a.tau;
        if (a.kind == AlgorithmKind::fareast) {
            ja["finder"] = a.fareast.finder == FinderKind::lucb ? "lucb" : "median_elimination";
            ja["finder_kappa"] = a.fareast.finder_kappa;
        }
        algs.push_back(ja);
    }
    j["algorithms"] = algs;
    j["delta"] = c.delta;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["budget"] = c.budget ? json(*c.budget) : json(nullptr);
    j["trace_interval"] = c.trace_interval;
    j["output"] = c.output;
    j["c_phi"] = c.c_phi;
    return j;
}

}  // namespace allgood::experiments
