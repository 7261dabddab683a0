#pragma once

// CSV ingestion of arm means. Formats:
//   generic  id,mean
//   caption  id,mean_rating        (ratings on [1, 3], kept as-is)
//   pkis2    id,percent_inhibition (mean = ln(1 - p); rows with p == 1 dropped)
// A header row is required. Ratings files for replay are id,rating.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "allgood/core.hpp"
#include "allgood/error.hpp"

namespace allgood::experiments {

enum class DatasetFormat { generic_means, caption_contest, pkis2 };

inline DatasetFormat parse_format(const std::string& s) {
    if (s == "generic" || s == "GenericMeans") return DatasetFormat::generic_means;
    if (s == "caption" || s == "CaptionContest") return DatasetFormat::caption_contest;
    if (s == "pkis2" || s == "Pkis2") return DatasetFormat::pkis2;
    throw ConfigError("unknown dataset format '" + s + "' (expected generic, caption or pkis2)");
}

struct LoadedDataset {
    BanditInstance instance;
    std::vector<std::string> ids;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_number(const std::string& cell, const std::string& source, std::size_t line) {
    if (cell.empty()) throw ParseError(source, line, "empty numeric field");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
        throw ParseError(source, line, "not a finite number: '" + cell + "'");
    return v;
}

/// Rows of (id, value) from a two-column CSV with a header naming `value_column`.
inline std::vector<std::pair<std::string, std::pair<double, std::size_t>>> read_pairs(
    const std::string& path, const std::string& value_column) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw ParseError(path, 0, "empty file");
    std::size_t id_col = header.size(), value_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "id") id_col = c;
        if (header[c] == value_column) value_col = c;
    }
    if (id_col == header.size() || value_col == header.size())
        throw ParseError(path, lineno, "header must contain 'id' and '" + value_column + "'");
    std::vector<std::pair<std::string, std::pair<double, std::size_t>>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError(path, lineno,
                             "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
        rows.push_back({cells[id_col], {parse_number(cells[value_col], path, lineno), lineno}});
    }
    if (rows.empty()) throw ParseError(path, lineno, "no data rows");
    return rows;
}

}  // namespace detail

inline LoadedDataset load_means_csv(const std::string& path, DatasetFormat format) {
    LoadedDataset out;
    std::vector<double> means;
    const char* column = format == DatasetFormat::generic_means     ? "mean"
                         : format == DatasetFormat::caption_contest ? "mean_rating"
                                                                    : "percent_inhibition";
    for (const auto& [id, entry] : detail::read_pairs(path, column)) {
        const auto [v, line] = entry;
        if (format == DatasetFormat::pkis2) {
            if (v < 0.0 || v > 1.0) throw ParseError(path, line, "percent_inhibition must lie in [0, 1]");
            if (v == 1.0) {
                out.warnings.push_back("line " + std::to_string(line) + ": dropped '" + id +
                                       "' with percent_inhibition 1 (log of zero control)");
                continue;
            }
            means.push_back(std::log(1.0 - v));
        } else {
            if (format == DatasetFormat::caption_contest && (v < 1.0 || v > 3.0))
                throw ParseError(path, line, "mean_rating must lie in [1, 3]");
            means.push_back(v);
        }
        out.ids.push_back(id);
    }
    if (means.empty()) throw ParseError(path, 0, "every row was dropped");
    out.instance = BanditInstance(std::move(means), path);
    return out;
}

/// Writes id,mean with 17 significant digits so loading it back is exact.
inline void save_means_csv(const std::string& path, const BanditInstance& instance,
                           const std::vector<std::string>& ids = {}) {
    std::ofstream out(path);
    if (!out) throw ParseError(path, 0, "cannot open file for writing");
    out << "id,mean\n";
    char buf[64];
    for (std::size_t i = 0; i < instance.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", instance.mean(i));
        out << (i < ids.size() ? ids[i] : std::to_string(i)) << ',' << buf << '\n';
    }
}

/// Recorded rewards per arm, grouped by id and ordered as `ids`.
inline std::vector<std::vector<double>> load_ratings_csv(const std::string& path, const std::vector<std::string>& ids) {
    std::map<std::string, std::vector<double>> by_id;
    for (const auto& [id, entry] : detail::read_pairs(path, "rating")) by_id[id].push_back(entry.first);
    std::vector<std::vector<double>> out;
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw ParseError(path, 0, "no ratings for arm '" + id + "'");
        out.push_back(it->second);
    }
    return out;
}

}  // namespace allgood::experiments
