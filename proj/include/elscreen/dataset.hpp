#pragma once

// Data ingestion, validation, and the canonical in-memory representation.
//
// CSV surface: UTF-8, comma-separated, first row is the header, decimal
// point '.', no quoting. Row order defines the observation index.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "elscreen/errors.hpp"

namespace elscreen {

// Column-major regression problem: x[j] is feature j (length n). y is the
// response, centered at load when requested. z is the optional index
// variable for varying-coefficient screening. Immutable after construction
// by convention, so it is safe to share across worker threads.
struct Dataset {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    std::optional<std::vector<double>> z;
    std::vector<std::string> feature_names;

    std::size_t n() const { return y.size(); }
    std::size_t p() const { return x.size(); }
};

enum class RescaleMode { none, minmax, rank };

struct LoadOptions {
    std::string response_col = "y";
    std::string index_col;  // empty = no index variable
    bool center_response = true;
};

namespace detail {

inline double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    // Tolerate surrounding spaces, which some writers emit after commas.
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r')) --last;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || first == last) {
        throw ParseError("cannot parse numeric cell '" + cell + "'", row, col);
    }
    if (!std::isfinite(value)) {
        throw ParseError("non-finite value '" + cell + "'", row, col);
    }
    return value;
}

inline std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

// Shortest-round-trip-safe formatting: 17 significant digits.
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Loads a CSV into a Dataset. The response column (and index column, if
// named) are pulled out; every remaining column becomes a feature, in
// header order.
inline Dataset load_csv(const std::string& path, const LoadOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file '" + path + "'");
    const std::vector<std::string> raw_header = detail::split_row(line);

    std::vector<std::string> header;
    header.reserve(raw_header.size());
    for (const auto& cell : raw_header) header.push_back(detail::trim(cell));

    long response_idx = -1, index_idx = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == opts.response_col) {
            if (response_idx >= 0) throw ConfigError("duplicate response column '" + opts.response_col + "'");
            response_idx = static_cast<long>(c);
        }
        if (!opts.index_col.empty() && header[c] == opts.index_col) {
            if (index_idx >= 0) throw ConfigError("duplicate index column '" + opts.index_col + "'");
            index_idx = static_cast<long>(c);
        }
    }
    if (response_idx < 0) throw ConfigError("response column '" + opts.response_col + "' not found in header");
    if (!opts.index_col.empty() && index_idx < 0) {
        throw ConfigError("index column '" + opts.index_col + "' not found in header");
    }

    Dataset d;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (static_cast<long>(c) == response_idx || static_cast<long>(c) == index_idx) continue;
        d.feature_names.push_back(header[c]);
    }
    if (d.feature_names.empty()) throw ConfigError("no feature columns remain after response/index");
    d.x.resize(d.feature_names.size());
    if (index_idx >= 0) d.z.emplace();

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const std::vector<std::string> cells = detail::split_row(line);
        if (cells.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                                 std::to_string(cells.size()),
                             row, cells.size() + 1);
        }
        std::size_t feat = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double value = detail::parse_cell(cells[c], row, c + 1);
            if (static_cast<long>(c) == response_idx) {
                d.y.push_back(value);
            } else if (static_cast<long>(c) == index_idx) {
                d.z->push_back(value);
            } else {
                d.x[feat++].push_back(value);
            }
        }
    }
    if (d.n() < 2) throw ConfigError("need at least 2 data rows, got " + std::to_string(d.n()));

    if (opts.center_response) {
        const double mean = std::accumulate(d.y.begin(), d.y.end(), 0.0) /
                            static_cast<double>(d.n());
        for (double& yi : d.y) yi -= mean;
    }
    return d;
}

// Writes a Dataset as CSV: features in order, then the response column "y",
// then the index column "z" when present. 17 significant digits, so a
// load -> write -> load round trip reproduces values exactly.
inline void write_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    for (std::size_t j = 0; j < d.p(); ++j) out << d.feature_names[j] << ',';
    out << 'y';
    if (d.z) out << ",z";
    out << '\n';
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (std::size_t j = 0; j < d.p(); ++j) out << detail::format_double(d.x[j][i]) << ',';
        out << detail::format_double(d.y[i]);
        if (d.z) out << ',' << detail::format_double((*d.z)[i]);
        out << '\n';
    }
    if (!out) throw ConfigError("write failed for '" + path + "'");
}

// Rescales every feature column; y and z are untouched. minmax maps each
// column affinely onto [0,1] (constant columns become 0.5); rank replaces
// values by (rank - 0.5)/n with ties sharing their average rank. Both modes
// are idempotent.
inline Dataset rescale_features(const Dataset& d, RescaleMode mode) {
    Dataset out = d;
    if (mode == RescaleMode::none) return out;
    const std::size_t n = d.n();
    for (auto& col : out.x) {
        if (mode == RescaleMode::minmax) {
            const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
            const double lo = *mn, span = *mx - *mn;
            if (span == 0.0) {
                std::fill(col.begin(), col.end(), 0.5);
            } else {
                for (double& v : col) v = (v - lo) / span;
            }
        } else {  // rank
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&col](std::size_t a, std::size_t b) { return col[a] < col[b]; });
            std::vector<double> ranked(n);
            std::size_t i = 0;
            while (i < n) {
                std::size_t k = i;
                while (k + 1 < n && col[order[k + 1]] == col[order[i]]) ++k;
                // 1-based ranks i+1..k+1 share their average.
                const double avg = 0.5 * static_cast<double>(i + 1 + k + 1);
                for (std::size_t t = i; t <= k; ++t) {
                    ranked[order[t]] = (avg - 0.5) / static_cast<double>(n);
                }
                i = k + 1;
            }
            col = std::move(ranked);
        }
    }
    return out;
}

}  // namespace elscreen
