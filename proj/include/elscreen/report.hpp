#pragma once

// Shared screening-report structure: per-feature statistics, ranking,
// selection, and the CSV serialization all screening flavors emit.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "elscreen/dataset.hpp"
#include "elscreen/errors.hpp"

namespace elscreen {

struct SelectionRule {
    enum class Kind { top_d, threshold };
    Kind kind = Kind::top_d;
    std::size_t d = 20;   // top_d
    double gamma = 0.0;   // threshold

    static SelectionRule top_d(std::size_t d) { return {Kind::top_d, d, 0.0}; }
    static SelectionRule threshold(double gamma) { return {Kind::threshold, 0, gamma}; }
};

// Which screening flavor produced a report; controls the extra CSV columns.
enum class ReportKind { plain, varying_coefficient, baseline };

struct ScreeningReport {
    std::vector<double> stats;                // per feature, +inf allowed
    std::vector<double> argmax_point;         // evaluation point achieving the sup (NaN if none)
    std::vector<std::size_t> ranks;           // 1..p, 1 = largest statistic
    std::vector<std::size_t> selected;        // ascending 0-based feature indices
    std::vector<double> bandwidths;           // per feature (0 when not applicable)
    std::vector<std::size_t> skipped_points;  // evaluation points failing min_support
    std::vector<std::string> feature_names;
    std::vector<std::string> diagnostics;     // per feature; empty = clean
    ReportKind kind = ReportKind::plain;
    std::string method_label = "el";

    bool is_selected(std::size_t j) const {
        return std::binary_search(selected.begin(), selected.end(), j);
    }
};

namespace detail {

// Descending rank with +inf above every finite value and ties broken by
// feature index (lower index first). ranks[j] in 1..p.
inline std::vector<std::size_t> rank_descending(const std::vector<double>& stats) {
    std::vector<std::size_t> order(stats.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&stats](std::size_t a, std::size_t b) {
        if (stats[a] != stats[b]) return stats[a] > stats[b];
        return a < b;
    });
    std::vector<std::size_t> ranks(stats.size());
    for (std::size_t k = 0; k < order.size(); ++k) ranks[order[k]] = k + 1;
    return ranks;
}

inline std::vector<std::size_t> apply_selection(const std::vector<double>& stats,
                                                const std::vector<std::size_t>& ranks,
                                                const SelectionRule& rule) {
    std::vector<std::size_t> picked;
    if (rule.kind == SelectionRule::Kind::top_d) {
        if (rule.d < 1) throw ConfigError("top_d selection needs d >= 1");
        for (std::size_t j = 0; j < ranks.size(); ++j) {
            if (ranks[j] <= rule.d) picked.push_back(j);
        }
    } else {
        if (!(rule.gamma > 0.0)) throw ConfigError("threshold selection needs gamma > 0");
        for (std::size_t j = 0; j < stats.size(); ++j) {
            if (stats[j] >= rule.gamma) picked.push_back(j);
        }
    }
    return picked;  // ascending by construction
}

}  // namespace detail

// Completes a report whose per-feature fields are already filled: computes
// ranks and applies the selection rule.
inline void finalize_report(ScreeningReport& report, const SelectionRule& rule) {
    report.ranks = detail::rank_descending(report.stats);
    report.selected = detail::apply_selection(report.stats, report.ranks, rule);
}

// CSV serialization. Base columns are shared by all flavors; the
// varying-coefficient flavor appends the z evaluation point achieving the
// sup, and baselines append the method name. Infinite statistics are the
// literal token `inf`.
inline void write_report_csv(const ScreeningReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << "feature,stat,argmax_point,rank,selected,bandwidth,skipped_points";
    if (report.kind == ReportKind::varying_coefficient) out << ",z_point";
    if (report.kind == ReportKind::baseline) out << ",method";
    out << '\n';
    for (std::size_t j = 0; j < report.stats.size(); ++j) {
        out << report.feature_names[j] << ',' << detail::format_double(report.stats[j]) << ','
            << detail::format_double(report.argmax_point[j]) << ',' << report.ranks[j] << ','
            << (report.is_selected(j) ? 1 : 0) << ','
            << detail::format_double(report.bandwidths[j]) << ',' << report.skipped_points[j];
        if (report.kind == ReportKind::varying_coefficient) {
            out << ',' << detail::format_double(report.argmax_point[j]);
        }
        if (report.kind == ReportKind::baseline) out << ',' << report.method_label;
        out << '\n';
    }
    if (!out) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace elscreen
