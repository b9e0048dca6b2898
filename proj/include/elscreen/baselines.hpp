#pragma once

// Comparator screeners: SIRS (rank-indicator moments), DC-SIS (squared
// distance correlation), and the parametric marginal EL with constraint
// values x_ij * y_i.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "elscreen/dataset.hpp"
#include "elscreen/el.hpp"
#include "elscreen/errors.hpp"
#include "elscreen/parallel.hpp"
#include "elscreen/report.hpp"

namespace elscreen {

enum class BaselineKind { sirs, dcsis, parametric_el };

inline const char* baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::sirs: return "sirs";
        case BaselineKind::dcsis: return "dcsis";
        case BaselineKind::parametric_el: return "parametric_el";
    }
    return "?";
}

// SIRS statistic: omega_j = n^-1 sum_k [ n^-1 sum_i xt_i 1(y_i < y_k) ]^2
// with xt the standardized feature. Computed with prefix sums over the
// y-order, so ties in y are handled by the strict inequality exactly.
inline double sirs_stat(std::span<const double> xj, std::span<const double> y) {
    const std::size_t n = xj.size();
    double mean = 0.0;
    for (const double v : xj) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const double v : xj) ss += (v - mean) * (v - mean);
    if (ss == 0.0) return 0.0;  // constant feature carries no ranking signal
    const double inv_sd = std::sqrt(static_cast<double>(n) / ss);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&y](std::size_t a, std::size_t b) { return y[a] < y[b]; });

    const double inv_n = 1.0 / static_cast<double>(n);
    double acc = 0.0;     // sum over k of inner^2
    double prefix = 0.0;  // sum of xt over observations with y strictly below the current group
    std::size_t i = 0;
    while (i < n) {
        std::size_t k = i;
        double group_sum = 0.0;
        while (k < n && y[order[k]] == y[order[i]]) {
            group_sum += (xj[order[k]] - mean) * inv_sd;
            ++k;
        }
        const double inner = prefix * inv_n;
        acc += static_cast<double>(k - i) * inner * inner;
        prefix += group_sum;
        i = k;
    }
    return acc * inv_n;
}

namespace detail {

// Double-centered pairwise distance matrix, row-major n*n.
inline std::vector<double> centered_distances(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<double> a(n * n);
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double d = std::abs(v[i] - v[k]);
            a[i * n + k] = d;
            row_mean[i] += d;
        }
        grand += row_mean[i];
        row_mean[i] /= static_cast<double>(n);
    }
    grand /= static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            a[i * n + k] -= row_mean[i] + row_mean[k] - grand;
        }
    }
    return a;
}

inline double dcsis_from_centered(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        ab += a[t] * b[t];
        aa += a[t] * a[t];
        bb += b[t] * b[t];
    }
    const double denom = std::sqrt(aa * bb);
    if (!(denom > 0.0)) return 0.0;
    return std::clamp(ab / denom, 0.0, 1.0);
}

}  // namespace detail

// Squared sample distance correlation of xj and y.
inline double dcsis_stat(std::span<const double> xj, std::span<const double> y) {
    if (xj.size() < 4) throw ConfigError("distance correlation needs n >= 4");
    const std::vector<double> a = detail::centered_distances(xj);
    const std::vector<double> b = detail::centered_distances(y);
    return detail::dcsis_from_centered(a, b);
}

// Parametric marginal EL: el_logratio of the products x_ij * y_i, probing
// the linear moment condition E(X_j Y) = 0.
inline double parametric_el_stat(std::span<const double> xj, std::span<const double> y) {
    std::vector<double> v(xj.size());
    for (std::size_t i = 0; i < xj.size(); ++i) v[i] = xj[i] * y[i];
    return el_logratio(v).logratio;
}

// Screens all features with the chosen baseline statistic; ranking and
// selection semantics match the EL screen. Bandwidth and evaluation-point
// fields do not apply and are reported as 0 / NaN.
inline ScreeningReport baseline_screen(const Dataset& d, BaselineKind kind,
                                       const SelectionRule& selection,
                                       unsigned threads = 0) {
    const std::size_t p = d.p();
    ScreeningReport report;
    report.kind = ReportKind::baseline;
    report.method_label = baseline_name(kind);
    report.feature_names = d.feature_names;
    report.stats.assign(p, 0.0);
    report.argmax_point.assign(p, std::numeric_limits<double>::quiet_NaN());
    report.bandwidths.assign(p, 0.0);
    report.skipped_points.assign(p, 0);
    report.diagnostics.assign(p, std::string());

    // The response-side distance matrix is shared across features.
    std::vector<double> b;
    if (kind == BaselineKind::dcsis) b = detail::centered_distances(d.y);

    parallel_for(p, threads, [&](std::size_t j) {
        try {
            switch (kind) {
                case BaselineKind::sirs:
                    report.stats[j] = sirs_stat(d.x[j], d.y);
                    break;
                case BaselineKind::dcsis: {
                    const std::vector<double> a = detail::centered_distances(d.x[j]);
                    report.stats[j] = detail::dcsis_from_centered(a, b);
                    break;
                }
                case BaselineKind::parametric_el:
                    report.stats[j] = parametric_el_stat(d.x[j], d.y);
                    break;
            }
        } catch (const std::exception& e) {
            report.stats[j] = 0.0;
            report.diagnostics[j] = e.what();
        }
    });

    finalize_report(report, selection);
    return report;
}

}  // namespace elscreen
