#pragma once

// Marginal local-EL screening: for each feature j, the statistic
//
//     l_j(0) = max over evaluation points x0 of el_logratio(v(x0)),
//     v_i(x0) = K_h(x_ij - x0) * y_i,
//
// estimates the strength of the local mean signal E(Y | X_j = x0) against
// zero. Features are ranked by the statistic (infinite values on top) and a
// top-d or threshold rule selects the survivors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elscreen/dataset.hpp"
#include "elscreen/el.hpp"
#include "elscreen/errors.hpp"
#include "elscreen/kernel.hpp"
#include "elscreen/parallel.hpp"
#include "elscreen/report.hpp"

namespace elscreen {

enum class EvalPolicy {
    observed_points,  // evaluate at the observed values of the smoothing variable
    uniform_grid,     // evaluate on an equispaced grid over the observed range
};

struct ScreeningConfig {
    KernelConfig kernel;
    EvalPolicy eval_policy = EvalPolicy::observed_points;
    std::size_t grid_size = 0;    // uniform_grid point count; 0 = use n
    std::size_t min_support = 5;  // nonzero kernel weights required per point
    SelectionRule selection;
    unsigned threads = 0;  // 0 = available parallelism
};

// Local EL statistic at one evaluation point, or nullopt when fewer than
// min_support kernel weights are nonzero there (a near-empty window would
// let a single observation force an infinite statistic).
inline std::optional<double> local_el_stat(std::span<const double> xj,
                                           std::span<const double> y, double h, double x0,
                                           const ScreeningConfig& cfg) {
    detail::require_bandwidth(h);
    const std::size_t n = xj.size();
    const double inv_h = 1.0 / h;
    std::vector<double> v(n);
    std::size_t support = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = kernel_eval(cfg.kernel.family, (xj[i] - x0) * inv_h) * inv_h;
        if (w > 0.0) ++support;
        v[i] = w * y[i];
    }
    if (support < cfg.min_support) return std::nullopt;
    return el_logratio(v).logratio;
}

struct FeatureStat {
    double stat = 0.0;
    double argmax_point = std::numeric_limits<double>::quiet_NaN();
    std::size_t skipped = 0;
    double bandwidth = 0.0;
};

namespace detail {

inline std::vector<double> evaluation_points(std::span<const double> xj,
                                             const ScreeningConfig& cfg) {
    if (cfg.eval_policy == EvalPolicy::observed_points) {
        return std::vector<double>(xj.begin(), xj.end());
    }
    const auto [mn, mx] = std::minmax_element(xj.begin(), xj.end());
    const std::size_t g = cfg.grid_size > 0 ? cfg.grid_size : xj.size();
    std::vector<double> pts(g);
    if (g == 1) {
        pts[0] = 0.5 * (*mn + *mx);
        return pts;
    }
    const double step = (*mx - *mn) / static_cast<double>(g - 1);
    for (std::size_t k = 0; k < g; ++k) pts[k] = *mn + step * static_cast<double>(k);
    return pts;
}

// Shared sup-aggregation core: evaluates the local EL statistic over the
// given points of the smoothing variable `s` with products `w` as responses
// and keeps the maximum (first achiever on exact ties). The compact-support
// kernel restricts each point's work to a sorted window; zero kernel
// weights never reach the EL solver (they cannot move the statistic).
inline FeatureStat sup_local_stat(std::span<const double> s, std::span<const double> w,
                                  double h, const std::vector<double>& points,
                                  const ScreeningConfig& cfg) {
    require_bandwidth(h);
    FeatureStat out;
    out.bandwidth = h;
    const std::size_t n = s.size();
    const double inv_h = 1.0 / h;
    bool any = false;

    const bool windowed = cfg.kernel.family == KernelFamily::epanechnikov;
    std::vector<double> ss, sw;
    if (windowed) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
        ss.reserve(n);
        sw.reserve(n);
        for (const std::size_t i : order) {
            ss.push_back(s[i]);
            sw.push_back(w[i]);
        }
    }

    std::vector<double> v;
    v.reserve(n);
    for (const double x0 : points) {
        v.clear();
        std::size_t support = 0;
        if (windowed) {
            const auto first = std::lower_bound(ss.begin(), ss.end(), x0 - h);
            const auto last = std::upper_bound(first, ss.end(), x0 + h);
            for (auto it = first; it != last; ++it) {
                const double u = (*it - x0) * inv_h;
                const double k = 1.0 - u * u;
                if (!(k > 0.0)) continue;
                ++support;
                v.push_back(0.75 * k * inv_h * sw[static_cast<std::size_t>(it - ss.begin())]);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double kw = kernel_eval(cfg.kernel.family, (s[i] - x0) * inv_h) * inv_h;
                if (kw > 0.0) {
                    ++support;
                    v.push_back(kw * w[i]);
                }
            }
        }
        if (support < cfg.min_support) {
            ++out.skipped;
            continue;
        }
        const double stat = el_logratio(v).logratio;
        if (!any || stat > out.stat) {
            out.stat = stat;
            out.argmax_point = x0;
            any = true;
        }
    }
    if (!any) {
        out.stat = 0.0;
        out.argmax_point = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace detail

// Sup-aggregated statistic for one feature. Constant columns get statistic
// 0 by convention (no spread, no local signal, and no bandwidth can be
// derived); every evaluation point is reported as skipped in that case.
inline FeatureStat feature_stat(std::span<const double> xj, std::span<const double> y,
                                const ScreeningConfig& cfg) {
    const std::size_t n = xj.size();
    bool constant = true;
    for (const double v : xj) {
        if (v != xj[0]) {
            constant = false;
            break;
        }
    }
    if (constant) {
        FeatureStat out;
        out.stat = 0.0;
        out.argmax_point = xj.empty() ? std::numeric_limits<double>::quiet_NaN() : xj[0];
        out.skipped = n;
        out.bandwidth = 0.0;
        return out;
    }
    const double h = resolve_bandwidth(xj, y, cfg.kernel);
    const std::vector<double> points = detail::evaluation_points(xj, cfg);
    return detail::sup_local_stat(xj, y, h, points, cfg);
}

// Screens every feature of the dataset independently (concurrently when
// threads allow) and assembles the ranked report. A per-feature failure is
// recorded as a diagnostic with statistic 0 instead of aborting the run.
inline ScreeningReport screen(const Dataset& d, const ScreeningConfig& cfg) {
    const std::size_t p = d.p();
    ScreeningReport report;
    report.kind = ReportKind::plain;
    report.method_label = "el";
    report.feature_names = d.feature_names;
    report.stats.assign(p, 0.0);
    report.argmax_point.assign(p, std::numeric_limits<double>::quiet_NaN());
    report.bandwidths.assign(p, 0.0);
    report.skipped_points.assign(p, 0);
    report.diagnostics.assign(p, std::string());

    parallel_for(p, cfg.threads, [&](std::size_t j) {
        try {
            const FeatureStat fs = feature_stat(d.x[j], d.y, cfg);
            report.stats[j] = fs.stat;
            report.argmax_point[j] = fs.argmax_point;
            report.bandwidths[j] = fs.bandwidth;
            report.skipped_points[j] = fs.skipped;
        } catch (const std::exception& e) {
            report.stats[j] = 0.0;
            report.diagnostics[j] = e.what();
        }
    });

    finalize_report(report, cfg.selection);
    return report;
}

}  // namespace elscreen
