#pragma once

// Varying-coefficient screening: regress Y on the index variable Z, then
// run local EL on the product process X_j * Ytilde indexed by Z,
//
//     v_i(z0) = K_h(Z_i - z0) * X_ij * Ytilde_i,   Ytilde_i = Y_i - Ehat(Y|Z_i),
//
// so a feature scores high where its varying coefficient b_j(z) keeps the
// conditional covariance of X_j and the residualized response away from 0.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "elscreen/dataset.hpp"
#include "elscreen/errors.hpp"
#include "elscreen/kernel.hpp"
#include "elscreen/parallel.hpp"
#include "elscreen/report.hpp"
#include "elscreen/screening.hpp"

namespace elscreen {

struct VCConfig {
    // EL localization in z. The bandwidth is shared by all features (it
    // smooths z, not x), so the default is the plug-in rule on z.
    KernelConfig kernel_z{.family = KernelFamily::epanechnikov,
                          .bandwidth = BandwidthRule::reference_rule};
    // Nuisance regression of y on z; its own CV problem.
    KernelConfig kernel_nuisance{.family = KernelFamily::epanechnikov,
                                 .bandwidth = BandwidthRule::loo_cv};
    EvalPolicy eval_policy = EvalPolicy::observed_points;
    std::size_t grid_size = 0;
    std::size_t min_support = 5;
    SelectionRule selection;
    unsigned threads = 0;
};

// Fitted values Ehat(Y | Z = Z_i) by Nadaraya-Watson on the full sample.
// Points where a compact kernel leaves an empty window fall back to the
// global mean of y, keeping the fit total.
inline std::vector<double> estimate_nuisance(std::span<const double> z,
                                             std::span<const double> y,
                                             const VCConfig& cfg) {
    const std::size_t n = z.size();
    bool constant = true;
    for (const double v : z) {
        if (v != z[0]) {
            constant = false;
            break;
        }
    }
    if (constant) throw DegenerateDataError("index variable is constant; cannot smooth on z");

    const double h = resolve_bandwidth(z, y, cfg.kernel_nuisance);
    double mean = 0.0;
    for (const double yi : y) mean += yi;
    mean /= static_cast<double>(n);

    std::vector<double> fit(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double value = nw_estimate(z, y, h, z[i], cfg.kernel_nuisance);
        fit[i] = std::isnan(value) ? mean : value;
    }
    return fit;
}

namespace detail {

inline ScreeningConfig vc_point_config(const VCConfig& cfg) {
    ScreeningConfig scfg;
    scfg.kernel = cfg.kernel_z;
    scfg.eval_policy = cfg.eval_policy;
    scfg.grid_size = cfg.grid_size;
    scfg.min_support = cfg.min_support;
    return scfg;
}

// Core statistic given precomputed residuals and z bandwidth: sup over z
// evaluation points of el_logratio(K_h(z - z0) * xj * ytilde). This is the
// plain local statistic applied to smoothing variable z with responses
// xj * ytilde.
inline FeatureStat vc_stat_core(std::span<const double> xj,
                                std::span<const double> ytilde,
                                std::span<const double> z, double h,
                                const std::vector<double>& points, const VCConfig& cfg) {
    const std::size_t n = xj.size();
    std::vector<double> products(n);
    for (std::size_t i = 0; i < n; ++i) products[i] = xj[i] * ytilde[i];
    const ScreeningConfig scfg = vc_point_config(cfg);
    return sup_local_stat(z, products, h, points, scfg);
}

}  // namespace detail

// Statistic for one feature, fitting the nuisance itself. For screening
// many features, vc_screen shares one nuisance fit instead.
inline FeatureStat vc_feature_stat(std::span<const double> xj, std::span<const double> y,
                                   std::span<const double> z, const VCConfig& cfg) {
    const std::vector<double> fit = estimate_nuisance(z, y, cfg);
    std::vector<double> ytilde(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ytilde[i] = y[i] - fit[i];
    const double h = resolve_bandwidth(z, ytilde, cfg.kernel_z);
    const ScreeningConfig scfg = detail::vc_point_config(cfg);
    const std::vector<double> points = detail::evaluation_points(z, scfg);
    return detail::vc_stat_core(xj, ytilde, z, h, points, cfg);
}

// Screens every feature against the index variable: one shared nuisance
// fit and z bandwidth, then per-feature statistics in parallel.
inline ScreeningReport vc_screen(const Dataset& d, const VCConfig& cfg) {
    if (!d.z) throw ConfigError("varying-coefficient screening requires an index variable");
    const std::vector<double>& z = *d.z;
    const std::size_t p = d.p();

    const std::vector<double> fit = estimate_nuisance(z, d.y, cfg);
    std::vector<double> ytilde(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) ytilde[i] = d.y[i] - fit[i];
    const double h = resolve_bandwidth(z, ytilde, cfg.kernel_z);
    const ScreeningConfig scfg = detail::vc_point_config(cfg);
    const std::vector<double> points = detail::evaluation_points(z, scfg);

    ScreeningReport report;
    report.kind = ReportKind::varying_coefficient;
    report.method_label = "vc_el";
    report.feature_names = d.feature_names;
    report.stats.assign(p, 0.0);
    report.argmax_point.assign(p, std::numeric_limits<double>::quiet_NaN());
    report.bandwidths.assign(p, 0.0);
    report.skipped_points.assign(p, 0);
    report.diagnostics.assign(p, std::string());

    parallel_for(p, cfg.threads, [&](std::size_t j) {
        try {
            const FeatureStat fs = detail::vc_stat_core(d.x[j], ytilde, z, h, points, cfg);
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
