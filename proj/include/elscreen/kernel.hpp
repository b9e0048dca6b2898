#pragma once

// Kernel functions, Nadaraya-Watson estimation, and bandwidth selection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "elscreen/errors.hpp"

namespace elscreen {

enum class KernelFamily { epanechnikov, gaussian };

enum class BandwidthRule {
    fixed,           // use KernelConfig::h as given
    reference_rule,  // normal-reference plug-in
    loo_cv,          // leave-one-out CV over a grid anchored at the plug-in
};

struct KernelConfig {
    KernelFamily family = KernelFamily::epanechnikov;
    BandwidthRule bandwidth = BandwidthRule::loo_cv;
    double h = 0.0;           // only read when bandwidth == fixed
    int cv_grid_size = 20;    // log-spaced grid points
    double cv_span_lo = 0.2;  // grid endpoints as multiples of the plug-in h
    double cv_span_hi = 5.0;
};

// ===== Kernel evaluation =====

// K(u): epanechnikov (3/4)(1-u^2) on |u| <= 1, gaussian standard normal pdf.
inline double kernel_eval(KernelFamily family, double u) {
    if (family == KernelFamily::epanechnikov) {
        const double t = 1.0 - u * u;
        return t > 0.0 ? 0.75 * t : 0.0;
    }
    return 0.3989422804014326779 * std::exp(-0.5 * u * u);
}

namespace detail {

inline void require_bandwidth(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw ConfigError("bandwidth must be a positive finite real, got " +
                          std::to_string(h));
    }
}

}  // namespace detail

// Scaled kernel weight K_h(t) = K(t/h)/h.
inline double kernel_weight(KernelFamily family, double t, double h) {
    return kernel_eval(family, t / h) / h;
}

// ===== Nadaraya-Watson =====

// NW estimate of E(y|x = x0). Returns NaN (the distinguished "undefined"
// value) when every kernel weight vanishes, which can only happen for
// compact-support kernels.
inline double nw_estimate(std::span<const double> xcol, std::span<const double> y,
                          double h, double x0, const KernelConfig& cfg) {
    detail::require_bandwidth(h);
    double num = 0.0, den = 0.0;
    const std::size_t n = xcol.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = kernel_eval(cfg.family, (xcol[i] - x0) / h);
        num += w * y[i];
        den += w;
    }
    if (den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return num / den;
}

// ===== Bandwidth selection =====

namespace detail {

// Type-7 quantile (linear interpolation) of an already sorted sample.
inline double sorted_quantile(const std::vector<double>& s, double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= s.size()) return s.back();
    return s[lo] + frac * (s[lo + 1] - s[lo]);
}

}  // namespace detail

// Normal-reference plug-in h = 1.06 * min(sd, IQR/1.34) * n^(-1/5). A zero
// IQR with positive sd (heavily tied data) falls back to the sd alone so the
// result stays positive.
inline double reference_rule_bandwidth(std::span<const double> xcol) {
    const std::size_t n = xcol.size();
    if (n < 2) throw DegenerateDataError("reference rule needs at least 2 observations");

    double mean = 0.0;
    for (const double x : xcol) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const double x : xcol) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) throw DegenerateDataError("reference rule undefined for a constant column");

    std::vector<double> s(xcol.begin(), xcol.end());
    std::sort(s.begin(), s.end());
    const double iqr = detail::sorted_quantile(s, 0.75) - detail::sorted_quantile(s, 0.25);
    const double scale = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 1.06 * scale * std::pow(static_cast<double>(n), -0.2);
}

namespace detail {

// Leave-one-out CV error of NW at bandwidth h; an observation whose
// leave-one-out neighborhood is empty is predicted as 0 (the centered mean).
inline double loo_cv_error(std::span<const double> x, std::span<const double> y,
                           KernelFamily family, double h) {
    const std::size_t n = x.size();
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            const double w = kernel_eval(family, (x[k] - x[i]) / h);
            num += w * y[k];
            den += w;
        }
        const double pred = den > 0.0 ? num / den : 0.0;
        const double d = y[i] - pred;
        err += d * d;
    }
    return err;
}

// Same quantity for the compact-support kernel on x-sorted data, using a
// sliding window over (x0 - h, x0 + h) instead of the full pairwise scan.
// Equal up to floating-point reordering of the sums.
inline double loo_cv_error_window(const std::vector<double>& sx, const std::vector<double>& sy,
                                  double h) {
    const std::size_t n = sx.size();
    const double inv_h = 1.0 / h;
    double err = 0.0;
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = sx[i];
        while (lo < n && sx[lo] <= x0 - h) ++lo;
        if (hi < lo) hi = lo;
        while (hi < n && sx[hi] < x0 + h) ++hi;
        double num = 0.0, den = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            const double u = (sx[k] - x0) * inv_h;
            const double w = 0.75 * (1.0 - u * u);
            num += w * sy[k];
            den += w;
        }
        num -= 0.75 * sy[i];  // remove the self term K(0) = 3/4
        den -= 0.75;
        const double pred = den > 0.0 ? num / den : 0.0;
        const double d = sy[i] - pred;
        err += d * d;
    }
    return err;
}

}  // namespace detail

// Leave-one-out CV bandwidth on cv_grid_size log-spaced points spanning
// [cv_span_lo, cv_span_hi] times the reference-rule pilot. Ties are broken
// toward the larger (smoother) bandwidth; a single-point grid returns its
// one point.
inline double loo_cv_bandwidth(std::span<const double> xcol, std::span<const double> y,
                               const KernelConfig& cfg) {
    if (xcol.size() < 3) throw DegenerateDataError("LOO CV needs at least 3 observations");
    if (cfg.cv_grid_size < 1) throw ConfigError("cv_grid_size must be >= 1");
    if (!(cfg.cv_span_lo > 0.0) || !(cfg.cv_span_hi >= cfg.cv_span_lo)) {
        throw ConfigError("cv_span must satisfy 0 < lo <= hi");
    }

    const double pilot = reference_rule_bandwidth(xcol);
    const double log_lo = std::log(cfg.cv_span_lo * pilot);
    const double log_hi = std::log(cfg.cv_span_hi * pilot);
    const int grid = cfg.cv_grid_size;

    const bool windowed = cfg.family == KernelFamily::epanechnikov;
    std::vector<double> sx, sy;
    if (windowed) {
        std::vector<std::size_t> order(xcol.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return xcol[a] < xcol[b]; });
        sx.reserve(order.size());
        sy.reserve(order.size());
        for (const std::size_t i : order) {
            sx.push_back(xcol[i]);
            sy.push_back(y[i]);
        }
    }

    double best_h = 0.0;
    double best_err = std::numeric_limits<double>::infinity();
    for (int g = 0; g < grid; ++g) {
        const double frac = grid == 1 ? 0.0 : static_cast<double>(g) / static_cast<double>(grid - 1);
        const double h = std::exp(log_lo + frac * (log_hi - log_lo));
        const double err = windowed ? detail::loo_cv_error_window(sx, sy, h)
                                    : detail::loo_cv_error(xcol, y, cfg.family, h);
        if (err <= best_err) {  // ascending grid: <= prefers the larger h
            best_err = err;
            best_h = h;
        }
    }
    return best_h;
}

// Resolves the bandwidth a config implies for one column.
inline double resolve_bandwidth(std::span<const double> xcol, std::span<const double> y,
                                const KernelConfig& cfg) {
    switch (cfg.bandwidth) {
        case BandwidthRule::fixed:
            detail::require_bandwidth(cfg.h);
            return cfg.h;
        case BandwidthRule::reference_rule:
            return reference_rule_bandwidth(xcol);
        case BandwidthRule::loo_cv:
            return loo_cv_bandwidth(xcol, y, cfg);
    }
    throw ConfigError("unknown bandwidth rule");
}

}  // namespace elscreen
