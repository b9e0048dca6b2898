#pragma once

// Univariate empirical likelihood for a zero-mean constraint.
//
// Given constraint values v_1..v_n, the EL weights maximize Π w_i subject to
// w_i ≥ 0, Σ w_i = 1, Σ w_i v_i = 0. The -2 log ratio against the uniform
// weights is
//
//     el_logratio(v) = 2 Σ log(1 + λ v_i)
//
// with λ the unique root of the score g(λ) = Σ v_i / (1 + λ v_i) on the
// feasibility interval (-1/max v_i, -1/min v_i). When 0 lies outside the
// convex hull of the nonzero v_i the constraint is infeasible and the
// statistic is +∞ by convention. The statistic is self-Studentized:
// el_logratio(c·v) = el_logratio(v) for every c ≠ 0.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "elscreen/errors.hpp"

namespace elscreen {

enum class ElStatus { converged, infinite_hull, all_zero };

struct ElOutcome {
    double logratio = 0.0;  // ≥ 0, possibly +inf
    double lambda = 0.0;    // meaningful only when logratio is finite
    ElStatus status = ElStatus::converged;
    int iterations = 0;
};

namespace detail {

// Relative shrink applied to the feasibility interval so the boundary
// log(0) singularities are never touched.
constexpr double kElBracketMargin = 1e-12;

struct ElRange {
    double vmin = 0.0;   // over nonzero entries
    double vmax = 0.0;
    double abs_sum = 0.0;
    std::size_t nonzero = 0;
};

inline ElRange el_scan(std::span<const double> v) {
    ElRange r;
    r.vmin = std::numeric_limits<double>::infinity();
    r.vmax = -std::numeric_limits<double>::infinity();
    for (const double vi : v) {
        if (vi == 0.0) continue;
        if (vi < r.vmin) r.vmin = vi;
        if (vi > r.vmax) r.vmax = vi;
        r.abs_sum += std::abs(vi);
        ++r.nonzero;
    }
    return r;
}

}  // namespace detail

// Computes the EL log-ratio, its Lagrange multiplier, and a status flag.
//
// Zeros in v are excluded from the hull test and the bracket (they cannot
// constrain λ) but are harmless in the sums, where they contribute nothing.
// The score is strictly decreasing on the open bracket, so a Newton
// iteration clamped to the current sign-change bracket (midpoint fallback)
// always converges; tol is measured relative to Σ|v_i| so the stopping rule
// inherits the scale invariance of the statistic itself.
inline ElOutcome el_logratio(std::span<const double> v, double tol = 1e-10,
                             int max_iter = 100) {
    ElOutcome out;
    const detail::ElRange r = detail::el_scan(v);

    if (r.nonzero == 0) {
        out.status = ElStatus::all_zero;
        return out;
    }
    if (r.vmin > 0.0 || r.vmax < 0.0) {
        out.status = ElStatus::infinite_hull;
        out.logratio = std::numeric_limits<double>::infinity();
        out.lambda = std::numeric_limits<double>::quiet_NaN();
        return out;
    }

    // Both signs present: unique root in (-1/vmax, -1/vmin).
    double lo = -1.0 / r.vmax;
    double hi = -1.0 / r.vmin;
    const double width = hi - lo;
    lo += detail::kElBracketMargin * width;
    hi -= detail::kElBracketMargin * width;

    const double score_tol = tol * r.abs_sum;
    double lambda = 0.0;  // interior: lo < 0 < hi
    double a = lo, b = hi;

    for (int it = 1; it <= max_iter; ++it) {
        double score = 0.0;
        double slope = 0.0;
        for (const double vi : v) {
            if (vi == 0.0) continue;
            const double t = vi / (1.0 + lambda * vi);
            score += t;
            slope -= t * t;
        }
        out.iterations = it;
        if (std::abs(score) <= score_tol) {
            out.lambda = lambda;
            out.logratio = 0.0;
            if (lambda != 0.0) {
                double acc = 0.0;
                for (const double vi : v) acc += std::log1p(lambda * vi);
                out.logratio = 2.0 * acc;
                if (out.logratio < 0.0) out.logratio = 0.0;  // roundoff guard
            }
            return out;
        }
        if (score > 0.0) {
            a = lambda;  // root is to the right (score decreasing)
        } else {
            b = lambda;
        }
        double next = lambda - score / slope;
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        lambda = next;
        if (b - a <= tol) {
            // Bracket collapsed; accept its midpoint.
            out.lambda = lambda;
            double acc = 0.0;
            for (const double vi : v) acc += std::log1p(lambda * vi);
            out.logratio = std::max(0.0, 2.0 * acc);
            return out;
        }
    }
    throw NumericError("empirical likelihood score iteration failed to converge (bracket [" +
                       std::to_string(a) + ", " + std::to_string(b) + "])");
}

// Grid-search oracle for el_logratio, intended for small instances.
//
// The dual objective f(λ) = 2 Σ log(1 + λ v_i) is strictly concave on the
// feasibility interval, so the true maximizer lies within one cell of the
// best grid point. The search therefore evaluates a dense grid over the
// whole interval and then twice more over the bracketing cells, and returns
// the best value seen. No Newton machinery is shared with el_logratio.
inline double el_logratio_bruteforce(std::span<const double> v,
                                     long grid = 200001) {
    const detail::ElRange r = detail::el_scan(v);
    if (r.nonzero == 0) return 0.0;
    if (r.vmin > 0.0 || r.vmax < 0.0) return std::numeric_limits<double>::infinity();
    if (grid < 5) grid = 5;

    double lo = -1.0 / r.vmax;
    double hi = -1.0 / r.vmin;
    const double width = hi - lo;
    lo += detail::kElBracketMargin * width;
    hi -= detail::kElBracketMargin * width;

    // Products of the n factors stay well inside double range for sane data;
    // fall back to a log-domain sum when they do not.
    const auto objective = [&v](double lambda) {
        double prod = 1.0;
        for (const double vi : v) {
            const double t = 1.0 + lambda * vi;
            if (t <= 0.0) return -std::numeric_limits<double>::infinity();
            prod *= t;
        }
        if (prod > 1e280 || prod < 1e-280) {
            double acc = 0.0;
            for (const double vi : v) acc += std::log1p(lambda * vi);
            return 2.0 * acc;
        }
        return 2.0 * std::log(prod);
    };

    double best = -std::numeric_limits<double>::infinity();
    double a = lo, b = hi;
    for (int pass = 0; pass < 3; ++pass) {
        const long points = (pass == 0) ? grid : std::min<long>(grid, 4001);
        const double step = (b - a) / static_cast<double>(points - 1);
        long best_k = 0;
        for (long k = 0; k < points; ++k) {
            const double f = objective(a + step * static_cast<double>(k));
            if (f > best) {
                best = f;
                best_k = k;
            }
        }
        const double a_next = a + step * static_cast<double>(std::max<long>(0, best_k - 1));
        const double b_next = a + step * static_cast<double>(std::min<long>(points - 1, best_k + 1));
        a = a_next;
        b = b_next;
    }
    return std::max(0.0, best);
}

}  // namespace elscreen
