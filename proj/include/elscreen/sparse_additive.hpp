#pragma once

// Sparse additive selection: each candidate feature is expanded in a
// centered B-spline basis and the additive model is fit by group-penalized
// least squares,
//
//     min (1/2n) ||y - sum_g Phi_g beta_g||^2 + lambda sum_g ||beta_g||_2,
//
// solved by block coordinate descent after orthonormalizing each group
// (the group update is then an exact soft-threshold). The penalty is chosen
// by seeded k-fold cross-validation; groups with a nonzero coefficient
// block are the retained features.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "elscreen/dataset.hpp"
#include "elscreen/errors.hpp"
#include "elscreen/kernel.hpp"
#include "elscreen/rng.hpp"

namespace elscreen {

struct SparseAdditiveConfig {
    int basis_size = 5;                // B-spline functions per candidate; cubic
    std::vector<double> penalty_grid;  // descending lambdas; empty = automatic
    int k_folds = 5;
    std::uint64_t seed = 0;            // fold assignment
    int auto_grid_size = 25;           // automatic grid: points ...
    double auto_grid_ratio = 0.01;     // ... spanning [ratio, 1] x lambda_max
    double bcd_tol = 1e-7;
    int bcd_max_iter = 1000;
};

struct SparseAdditiveFit {
    std::vector<std::size_t> retained;  // ascending candidate indices
    std::vector<double> fitted;         // in-sample additive prediction
    std::vector<double> group_norms;    // per candidate coefficient-block norm
    double penalty = 0.0;               // CV-chosen lambda
};

// ===== B-spline basis =====

namespace detail {

// Clamped B-spline basis with m functions of degree min(3, m-1); interior
// knots sit at equally spaced quantiles of x. Returns m columns of length
// n. A constant x yields all-zero columns (the group is degenerate and will
// be dropped by the orthonormalization downstream).
inline std::vector<std::vector<double>> bspline_basis(std::span<const double> x, int m) {
    const std::size_t n = x.size();
    std::vector<std::vector<double>> cols(m, std::vector<double>(n, 0.0));
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double lo = s.front(), hi = s.back();
    if (!(hi > lo)) return cols;

    const int degree = std::min(3, m - 1);
    const int interior = m - degree - 1;
    std::vector<double> t(static_cast<std::size_t>(m + degree + 1));
    for (int k = 0; k <= degree; ++k) t[k] = lo;
    for (int k = 1; k <= interior; ++k) {
        t[degree + k] = sorted_quantile(s, static_cast<double>(k) / static_cast<double>(interior + 1));
    }
    for (int k = m; k <= m + degree; ++k) t[k] = hi;

    std::vector<double> basis(degree + 1), left(degree + 1), right(degree + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = std::clamp(x[i], lo, hi);
        // Knot span index j with t[j] <= u < t[j+1], clamped so u = hi lands
        // in the last nonempty span.
        int j = m - 1;
        if (u < hi) {
            j = static_cast<int>(std::upper_bound(t.begin() + degree, t.begin() + m, u) -
                                 t.begin()) - 1;
        } else {
            while (j > degree && !(t[j] < t[j + 1])) --j;
        }
        basis[0] = 1.0;
        for (int r = 1; r <= degree; ++r) {
            left[r] = u - t[j + 1 - r];
            right[r] = t[j + r] - u;
            double saved = 0.0;
            for (int q = 0; q < r; ++q) {
                const double denom = right[q + 1] + left[r - q];
                const double temp = denom != 0.0 ? basis[q] / denom : 0.0;
                basis[q] = saved + right[q + 1] * temp;
                saved = left[r - q] * temp;
            }
            basis[r] = saved;
        }
        for (int b = 0; b <= degree; ++b) cols[j - degree + b][i] = basis[b];
    }
    return cols;
}

// One orthonormalized coefficient group: q holds r columns with
// (1/n) q_a . q_b = delta_ab, and combo maps original (centered) basis
// columns onto them, so q_r = sum_c combo[r][c] * centered_col_c.
struct OrthoGroup {
    std::vector<std::vector<double>> q;
    std::vector<std::vector<double>> combo;
    std::vector<double> col_means;  // centering offsets of the original block
};

// Modified Gram-Schmidt with the (1/n) inner product over the selected
// rows; near-dependent directions are dropped, so rank-deficient blocks
// simply produce fewer coordinates.
inline OrthoGroup orthonormalize_group(const std::vector<std::vector<double>>& block,
                                       const std::vector<std::size_t>& rows) {
    const std::size_t n = rows.size();
    const std::size_t k = block.size();
    OrthoGroup g;
    g.col_means.resize(k);
    const double inv_n = 1.0 / static_cast<double>(n);

    for (std::size_t c = 0; c < k; ++c) {
        double mean = 0.0;
        for (const std::size_t i : rows) mean += block[c][i];
        mean *= inv_n;
        g.col_means[c] = mean;

        std::vector<double> u(n);
        double orig_norm2 = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            u[t] = block[c][rows[t]] - mean;
            orig_norm2 += u[t] * u[t];
        }
        orig_norm2 *= inv_n;

        std::vector<double> combo(k, 0.0);
        combo[c] = 1.0;
        for (std::size_t r = 0; r < g.q.size(); ++r) {
            double alpha = 0.0;
            for (std::size_t t = 0; t < n; ++t) alpha += g.q[r][t] * u[t];
            alpha *= inv_n;
            for (std::size_t t = 0; t < n; ++t) u[t] -= alpha * g.q[r][t];
            for (std::size_t c2 = 0; c2 < k; ++c2) combo[c2] -= alpha * g.combo[r][c2];
        }
        double norm2 = 0.0;
        for (const double v : u) norm2 += v * v;
        norm2 *= inv_n;
        if (norm2 <= 1e-10 * orig_norm2 || norm2 <= 1e-30) continue;
        const double inv_norm = 1.0 / std::sqrt(norm2);
        for (double& v : u) v *= inv_norm;
        for (double& v : combo) v *= inv_norm;
        g.q.push_back(std::move(u));
        g.combo.push_back(std::move(combo));
    }
    return g;
}

// Block coordinate descent for the orthonormalized group lasso. theta is
// warm-started in place; residual holds y_centered - prediction on entry
// and exit.
inline void group_lasso_bcd(const std::vector<OrthoGroup>& groups,
                            std::vector<std::vector<double>>& theta,
                            std::vector<double>& residual, double lambda,
                            double tol_abs, int max_iter) {
    const std::size_t n = residual.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> s;
    for (int sweep = 0; sweep < max_iter; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const std::size_t r = groups[g].q.size();
            if (r == 0) continue;
            s.assign(r, 0.0);
            // s = (1/n) Q^T residual + theta  (adding the group back without
            // touching the residual vector twice).
            for (std::size_t a = 0; a < r; ++a) {
                double acc = 0.0;
                const std::vector<double>& qa = groups[g].q[a];
                for (std::size_t t = 0; t < n; ++t) acc += qa[t] * residual[t];
                s[a] = acc * inv_n + theta[g][a];
            }
            double ns = 0.0;
            for (const double v : s) ns += v * v;
            ns = std::sqrt(ns);
            const double shrink = ns > lambda ? 1.0 - lambda / ns : 0.0;
            for (std::size_t a = 0; a < r; ++a) {
                const double updated = shrink * s[a];
                const double delta = updated - theta[g][a];
                if (delta != 0.0) {
                    const std::vector<double>& qa = groups[g].q[a];
                    for (std::size_t t = 0; t < n; ++t) residual[t] -= delta * qa[t];
                    theta[g][a] = updated;
                    max_delta = std::max(max_delta, std::abs(delta));
                }
            }
        }
        if (max_delta <= tol_abs) return;
    }
}

}  // namespace detail

// Fits the group-penalized additive model on the dataset's columns (the
// candidate set) and returns the retained candidates, the in-sample fit,
// per-group coefficient norms, and the CV-chosen penalty.
inline SparseAdditiveFit fit_sparse_additive(const Dataset& d, const SparseAdditiveConfig& cfg) {
    if (d.p() == 0) throw ConfigError("sparse additive fit needs a nonempty candidate set");
    if (cfg.basis_size < 3) throw ConfigError("basis_size must be >= 3");
    if (cfg.k_folds < 2) throw ConfigError("k_folds must be >= 2");
    const std::size_t n = d.n();
    const std::size_t p = d.p();

    // Basis blocks are built once on the full sample; centering and
    // orthonormalization are redone per training subset.
    std::vector<std::vector<std::vector<double>>> blocks(p);
    for (std::size_t g = 0; g < p; ++g) blocks[g] = detail::bspline_basis(d.x[g], cfg.basis_size);

    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

    const auto mean_of = [](std::span<const double> v, const std::vector<std::size_t>& rows) {
        double m = 0.0;
        for (const std::size_t i : rows) m += v[i];
        return m / static_cast<double>(rows.size());
    };

    // Penalty path (descending). The automatic grid is anchored at the
    // smallest lambda that zeroes every group on the full sample.
    std::vector<double> path = cfg.penalty_grid;
    std::vector<detail::OrthoGroup> full_groups(p);
    for (std::size_t g = 0; g < p; ++g) {
        full_groups[g] = detail::orthonormalize_group(blocks[g], all_rows);
    }
    const double y_mean_full = mean_of(d.y, all_rows);
    std::vector<double> yc_full(n);
    for (std::size_t i = 0; i < n; ++i) yc_full[i] = d.y[i] - y_mean_full;
    if (path.empty()) {
        double lambda_max = 0.0;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (const auto& grp : full_groups) {
            double norm2 = 0.0;
            for (const auto& q : grp.q) {
                double acc = 0.0;
                for (std::size_t t = 0; t < n; ++t) acc += q[t] * yc_full[t];
                acc *= inv_n;
                norm2 += acc * acc;
            }
            lambda_max = std::max(lambda_max, std::sqrt(norm2));
        }
        if (lambda_max <= 0.0) lambda_max = 1.0;
        lambda_max *= 1.001;  // headroom so the first path point is all-zero
        const int grid = std::max(2, cfg.auto_grid_size);
        const double log_hi = std::log(lambda_max);
        const double log_lo = std::log(lambda_max * cfg.auto_grid_ratio);
        for (int k = 0; k < grid; ++k) {
            const double frac = static_cast<double>(k) / static_cast<double>(grid - 1);
            path.push_back(std::exp(log_hi + frac * (log_lo - log_hi)));
        }
    } else {
        std::sort(path.begin(), path.end(), std::greater<double>());
        for (const double lambda : path) {
            if (!(lambda > 0.0)) throw ConfigError("penalty_grid entries must be positive");
        }
    }

    double y_scale = 0.0;
    for (const double v : yc_full) y_scale += v * v;
    y_scale = std::sqrt(y_scale / static_cast<double>(n));
    const double tol_abs = cfg.bcd_tol * std::max(1e-30, y_scale);

    // ----- k-fold CV over the path -----
    const int folds = std::min<int>(cfg.k_folds, static_cast<int>(n));
    std::vector<std::size_t> shuffled(n);
    std::iota(shuffled.begin(), shuffled.end(), std::size_t{0});
    CounterRng rng(cfg.seed, {0, 0, 8000});
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t k = rng.next_u32() % i;
        std::swap(shuffled[i - 1], shuffled[k]);
    }

    std::vector<double> cv_err(path.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train, val;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<int>(i % static_cast<std::size_t>(folds)) == f) {
                val.push_back(shuffled[i]);
            } else {
                train.push_back(shuffled[i]);
            }
        }
        if (val.empty() || train.size() < 2) continue;

        std::vector<detail::OrthoGroup> groups(p);
        for (std::size_t g = 0; g < p; ++g) {
            groups[g] = detail::orthonormalize_group(blocks[g], train);
        }
        const double y_mean = mean_of(d.y, train);
        std::vector<double> residual(train.size());
        for (std::size_t t = 0; t < train.size(); ++t) residual[t] = d.y[train[t]] - y_mean;
        std::vector<std::vector<double>> theta(p);
        for (std::size_t g = 0; g < p; ++g) theta[g].assign(groups[g].q.size(), 0.0);

        for (std::size_t lx = 0; lx < path.size(); ++lx) {
            detail::group_lasso_bcd(groups, theta, residual, path[lx], tol_abs, cfg.bcd_max_iter);
            // Validation prediction through the combo maps.
            double err = 0.0;
            for (const std::size_t i : val) {
                double pred = y_mean;
                for (std::size_t g = 0; g < p; ++g) {
                    for (std::size_t r = 0; r < theta[g].size(); ++r) {
                        if (theta[g][r] == 0.0) continue;
                        double psi = 0.0;
                        const auto& combo = groups[g].combo[r];
                        for (std::size_t c = 0; c < combo.size(); ++c) {
                            if (combo[c] == 0.0) continue;
                            psi += combo[c] * (blocks[g][c][i] - groups[g].col_means[c]);
                        }
                        pred += theta[g][r] * psi;
                    }
                }
                const double delta = d.y[i] - pred;
                err += delta * delta;
            }
            cv_err[lx] += err;
        }
    }

    std::size_t best = 0;
    for (std::size_t lx = 1; lx < path.size(); ++lx) {
        if (cv_err[lx] < cv_err[best]) best = lx;  // strict: ties keep the larger lambda
    }
    const double lambda_star = path[best];

    // ----- final fit on the full sample, warm-started along the path -----
    std::vector<double> residual = yc_full;
    std::vector<std::vector<double>> theta(p);
    for (std::size_t g = 0; g < p; ++g) theta[g].assign(full_groups[g].q.size(), 0.0);
    for (std::size_t lx = 0; lx <= best; ++lx) {
        detail::group_lasso_bcd(full_groups, theta, residual, path[lx], tol_abs, cfg.bcd_max_iter);
    }

    SparseAdditiveFit fit;
    fit.penalty = lambda_star;
    fit.group_norms.resize(p, 0.0);
    for (std::size_t g = 0; g < p; ++g) {
        double norm2 = 0.0;
        for (const double v : theta[g]) norm2 += v * v;
        fit.group_norms[g] = std::sqrt(norm2);
        if (fit.group_norms[g] > 1e-8) fit.retained.push_back(g);
    }
    fit.fitted.assign(n, y_mean_full);
    for (std::size_t i = 0; i < n; ++i) fit.fitted[i] += yc_full[i] - residual[i];
    return fit;
}

}  // namespace elscreen
