#pragma once

// Iterative screening: alternate between (a) marginal screening of the
// not-yet-selected features, residualized on the current selection, and
// (b) a sparse additive refit over the enlarged candidate set. Recovers
// predictors that are marginally independent of the response but relevant
// jointly with others.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elscreen/dataset.hpp"
#include "elscreen/errors.hpp"
#include "elscreen/parallel.hpp"
#include "elscreen/report.hpp"
#include "elscreen/screening.hpp"
#include "elscreen/sparse_additive.hpp"

namespace elscreen {

struct IterativeConfig {
    std::size_t per_round_recruit = 0;  // 0 = automatic: min(20, round(n / log n))
    std::size_t max_total = 0;          // stop once the selected set reaches this; 0 = 2x recruit
    int max_rounds = 10;
    SparseAdditiveConfig selector;
};

struct IterativeRound {
    int round = 0;
    std::vector<std::size_t> recruited;  // ascending feature indices screened in
    std::vector<std::size_t> selected;   // ascending selected set after the refit
    bool anti_stall = false;             // selector came back empty; forced top recruit
};

struct IterativeResult {
    std::vector<std::size_t> final_set;  // ascending
    std::vector<IterativeRound> trace;
    ScreeningReport first_pass;          // round-1 marginal screen
};

// ===== Residualization =====

// Ordinary-least-squares residual of xj on [1, x_selected]; rank-deficient
// designs are handled by the minimum-norm solution.
inline std::vector<double> residualize_feature(std::span<const double> xj,
                                               const std::vector<std::vector<double>>& x_selected) {
    if (x_selected.empty()) throw ConfigError("residualize_feature needs at least one column");
    const std::size_t n = xj.size();
    Eigen::MatrixXd a(n, x_selected.size() + 1);
    a.col(0).setOnes();
    for (std::size_t k = 0; k < x_selected.size(); ++k) {
        if (x_selected[k].size() != n) {
            throw ConfigError("residualize_feature: column length mismatch");
        }
        for (std::size_t i = 0; i < n; ++i) a(i, k + 1) = x_selected[k][i];
    }
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) b(i) = xj[i];
    const Eigen::VectorXd fitted = a * a.completeOrthogonalDecomposition().solve(b);
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = xj[i] - fitted(i);
    return residual;
}

namespace detail {

inline std::size_t resolve_recruit_count(std::size_t configured, std::size_t n) {
    if (configured > 0) return configured;
    const double auto_r = std::round(static_cast<double>(n) / std::log(static_cast<double>(n)));
    return std::min<std::size_t>(20, std::max<std::size_t>(1, static_cast<std::size_t>(auto_r)));
}

// Selector run over a candidate subset; returns retained global indices
// (ascending) trimmed to max_total by coefficient-group norm.
inline std::vector<std::size_t> select_subset(const Dataset& d,
                                              const std::vector<std::size_t>& candidates,
                                              const SparseAdditiveConfig& cfg,
                                              std::size_t max_total) {
    Dataset sub;
    sub.y = d.y;
    sub.x.reserve(candidates.size());
    sub.feature_names.reserve(candidates.size());
    for (const std::size_t j : candidates) {
        sub.x.push_back(d.x[j]);
        sub.feature_names.push_back(d.feature_names.empty() ? "x" + std::to_string(j + 1)
                                                            : d.feature_names[j]);
    }
    const SparseAdditiveFit fit = fit_sparse_additive(sub, cfg);
    std::vector<std::size_t> kept = fit.retained;
    if (kept.size() > max_total) {
        std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
            return fit.group_norms[a] > fit.group_norms[b];
        });
        kept.resize(max_total);
        std::sort(kept.begin(), kept.end());
    }
    std::vector<std::size_t> global;
    global.reserve(kept.size());
    for (const std::size_t local : kept) global.push_back(candidates[local]);
    return global;
}

}  // namespace detail

// Runs the iterative loop: screen, refit, residualize, repeat until the
// selected set stops changing, reaches max_total, or max_rounds passes.
inline IterativeResult iterative_screen(const Dataset& d, const ScreeningConfig& scfg,
                                        const IterativeConfig& icfg) {
    const std::size_t n = d.n();
    const std::size_t p = d.p();
    const std::size_t recruit_n = detail::resolve_recruit_count(icfg.per_round_recruit, n);
    if (recruit_n < 1) throw ConfigError("per_round_recruit must be >= 1");
    const std::size_t max_total = icfg.max_total > 0 ? icfg.max_total : 2 * recruit_n;
    if (max_total < recruit_n) throw ConfigError("max_total must be >= per_round_recruit");
    if (icfg.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");

    IterativeResult result;

    // ----- round 1: plain marginal screen, then the first refit -----
    ScreeningConfig pass_cfg = scfg;
    pass_cfg.selection = SelectionRule::top_d(recruit_n);
    result.first_pass = screen(d, pass_cfg);

    std::vector<std::size_t> recruits = result.first_pass.selected;
    std::size_t top_recruit = 0;
    for (std::size_t j = 0; j < p; ++j) {
        if (result.first_pass.ranks[j] == 1) top_recruit = j;
    }

    std::vector<std::size_t> current;
    {
        IterativeRound round;
        round.round = 1;
        round.recruited = recruits;
        current = detail::select_subset(d, recruits, icfg.selector, max_total);
        if (current.empty()) {
            round.anti_stall = true;
            current = {top_recruit};
        }
        round.selected = current;
        result.trace.push_back(std::move(round));
    }

    // ----- rounds 2..max_rounds: residualized screen + refit -----
    for (int r = 2; r <= icfg.max_rounds && current.size() < max_total; ++r) {
        std::vector<std::size_t> pool;
        pool.reserve(p - current.size());
        for (std::size_t j = 0; j < p; ++j) {
            if (!std::binary_search(current.begin(), current.end(), j)) pool.push_back(j);
        }
        if (pool.empty()) break;

        // Shared decomposition of [1, x_current] for every residualization.
        Eigen::MatrixXd a(n, current.size() + 1);
        a.col(0).setOnes();
        for (std::size_t k = 0; k < current.size(); ++k) {
            for (std::size_t i = 0; i < n; ++i) a(i, k + 1) = d.x[current[k]][i];
        }
        const auto cod = a.completeOrthogonalDecomposition();
        std::vector<std::vector<double>> residuals(pool.size());
        for (std::size_t k = 0; k < pool.size(); ++k) {
            Eigen::VectorXd b(n);
            for (std::size_t i = 0; i < n; ++i) b(i) = d.x[pool[k]][i];
            const Eigen::VectorXd fitted = a * cod.solve(b);
            residuals[k].resize(n);
            for (std::size_t i = 0; i < n; ++i) residuals[k][i] = b(i) - fitted(i);
        }

        std::vector<double> stats(pool.size(), 0.0);
        parallel_for(pool.size(), scfg.threads, [&](std::size_t k) {
            try {
                stats[k] = feature_stat(residuals[k], d.y, scfg).stat;
            } catch (const std::exception&) {
                stats[k] = 0.0;
            }
        });

        std::vector<std::size_t> order(pool.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a2, std::size_t b2) {
            if (stats[a2] != stats[b2]) return stats[a2] > stats[b2];
            return pool[a2] < pool[b2];
        });
        const std::size_t take = std::min(recruit_n, pool.size());
        std::vector<std::size_t> recruited;
        recruited.reserve(take);
        for (std::size_t k = 0; k < take; ++k) recruited.push_back(pool[order[k]]);
        const std::size_t top_new = recruited.empty() ? 0 : pool[order[0]];
        std::sort(recruited.begin(), recruited.end());

        std::vector<std::size_t> candidates = current;
        candidates.insert(candidates.end(), recruited.begin(), recruited.end());
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        IterativeRound round;
        round.round = r;
        round.recruited = recruited;
        std::vector<std::size_t> next =
            detail::select_subset(d, candidates, icfg.selector, max_total);
        if (next.empty()) {
            round.anti_stall = true;
            next = current;
            if (!std::binary_search(next.begin(), next.end(), top_new)) {
                next.push_back(top_new);
                std::sort(next.begin(), next.end());
            }
        }
        round.selected = next;
        result.trace.push_back(std::move(round));

        const bool fixed_point = next == current;
        current = std::move(next);
        if (fixed_point) break;
    }

    result.final_set = current;
    return result;
}

// ===== Trace serialization =====

inline void write_trace_csv(std::ostream& out, const IterativeResult& result) {
    const auto join = [](const std::vector<std::size_t>& v) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (k > 0) s += ';';
            s += std::to_string(v[k]);
        }
        return s;
    };
    out << "round,phase,features\n";
    for (const IterativeRound& round : result.trace) {
        out << round.round << ",recruit," << join(round.recruited) << '\n';
        out << round.round << ",select," << join(round.selected) << '\n';
    }
}

}  // namespace elscreen
