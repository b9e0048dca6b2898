#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "elscreen/errors.hpp"
#include "elscreen/kernel.hpp"
#include "elscreen/rng.hpp"

using namespace elscreen;

namespace {

std::vector<double> random_uniform(CounterRng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.next_uniform();
    return v;
}

std::vector<double> random_normal(CounterRng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.next_gauss();
    return v;
}

}  // namespace

// ===== Kernel evaluation =====

TEST_CASE("kernel values at pinned points") {
    CHECK(kernel_eval(KernelFamily::epanechnikov, 0.0) == 0.75);
    CHECK(kernel_eval(KernelFamily::epanechnikov, 1.5) == 0.0);
    CHECK(kernel_eval(KernelFamily::epanechnikov, -1.5) == 0.0);
    CHECK(kernel_eval(KernelFamily::epanechnikov, 0.5) == 0.5625);
    CHECK_THAT(kernel_eval(KernelFamily::gaussian, 0.0),
               Catch::Matchers::WithinAbs(0.39894228040143268, 1e-15));
    CHECK(kernel_eval(KernelFamily::gaussian, 2.0) ==
          kernel_eval(KernelFamily::gaussian, -2.0));
}

TEST_CASE("compact kernel integrates to one") {
    // Simpson's rule over [-1, 1].
    const int panels = 2000;
    const double h = 2.0 / panels;
    double acc = kernel_eval(KernelFamily::epanechnikov, -1.0) +
                 kernel_eval(KernelFamily::epanechnikov, 1.0);
    for (int k = 1; k < panels; ++k) {
        const double u = -1.0 + h * k;
        acc += (k % 2 == 1 ? 4.0 : 2.0) * kernel_eval(KernelFamily::epanechnikov, u);
    }
    acc *= h / 3.0;
    CHECK_THAT(acc, Catch::Matchers::WithinAbs(1.0, 1e-6));
}

// ===== Nadaraya-Watson =====

TEST_CASE("smoother reproduces a constant response") {
    KernelConfig cfg;
    const std::vector<double> x{0.0, 0.3, 0.7, 1.0};
    const std::vector<double> y(4, 2.5);
    for (const double x0 : {0.1, 0.5, 0.9}) {
        CHECK_THAT(nw_estimate(x, y, 0.5, x0, cfg),
                   Catch::Matchers::WithinAbs(2.5, 1e-12));
    }
}

TEST_CASE("smoother at the symmetric middle point") {
    KernelConfig cfg;
    const std::vector<double> x{0.0, 0.5, 1.0};
    const std::vector<double> y{0.0, 1.0, 2.0};
    CHECK_THAT(nw_estimate(x, y, 0.6, 0.5, cfg),
               Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("smoother is undefined when every weight vanishes") {
    KernelConfig cfg;
    const std::vector<double> x{0.0, 1.0};
    const std::vector<double> y{3.0, 7.0};
    CHECK(std::isnan(nw_estimate(x, y, 0.4, 0.5, cfg)));
}

TEST_CASE("smoother rejects nonpositive bandwidths") {
    KernelConfig cfg;
    const std::vector<double> x{0.0, 1.0};
    const std::vector<double> y{1.0, 2.0};
    CHECK_THROWS_AS(nw_estimate(x, y, 0.0, 0.5, cfg), ConfigError);
    CHECK_THROWS_AS(nw_estimate(x, y, -1.0, 0.5, cfg), ConfigError);
}

TEST_CASE("smoother stays within the local response range") {
    CounterRng rng(50, {0, 0, 10});
    for (const KernelFamily family : {KernelFamily::epanechnikov, KernelFamily::gaussian}) {
        KernelConfig cfg;
        cfg.family = family;
        for (int rep = 0; rep < 40; ++rep) {
            const std::vector<double> x = random_uniform(rng, 30);
            const std::vector<double> y = random_normal(rng, 30);
            const double h = 0.05 + 0.4 * rng.next_uniform();
            const double x0 = rng.next_uniform();
            const double fit = nw_estimate(x, y, h, x0, cfg);
            if (std::isnan(fit)) continue;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (kernel_eval(family, (x[i] - x0) / h) > 0.0) {
                    lo = std::min(lo, y[i]);
                    hi = std::max(hi, y[i]);
                }
            }
            CHECK(fit >= lo - 1e-12);
            CHECK(fit <= hi + 1e-12);
        }
    }
}

TEST_CASE("smoother is linear in the response") {
    CounterRng rng(51, {0, 0, 11});
    KernelConfig cfg;
    const std::vector<double> x = random_uniform(rng, 40);
    const std::vector<double> y = random_normal(rng, 40);
    const std::vector<double> w = random_normal(rng, 40);
    for (int rep = 0; rep < 20; ++rep) {
        const double a = 2.0 * rng.next_gauss();
        const double b = 2.0 * rng.next_gauss();
        const double x0 = rng.next_uniform();
        std::vector<double> combo(40);
        for (std::size_t i = 0; i < 40; ++i) combo[i] = a * y[i] + b * w[i];
        const double lhs = nw_estimate(x, combo, 0.3, x0, cfg);
        const double rhs = a * nw_estimate(x, y, 0.3, x0, cfg) +
                           b * nw_estimate(x, w, 0.3, x0, cfg);
        CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-10));
    }
}

// ===== Reference-rule bandwidth =====

TEST_CASE("plug-in bandwidth tracks the normal formula") {
    CounterRng rng(52, {0, 0, 12});
    const std::vector<double> x = random_normal(rng, 100);
    const double h = reference_rule_bandwidth(x);
    const double nominal = 1.06 * std::pow(100.0, -0.2);
    CHECK(h > 0.8 * nominal);
    CHECK(h < 1.2 * nominal);
}

TEST_CASE("plug-in bandwidth rejects constant columns") {
    const std::vector<double> x(10, 3.0);
    CHECK_THROWS_AS(reference_rule_bandwidth(x), DegenerateDataError);
    CHECK_THROWS_AS(reference_rule_bandwidth(std::vector<double>{1.0}),
                    DegenerateDataError);
}

TEST_CASE("plug-in bandwidth is scale equivariant") {
    CounterRng rng(53, {0, 0, 13});
    const std::vector<double> x = random_normal(rng, 60);
    std::vector<double> doubled(x);
    for (double& v : doubled) v *= 2.0;
    const double h1 = reference_rule_bandwidth(x);
    const double h2 = reference_rule_bandwidth(doubled);
    CHECK_THAT(h2, Catch::Matchers::WithinRel(2.0 * h1, 1e-12));
}

// ===== Cross-validated bandwidth =====

TEST_CASE("smooth signal selects an interior bandwidth") {
    CounterRng rng(54, {0, 0, 14});
    const std::size_t n = 150;
    const std::vector<double> x = random_uniform(rng, n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::sin(4.0 * x[i]) + 0.08 * rng.next_gauss();
    }
    KernelConfig cfg;
    const double h = loo_cv_bandwidth(x, y, cfg);
    const double pilot = reference_rule_bandwidth(x);
    CHECK(h > cfg.cv_span_lo * pilot * 1.0001);
    CHECK(h < cfg.cv_span_hi * pilot * 0.9999);
}

TEST_CASE("pure noise pushes the bandwidth to the smooth end") {
    CounterRng rng(55, {0, 0, 15});
    const std::size_t n = 150;
    const std::vector<double> x = random_uniform(rng, n);
    std::vector<double> y = random_normal(rng, n);
    double mean = 0.0;
    for (const double v : y) mean += v;
    for (double& v : y) v -= mean / static_cast<double>(n);
    KernelConfig cfg;
    const double h = loo_cv_bandwidth(x, y, cfg);
    // At or near the top of the grid: within the last three grid points.
    const double pilot = reference_rule_bandwidth(x);
    const double log_lo = std::log(cfg.cv_span_lo * pilot);
    const double log_hi = std::log(cfg.cv_span_hi * pilot);
    const double cutoff =
        std::exp(log_lo + (log_hi - log_lo) * 16.0 / 19.0);
    CHECK(h >= cutoff * 0.999);
}

TEST_CASE("single-point grid returns its one point") {
    CounterRng rng(56, {0, 0, 16});
    const std::vector<double> x = random_uniform(rng, 30);
    const std::vector<double> y = random_normal(rng, 30);
    KernelConfig cfg;
    cfg.cv_grid_size = 1;
    cfg.cv_span_lo = 0.7;
    cfg.cv_span_hi = 0.7;
    const double h = loo_cv_bandwidth(x, y, cfg);
    CHECK_THAT(h, Catch::Matchers::WithinRel(0.7 * reference_rule_bandwidth(x), 1e-12));
}

TEST_CASE("bandwidth choice ignores response shifts under full support") {
    CounterRng rng(57, {0, 0, 17});
    const std::size_t n = 80;
    const std::vector<double> x = random_uniform(rng, n);
    std::vector<double> y(n), shifted(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::sin(5.0 * x[i]) + 0.1 * rng.next_gauss();
        shifted[i] = y[i] + 10.0;
    }
    KernelConfig cfg;
    cfg.family = KernelFamily::gaussian;  // every leave-one-out denominator positive
    CHECK(loo_cv_bandwidth(x, y, cfg) == loo_cv_bandwidth(x, shifted, cfg));
}

TEST_CASE("windowed CV error matches the full scan") {
    CounterRng rng(58, {0, 0, 18});
    const std::size_t n = 120;
    std::vector<double> x = random_uniform(rng, n);
    std::vector<double> y = random_normal(rng, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> sx(n), sy(n);
    for (std::size_t k = 0; k < n; ++k) {
        sx[k] = x[order[k]];
        sy[k] = y[order[k]];
    }
    for (const double h : {0.01, 0.05, 0.2, 0.8}) {
        const double naive =
            elscreen::detail::loo_cv_error(x, y, KernelFamily::epanechnikov, h);
        const double windowed = elscreen::detail::loo_cv_error_window(sx, sy, h);
        CHECK_THAT(windowed, Catch::Matchers::WithinRel(naive, 1e-9));
    }
}

TEST_CASE("cross-validation validates its configuration") {
    const std::vector<double> x{0.1, 0.5, 0.9};
    const std::vector<double> y{1.0, 2.0, 3.0};
    KernelConfig cfg;
    cfg.cv_grid_size = 0;
    CHECK_THROWS_AS(loo_cv_bandwidth(x, y, cfg), ConfigError);
    cfg = KernelConfig{};
    cfg.cv_span_lo = -1.0;
    CHECK_THROWS_AS(loo_cv_bandwidth(x, y, cfg), ConfigError);
    cfg = KernelConfig{};
    cfg.cv_span_lo = 2.0;
    cfg.cv_span_hi = 1.0;
    CHECK_THROWS_AS(loo_cv_bandwidth(x, y, cfg), ConfigError);
    CHECK_THROWS_AS(
        loo_cv_bandwidth(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0},
                         KernelConfig{}),
        DegenerateDataError);
}

TEST_CASE("bandwidth resolution honors the configured rule") {
    CounterRng rng(59, {0, 0, 19});
    const std::vector<double> x = random_uniform(rng, 50);
    const std::vector<double> y = random_normal(rng, 50);
    KernelConfig cfg;
    cfg.bandwidth = BandwidthRule::fixed;
    cfg.h = 0.37;
    CHECK(resolve_bandwidth(x, y, cfg) == 0.37);
    cfg.h = 0.0;
    CHECK_THROWS_AS(resolve_bandwidth(x, y, cfg), ConfigError);
    cfg.bandwidth = BandwidthRule::reference_rule;
    CHECK(resolve_bandwidth(x, y, cfg) == reference_rule_bandwidth(x));
    cfg.bandwidth = BandwidthRule::loo_cv;
    CHECK(resolve_bandwidth(x, y, cfg) == loo_cv_bandwidth(x, y, cfg));
}
