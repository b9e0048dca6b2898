#pragma once

// Deterministic generators for the five benchmark simulation designs and
// the frequency-of-selection experiment protocol. Every draw flows from a
// counter-based generator keyed by (seed, example, replication, stream),
// so replications are independent streams and per-feature concurrency can
// never change the data.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "elscreen/baselines.hpp"
#include "elscreen/dataset.hpp"
#include "elscreen/errors.hpp"
#include "elscreen/iterative.hpp"
#include "elscreen/parallel.hpp"
#include "elscreen/rng.hpp"
#include "elscreen/screening.hpp"
#include "elscreen/vc_screening.hpp"

namespace elscreen {

enum class Method { el, sirs, dcsis, parametric_el, vc_el, iterative_el };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::el: return "el";
        case Method::sirs: return "sirs";
        case Method::dcsis: return "dcsis";
        case Method::parametric_el: return "parametric_el";
        case Method::vc_el: return "vc_el";
        case Method::iterative_el: return "iterative_el";
    }
    throw ConfigError("unknown method");
}

inline Method parse_method(const std::string& name) {
    if (name == "el") return Method::el;
    if (name == "sirs") return Method::sirs;
    if (name == "dcsis") return Method::dcsis;
    if (name == "parametric_el") return Method::parametric_el;
    if (name == "vc_el") return Method::vc_el;
    if (name == "iterative_el") return Method::iterative_el;
    throw ConfigError("unknown method '" + name + "'");
}

// Noise semantics per design: examples 1 and 3 read `noise` as the error
// variance, examples 2 and 4 as the multiplier sigma in front of the error
// term, example 5 as the error variance (0.1 in the reference setup).
struct SimulationSpec {
    int example_id = 1;  // 1..5
    std::size_t n = 100;
    std::size_t p = 1000;
    double noise = 1.0;
    std::size_t reps = 100;
    std::uint64_t seed = 0;
    Method method = Method::el;
    std::size_t top_d = 20;
    bool ex2_homogeneous = false;  // example 2 only: constant-variance arm
};

struct FrequencyTable {
    SimulationSpec spec;
    std::array<std::size_t, 4> active_counts{};  // selections of x1..x4 across reps
    double inactive_mean = 0.0;                  // mean selection count over features 5..p
    double runtime_seconds = 0.0;
};

// ===== Design formulas =====

inline double ex1_g1(double x) { return x; }
inline double ex1_g2(double x) { return (2.0 * x - 1.0) * (2.0 * x - 1.0); }
inline double ex1_g3(double x) {
    const double s = std::sin(2.0 * 3.14159265358979323846 * x);
    return s / (2.0 - s);
}
inline double ex1_g4(double x) {
    const double t = 2.0 * 3.14159265358979323846 * x;
    const double s = std::sin(t), c = std::cos(t);
    return 0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c * c * c + 0.5 * s * s * s;
}

inline double ex2_h1(double x) { return (2.0 * x - 1.0) * (2.0 * x - 1.0); }
inline double ex2_h2(double x) {
    const double t = 2.0 * 3.14159265358979323846 * x;
    return std::cos(t) / (2.0 + std::sin(t));
}
inline double ex2_h3(double x) {
    const double t = 2.0 * 3.14159265358979323846 * x;
    return std::cos(t) / (2.0 - std::cos(t));
}
inline double ex2_h4(double x) {
    return std::cos((2.0 * x - 1.0) * 3.14159265358979323846);
}

// Varying coefficients of example 5; j is 1-based.
inline double ex5_beta(int j, double z) {
    constexpr double kPi = 3.14159265358979323846;
    switch (j) {
        case 1: return std::sin(2.0 * kPi * z + kPi / 4.0);
        case 2: return std::sin(2.0 * kPi * z);
        case 3: return std::cos(2.0 * kPi * z);
        case 4: return std::sin(2.0 * kPi * z + 3.0 * kPi / 4.0);
        default: return 0.0;
    }
}

// ===== Monte Carlo calibrations (cached, fixed internal seed) =====

namespace detail {

constexpr std::uint64_t kCalibrationSeed = 0x6b43616cull;
constexpr std::size_t kCalibrationDraws = 1000000;

inline double ex4_bump(double x1, double x2, double x3, double x4) {
    return std::exp(-0.5 * (x1 * x1 / 0.64 + x2 * x2 / 0.81 + x3 * x3 + x4 * x4 / 1.21));
}

struct BumpCalibration {
    double mean = 0.0;
    double sd = 1.0;
};

}  // namespace detail

// Mean and sd of the example-4 Gaussian bump, estimated once by Monte
// Carlo with a fixed internal seed and cached for the process lifetime.
inline const detail::BumpCalibration& ex4_calibration() {
    static const detail::BumpCalibration cal = [] {
        CounterRng rng(detail::kCalibrationSeed, {0, 0, 9000});
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i = 0; i < detail::kCalibrationDraws; ++i) {
            const double b = detail::ex4_bump(rng.next_gauss(), rng.next_gauss(),
                                              rng.next_gauss(), rng.next_gauss());
            sum += b;
            sum_sq += b * b;
        }
        const double n = static_cast<double>(detail::kCalibrationDraws);
        detail::BumpCalibration c;
        c.mean = sum / n;
        c.sd = std::sqrt(std::max(0.0, sum_sq / n - c.mean * c.mean));
        return c;
    }();
    return cal;
}

// E[4 / (X1^2 + ... + X4^2)] for Unif(0,1) covariates: the error variance
// of example 2's constant-variance comparison arm, matched in total power
// to the heterogeneous arm.
inline double ex2_homogeneous_variance() {
    static const double var = [] {
        CounterRng rng(detail::kCalibrationSeed, {0, 0, 9001});
        double sum = 0.0;
        for (std::size_t i = 0; i < detail::kCalibrationDraws; ++i) {
            double ss = 0.0;
            for (int k = 0; k < 4; ++k) {
                const double u = rng.next_uniform();
                ss += u * u;
            }
            sum += 4.0 / ss;
        }
        return sum / static_cast<double>(detail::kCalibrationDraws);
    }();
    return var;
}

// ===== Generators =====

namespace detail {

inline void validate_spec(const SimulationSpec& spec) {
    if (spec.example_id < 1 || spec.example_id > 5) {
        throw ConfigError("example_id must be in 1..5");
    }
    if (spec.n < 10) throw ConfigError("n must be >= 10");
    if (spec.p < 5) throw ConfigError("p must be >= 5");
    if (spec.reps < 1) throw ConfigError("reps must be >= 1");
    if (!(spec.noise >= 0.0)) throw ConfigError("noise must be >= 0");
    if (spec.top_d < 1) throw ConfigError("top_d must be >= 1");
}

// Stream layout per (seed, example, replication): stream 1 feeds the error
// term, stream 2 the shared latent draw (example 3's common factor,
// example 5's index variable), stream 1000+j column j (1-based).
constexpr std::uint32_t kNoiseStream = 1;
constexpr std::uint32_t kLatentStream = 2;
constexpr std::uint32_t kColumnStreamBase = 1000;

inline CounterRng stream_rng(const SimulationSpec& spec, std::uint64_t rep,
                             std::uint32_t stream) {
    return CounterRng(spec.seed, {static_cast<std::uint32_t>(spec.example_id),
                                  static_cast<std::uint32_t>(rep), stream});
}

}  // namespace detail

// One replication's dataset. The response is centered by its sample mean.
inline Dataset gen_example(const SimulationSpec& spec, std::uint64_t rep_index) {
    detail::validate_spec(spec);
    const std::size_t n = spec.n;
    const std::size_t p = spec.p;

    Dataset d;
    d.x.assign(p, std::vector<double>(n));
    d.y.assign(n, 0.0);
    d.feature_names.resize(p);
    for (std::size_t j = 0; j < p; ++j) d.feature_names[j] = "x" + std::to_string(j + 1);

    const auto column_rng = [&](std::size_t j) {  // j is 0-based
        return detail::stream_rng(spec, rep_index,
                                  detail::kColumnStreamBase + static_cast<std::uint32_t>(j) + 1);
    };
    CounterRng noise_rng = detail::stream_rng(spec, rep_index, detail::kNoiseStream);

    switch (spec.example_id) {
        case 1: {
            for (std::size_t j = 0; j < p; ++j) {
                CounterRng rng = column_rng(j);
                for (std::size_t i = 0; i < n; ++i) d.x[j][i] = rng.next_uniform();
            }
            const double sd = std::sqrt(spec.noise);
            for (std::size_t i = 0; i < n; ++i) {
                d.y[i] = 5.0 * ex1_g1(d.x[0][i]) + 3.0 * ex1_g2(d.x[1][i]) +
                         4.0 * ex1_g3(d.x[2][i]) + 6.0 * ex1_g4(d.x[3][i]) +
                         sd * noise_rng.next_gauss();
            }
            break;
        }
        case 2: {
            for (std::size_t j = 0; j < p; ++j) {
                CounterRng rng = column_rng(j);
                for (std::size_t i = 0; i < n; ++i) d.x[j][i] = rng.next_uniform();
            }
            const double hom_sd = spec.ex2_homogeneous ? std::sqrt(ex2_homogeneous_variance()) : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double eps_sd = hom_sd;
                if (!spec.ex2_homogeneous) {
                    const double ss = d.x[0][i] * d.x[0][i] + d.x[1][i] * d.x[1][i] +
                                      d.x[2][i] * d.x[2][i] + d.x[3][i] * d.x[3][i];
                    eps_sd = std::sqrt(4.0 / ss);
                }
                d.y[i] = -3.0 * ex2_h1(d.x[0][i]) + 2.5 * ex2_h2(d.x[1][i]) -
                         2.0 * ex2_h3(d.x[2][i]) + 1.5 * ex2_h4(d.x[3][i]) +
                         spec.noise * eps_sd * noise_rng.next_gauss();
            }
            break;
        }
        case 3: {
            // Exact factorization of the target covariance: with U and V_j
            // independent standard normals, X4 = U and X_j = (U + V_j)/sqrt(2)
            // give var 1, cov(X_j, X4) = 1/sqrt(2), cov(X_j, X_j') = 1/2.
            std::vector<double> u(n);
            CounterRng latent = detail::stream_rng(spec, rep_index, detail::kLatentStream);
            for (std::size_t i = 0; i < n; ++i) u[i] = latent.next_gauss();
            const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
            for (std::size_t j = 0; j < p; ++j) {
                if (j == 3) {
                    d.x[j] = u;
                    continue;
                }
                CounterRng rng = column_rng(j);
                for (std::size_t i = 0; i < n; ++i) {
                    d.x[j][i] = (u[i] + rng.next_gauss()) * inv_sqrt2;
                }
            }
            const double b4 = -3.0 * std::sqrt(2.0);
            const double sd = std::sqrt(spec.noise);
            for (std::size_t i = 0; i < n; ++i) {
                d.y[i] = 2.0 * d.x[0][i] + 2.0 * d.x[1][i] + 2.0 * d.x[2][i] + b4 * d.x[3][i] +
                         sd * noise_rng.next_gauss();
            }
            break;
        }
        case 4: {
            for (std::size_t j = 0; j < p; ++j) {
                CounterRng rng = column_rng(j);
                for (std::size_t i = 0; i < n; ++i) d.x[j][i] = rng.next_gauss();
            }
            const detail::BumpCalibration& cal = ex4_calibration();
            for (std::size_t i = 0; i < n; ++i) {
                const double bump =
                    detail::ex4_bump(d.x[0][i], d.x[1][i], d.x[2][i], d.x[3][i]);
                d.y[i] = (bump - cal.mean) / cal.sd + spec.noise * noise_rng.next_gauss();
            }
            break;
        }
        case 5: {
            std::vector<double> z(n);
            CounterRng latent = detail::stream_rng(spec, rep_index, detail::kLatentStream);
            for (std::size_t i = 0; i < n; ++i) z[i] = latent.next_uniform();
            for (std::size_t j = 0; j < p; ++j) {
                CounterRng rng = column_rng(j);
                for (std::size_t i = 0; i < n; ++i) d.x[j][i] = rng.next_gauss();
            }
            const double sd = std::sqrt(spec.noise);
            for (std::size_t i = 0; i < n; ++i) {
                d.y[i] = d.x[0][i] * ex5_beta(1, z[i]) + d.x[1][i] * ex5_beta(2, z[i]) +
                         d.x[2][i] * ex5_beta(3, z[i]) + d.x[3][i] * ex5_beta(4, z[i]) +
                         sd * noise_rng.next_gauss();
            }
            d.z = std::move(z);
            break;
        }
        default:
            throw ConfigError("example_id must be in 1..5");
    }

    double mean = 0.0;
    for (const double v : d.y) mean += v;
    mean /= static_cast<double>(n);
    for (double& v : d.y) v -= mean;
    return d;
}

// ===== Experiment protocol =====

namespace detail {

inline std::vector<std::size_t> run_method(const Dataset& d, const SimulationSpec& spec,
                                           std::uint64_t rep) {
    const SelectionRule rule = SelectionRule::top_d(spec.top_d);
    switch (spec.method) {
        case Method::el: {
            ScreeningConfig cfg;
            cfg.selection = rule;
            cfg.threads = 1;
            return screen(d, cfg).selected;
        }
        case Method::sirs:
        case Method::dcsis:
        case Method::parametric_el: {
            const BaselineKind kind = spec.method == Method::sirs ? BaselineKind::sirs
                                      : spec.method == Method::dcsis ? BaselineKind::dcsis
                                                                     : BaselineKind::parametric_el;
            return baseline_screen(d, kind, rule, 1).selected;
        }
        case Method::vc_el: {
            VCConfig cfg;
            cfg.selection = rule;
            cfg.threads = 1;
            return vc_screen(d, cfg).selected;
        }
        case Method::iterative_el: {
            ScreeningConfig scfg;
            scfg.threads = 1;
            IterativeConfig icfg;
            icfg.per_round_recruit = spec.top_d;
            icfg.selector.seed = spec.seed ^ (0x9E3779B97F4A7C15ull * (rep + 1));
            return iterative_screen(d, scfg, icfg).final_set;
        }
    }
    throw ConfigError("unknown method");
}

}  // namespace detail

// Runs the full protocol: generate each replication, screen it, and count
// how often each active feature (x1..x4) lands in the selected set, plus
// the mean selection count over the inactive features. Replications run
// concurrently; a failing replication aborts the experiment with its index
// attached.
inline FrequencyTable run_experiment(const SimulationSpec& spec, unsigned threads = 0) {
    detail::validate_spec(spec);
    if (spec.method == Method::vc_el && spec.example_id != 5) {
        throw ConfigError("vc_el requires example 5 (the design with an index variable)");
    }
    const auto start = std::chrono::steady_clock::now();

    std::vector<std::vector<std::size_t>> picks(spec.reps);
    parallel_for(spec.reps, threads, [&](std::size_t rep) {
        try {
            const Dataset d = gen_example(spec, rep);
            picks[rep] = detail::run_method(d, spec, rep);
        } catch (const ConfigError& e) {
            throw ConfigError("rep " + std::to_string(rep) + ": " + e.what());
        } catch (const std::exception& e) {
            throw NumericError("rep " + std::to_string(rep) + ": " + e.what());
        }
    });

    FrequencyTable table;
    table.spec = spec;
    std::size_t inactive_total = 0;
    for (const auto& selected : picks) {
        for (const std::size_t j : selected) {
            if (j < 4) {
                ++table.active_counts[j];
            } else {
                ++inactive_total;
            }
        }
    }
    const std::size_t inactive_features = spec.p - 4;
    table.inactive_mean =
        static_cast<double>(inactive_total) / static_cast<double>(inactive_features);
    table.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return table;
}

inline void write_frequency_csv(std::ostream& out, const FrequencyTable& table) {
    const std::string prefix = method_name(table.spec.method) + ',' +
                               std::to_string(table.spec.example_id) + ',' +
                               std::to_string(table.spec.n) + ',' +
                               std::to_string(table.spec.p) + ',' +
                               detail::format_double(table.spec.noise) + ',';
    out << "method,example,n,p,noise,feature,count\n";
    for (std::size_t k = 0; k < 4; ++k) {
        out << prefix << 'x' << (k + 1) << ',' << table.active_counts[k] << '\n';
    }
    out << prefix << "__inactive_mean__," << detail::format_double(table.inactive_mean) << '\n';
}

}  // namespace elscreen
