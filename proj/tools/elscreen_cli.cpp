// Command-line entry point: CSV screening runs, the simulation protocol,
// and an EL-solver benchmark. Every run is reproducible from the recorded
// metadata; all randomness flows from --seed.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elscreen/elscreen.hpp"

namespace {

using nlohmann::json;

json selection_json(const elscreen::SelectionRule& rule) {
    if (rule.kind == elscreen::SelectionRule::Kind::top_d) {
        return {{"rule", "top_d"}, {"d", rule.d}};
    }
    return {{"rule", "threshold"}, {"gamma", rule.gamma}};
}

json report_stats_json(const elscreen::ScreeningReport& report) {
    json j;
    j["bandwidths"] = report.bandwidths;
    json selected = json::array();
    for (const std::size_t idx : report.selected) {
        selected.push_back({{"index", idx}, {"name", report.feature_names[idx]}});
    }
    j["selected"] = selected;
    return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw elscreen::ConfigError("cannot open output file '" + path.string() + "'");
    out << body;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// ===== screen =====

struct ScreenArgs {
    std::string input;
    std::string response = "y";
    std::string index;
    std::string method = "el";
    std::size_t top_d = 20;
    std::string bandwidth = "auto";
    std::string out_dir;
    unsigned threads = 0;
    std::uint64_t seed = 0;
};

int run_screen(const ScreenArgs& args) {
    const elscreen::Method method = elscreen::parse_method(args.method);
    if (method == elscreen::Method::vc_el && args.index.empty()) {
        throw elscreen::ConfigError("method vc_el requires --index (the smoothing variable column)");
    }

    elscreen::LoadOptions opts;
    opts.response_col = args.response;
    opts.index_col = args.index;
    const elscreen::Dataset d = elscreen::load_csv(args.input, opts);

    double fixed_h = 0.0;
    bool fixed_bandwidth = false;
    if (args.bandwidth != "auto") {
        try {
            std::size_t pos = 0;
            fixed_h = std::stod(args.bandwidth, &pos);
            if (pos != args.bandwidth.size()) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            throw elscreen::ConfigError("--bandwidth must be 'auto' or a positive real, got '" +
                                        args.bandwidth + "'");
        }
        if (!(fixed_h > 0.0)) throw elscreen::ConfigError("--bandwidth must be positive");
        fixed_bandwidth = true;
    }

    const elscreen::SelectionRule rule = elscreen::SelectionRule::top_d(args.top_d);
    const std::filesystem::path out_dir(args.out_dir);
    std::filesystem::create_directories(out_dir);

    json meta;
    meta["command"] = "screen";
    meta["version"] = elscreen::kVersion;
    meta["input"] = args.input;
    meta["response"] = args.response;
    if (!args.index.empty()) meta["index"] = args.index;
    meta["method"] = args.method;
    meta["selection"] = selection_json(rule);
    meta["bandwidth"] = args.bandwidth;
    meta["threads"] = args.threads;
    meta["seed"] = args.seed;
    meta["n"] = d.n();
    meta["p"] = d.p();

    elscreen::ScreeningReport report;
    switch (method) {
        case elscreen::Method::el: {
            elscreen::ScreeningConfig cfg;
            cfg.selection = rule;
            cfg.threads = args.threads;
            if (fixed_bandwidth) {
                cfg.kernel.bandwidth = elscreen::BandwidthRule::fixed;
                cfg.kernel.h = fixed_h;
            }
            report = elscreen::screen(d, cfg);
            break;
        }
        case elscreen::Method::vc_el: {
            elscreen::VCConfig cfg;
            cfg.selection = rule;
            cfg.threads = args.threads;
            if (fixed_bandwidth) {
                cfg.kernel_z.bandwidth = elscreen::BandwidthRule::fixed;
                cfg.kernel_z.h = fixed_h;
            }
            report = elscreen::vc_screen(d, cfg);
            break;
        }
        case elscreen::Method::sirs:
        case elscreen::Method::dcsis:
        case elscreen::Method::parametric_el: {
            const elscreen::BaselineKind kind =
                method == elscreen::Method::sirs ? elscreen::BaselineKind::sirs
                : method == elscreen::Method::dcsis ? elscreen::BaselineKind::dcsis
                                                    : elscreen::BaselineKind::parametric_el;
            report = elscreen::baseline_screen(d, kind, rule, args.threads);
            break;
        }
        case elscreen::Method::iterative_el: {
            elscreen::ScreeningConfig scfg;
            scfg.threads = args.threads;
            if (fixed_bandwidth) {
                scfg.kernel.bandwidth = elscreen::BandwidthRule::fixed;
                scfg.kernel.h = fixed_h;
            }
            elscreen::IterativeConfig icfg;
            icfg.per_round_recruit = args.top_d;
            icfg.selector.seed = args.seed;
            const elscreen::IterativeResult result = elscreen::iterative_screen(d, scfg, icfg);
            report = result.first_pass;
            {
                std::ofstream trace(out_dir / "trace.csv");
                if (!trace) throw elscreen::ConfigError("cannot open trace.csv for writing");
                elscreen::write_trace_csv(trace, result);
            }
            json final_set = json::array();
            for (const std::size_t j : result.final_set) {
                final_set.push_back({{"index", j}, {"name", d.feature_names[j]}});
            }
            meta["final_set"] = final_set;
            meta["rounds"] = result.trace.size();
            break;
        }
    }

    elscreen::write_report_csv(report, (out_dir / "report.csv").string());
    meta.update(report_stats_json(report));
    write_json_file(out_dir / "metadata.json", meta);
    std::cout << "wrote " << (out_dir / "report.csv").string() << "\n";
    return 0;
}

// ===== simulate =====

struct SimulateArgs {
    int example = 1;
    std::size_t n = 100;
    std::size_t p = 1000;
    double noise = 1.0;
    std::size_t reps = 100;
    std::string method = "el";
    std::uint64_t seed = 0;
    std::size_t top_d = 20;
    std::string out_dir;
    unsigned threads = 0;
    bool ex2_homogeneous = false;
};

int run_simulate(const SimulateArgs& args) {
    elscreen::SimulationSpec spec;
    spec.example_id = args.example;
    spec.n = args.n;
    spec.p = args.p;
    spec.noise = args.noise;
    spec.reps = args.reps;
    spec.seed = args.seed;
    spec.method = elscreen::parse_method(args.method);
    spec.top_d = args.top_d;
    spec.ex2_homogeneous = args.ex2_homogeneous;

    const elscreen::FrequencyTable table = elscreen::run_experiment(spec, args.threads);

    const std::filesystem::path out_dir(args.out_dir);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(out_dir / "frequency.csv");
        if (!csv) throw elscreen::ConfigError("cannot open frequency.csv for writing");
        elscreen::write_frequency_csv(csv, table);
    }

    json meta;
    meta["command"] = "simulate";
    meta["version"] = elscreen::kVersion;
    meta["example"] = spec.example_id;
    meta["n"] = spec.n;
    meta["p"] = spec.p;
    meta["noise"] = spec.noise;
    meta["reps"] = spec.reps;
    meta["seed"] = spec.seed;
    meta["method"] = args.method;
    meta["top_d"] = spec.top_d;
    meta["threads"] = args.threads;
    meta["ex2_homogeneous"] = spec.ex2_homogeneous;
    meta["active_counts"] = table.active_counts;
    meta["inactive_mean"] = table.inactive_mean;
    meta["runtime_seconds"] = table.runtime_seconds;
    if (spec.example_id == 4) {
        meta["ex4_calibration"] = {{"mean", elscreen::ex4_calibration().mean},
                                   {"sd", elscreen::ex4_calibration().sd}};
    }
    if (spec.example_id == 2 && spec.ex2_homogeneous) {
        meta["ex2_homogeneous_variance"] = elscreen::ex2_homogeneous_variance();
    }
    write_json_file(out_dir / "metadata.json", meta);

    std::cout << "method=" << args.method << " example=" << spec.example_id
              << " counts=" << table.active_counts[0] << '/' << table.active_counts[1] << '/'
              << table.active_counts[2] << '/' << table.active_counts[3]
              << " inactive_mean=" << table.inactive_mean << "\n";
    return 0;
}

// ===== bench-el =====

struct BenchArgs {
    std::size_t n = 12;
    std::size_t reps = 1000;
    std::uint64_t seed = 0;
};

int run_bench(const BenchArgs& args) {
    using clock = std::chrono::steady_clock;
    elscreen::CounterRng rng(args.seed, {0, 0, 7000});
    std::size_t finite_cases = 0, hull_cases = 0, hull_mismatches = 0;
    double max_diff = 0.0;
    double fast_seconds = 0.0, brute_seconds = 0.0;

    for (std::size_t r = 0; r < args.reps; ++r) {
        const std::size_t len = 2 + rng.next_u32() % std::max<std::size_t>(1, args.n - 1);
        std::vector<double> v(len);
        for (double& x : v) x = rng.next_gauss();
        const std::size_t zeros = rng.next_u32() % (len + 1) / 2;
        for (std::size_t k = 0; k < zeros; ++k) v[rng.next_u32() % len] = 0.0;

        const auto t0 = clock::now();
        const elscreen::ElOutcome fast = elscreen::el_logratio(v);
        const auto t1 = clock::now();
        const double brute = elscreen::el_logratio_bruteforce(v);
        const auto t2 = clock::now();
        fast_seconds += std::chrono::duration<double>(t1 - t0).count();
        brute_seconds += std::chrono::duration<double>(t2 - t1).count();

        const bool fast_inf = std::isinf(fast.logratio);
        const bool brute_inf = std::isinf(brute);
        if (fast_inf || brute_inf) {
            ++hull_cases;
            if (fast_inf != brute_inf) ++hull_mismatches;
            continue;
        }
        ++finite_cases;
        max_diff = std::max(max_diff, std::abs(fast.logratio - brute));
    }

    std::cout << "instances: " << args.reps << "\n"
              << "finite cases: " << finite_cases << "\n"
              << "hull (infinite) cases: " << hull_cases << "\n"
              << "hull mismatches: " << hull_mismatches << "\n"
              << "max |fast - bruteforce| on finite cases: " << max_diff << "\n"
              << "solver time: " << fast_seconds << " s, bruteforce time: " << brute_seconds
              << " s\n";
    if (hull_mismatches > 0 || max_diff > 1e-6) {
        std::cerr << "error: solver disagrees with the bruteforce reference\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marginal empirical-likelihood local independence feature screening"};
    app.require_subcommand(1);

    ScreenArgs screen_args;
    CLI::App* screen = app.add_subcommand("screen", "Screen the features of a CSV dataset");
    screen->add_option("--input", screen_args.input, "Input CSV path")->required();
    screen->add_option("--response", screen_args.response, "Response column name");
    screen->add_option("--index", screen_args.index, "Index (smoothing) column name");
    screen->add_option("--method", screen_args.method,
                       "el|vc_el|sirs|dcsis|parametric_el|iterative_el");
    screen->add_option("--top-d", screen_args.top_d, "Number of features to retain");
    screen->add_option("--bandwidth", screen_args.bandwidth, "'auto' or a fixed bandwidth");
    screen->add_option("--out", screen_args.out_dir, "Output directory")->required();
    screen->add_option("--threads", screen_args.threads, "Worker threads (0 = all)");
    screen->add_option("--seed", screen_args.seed, "Seed for seeded sub-procedures");

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "Run the frequency-of-selection protocol");
    simulate->add_option("--example", sim_args.example, "Design 1..5")->required();
    simulate->add_option("--n", sim_args.n, "Sample size per replication")->required();
    simulate->add_option("--p", sim_args.p, "Feature count")->required();
    simulate->add_option("--noise", sim_args.noise, "Noise level (design-specific semantics)");
    simulate->add_option("--reps", sim_args.reps, "Replications")->required();
    simulate->add_option("--method", sim_args.method,
                         "el|vc_el|sirs|dcsis|parametric_el|iterative_el");
    simulate->add_option("--seed", sim_args.seed, "Experiment seed");
    simulate->add_option("--top-d", sim_args.top_d, "Number of features to retain");
    simulate->add_option("--out", sim_args.out_dir, "Output directory")->required();
    simulate->add_option("--threads", sim_args.threads, "Worker threads (0 = all)");
    simulate->add_flag("--ex2-homogeneous", sim_args.ex2_homogeneous,
                       "Example 2: constant-variance comparison arm");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench-el", "EL solver equivalence and timing check");
    bench->add_option("--n", bench_args.n, "Maximum constraint vector length");
    bench->add_option("--reps", bench_args.reps, "Random instances");
    bench->add_option("--seed", bench_args.seed, "Instance generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (screen->parsed()) return run_screen(screen_args);
        if (simulate->parsed()) return run_simulate(sim_args);
        if (bench->parsed()) return run_bench(bench_args);
        return 1;
    } catch (const elscreen::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const elscreen::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const elscreen::DegenerateDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
