#include "brw/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "brw/errors.hpp"
#include "brw/experiments.hpp"
#include "brw/serialize.hpp"
#include "brw/spectral.hpp"
#include "brw/stats.hpp"
#include "brw/verify.hpp"

namespace brw {

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("BRW_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

void write_output(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") {
        std::cout << content;
        return;
    }
    std::ofstream file(out, std::ios::binary);
    if (!file) throw guard_error("cannot open output file " + out);
    file << content;
}

struct SimulateArgs {
    std::string kernel = "single_flip";
    int n_bits = 10;
    int k = 1;
    int c = 2;
    std::string mode = "simple";
    double p = 0.5;
    double p_stay = 0.5;
    int steps = 10;
    int replicas = 1;
    std::uint64_t seed = default_seed();
    std::uint64_t complete_n = 1024;
    std::uint64_t half = 512;
    std::optional<std::uint64_t> target;
    std::optional<int> threshold;
    std::optional<int> snapshot_every;
    std::vector<std::uint64_t> start;
    std::string config_path;
    std::string out = "-";
    std::string format = "json";
};

KernelSpec kernel_from_args(const SimulateArgs& a) {
    if (a.kernel == "single_flip") return KernelSpec::single_flip(a.n_bits);
    if (a.kernel == "power") return KernelSpec::power(a.n_bits, a.k);
    if (a.kernel == "mixture") return KernelSpec::mixture(a.n_bits, a.k);
    if (a.kernel == "lazy") {
        KernelSpec base = a.k > 1 ? KernelSpec::mixture(a.n_bits, a.k)
                                  : KernelSpec::single_flip(a.n_bits);
        return KernelSpec::lazy(a.p_stay, std::move(base));
    }
    if (a.kernel == "complete") return KernelSpec::complete(a.complete_n);
    if (a.kernel == "complete_bipartite") return KernelSpec::complete_bipartite(a.half);
    throw usage_error("simulate: unknown kernel '" + a.kernel + "'");
}

int cmd_simulate(const SimulateArgs& args, const CLI::App& cmd) {
    SimConfig config;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw usage_error("simulate: cannot read config " + args.config_path);
        nlohmann::json j;
        in >> j;
        config = sim_config_from_json(j);
    } else {
        config.kernel = kernel_from_args(args);
    }
    // explicit flags win over the config file
    auto passed = [&](const std::string& flag) { return cmd.count(flag) > 0; };
    if (args.config_path.empty() || passed("--mode")) config.mode = mode_from_name(args.mode);
    if (args.config_path.empty() || passed("--c")) config.c = args.c;
    if (args.config_path.empty() || passed("--p")) config.p = args.p;
    if (args.config_path.empty() || passed("--steps")) config.steps = args.steps;
    if (args.config_path.empty() || passed("--seed")) config.seed = args.seed;
    if (passed("--target")) config.target = args.target;
    if (passed("--start")) config.start = args.start;
    if (passed("--snapshot-every")) config.snapshot_every = args.snapshot_every;
    if (config.mode == SimMode::affinity_division) {
        if (!config.target) config.target = 0;
        if (args.threshold || config.division_table.empty()) {
            const int n = config.kernel.n_bits();
            const int unfavorable = args.threshold.value_or(3);
            config.division_table.assign(std::size_t(n) + 1, 0.0);
            for (int a = std::max(0, n - unfavorable); a <= n; ++a)
                config.division_table[std::size_t(a)] = 1.0;
        }
    }
    for (const auto& warning : validate(config)) std::cerr << "warning: " << warning << "\n";

    const std::string digest = config_digest(config);
    const std::string ref = "config=" + digest;
    std::string content;
    if (args.replicas <= 1) {
        const Trajectory traj = run_simulation(config);
        if (args.format == "csv") {
            content = trajectory_csv(traj, ref);
        } else {
            nlohmann::json j;
            j["config_digest"] = digest;
            nlohmann::json records = nlohmann::json::array();
            for (std::size_t t = 0; t < traj.records.size(); ++t) {
                nlohmann::json rec{{"t", t},
                                   {"active_count", traj.records[t].active_count},
                                   {"population", traj.records[t].population}};
                if (!traj.records[t].affinity_hist.empty())
                    rec["affinity_hist"] = traj.records[t].affinity_hist;
                if (traj.records[t].snapshot) {
                    rec["snapshot"] = *traj.records[t].snapshot;
                    if (!traj.records[t].snapshot_counts.empty())
                        rec["snapshot_counts"] = traj.records[t].snapshot_counts;
                }
                records.push_back(std::move(rec));
            }
            j["records"] = std::move(records);
            content = j.dump(2) + "\n";
        }
    } else {
        Aggregate agg = monte_carlo(config, args.replicas, config.seed);
        agg.config_digest = digest;
        content = args.format == "csv" ? aggregate_csv(agg, ref)
                                       : aggregate_to_json(agg).dump(2) + "\n";
    }
    write_output(args.out, content);
    return 0;
}

int cmd_bounds(int n_bits, const std::string& k_range, const std::string& out) {
    int k_min = 1, k_max = 0;
    if (!k_range.empty()) {
        const auto sep = k_range.find(':');
        if (sep == std::string::npos) {
            k_min = k_max = std::stoi(k_range);
        } else {
            k_min = std::stoi(k_range.substr(0, sep));
            k_max = std::stoi(k_range.substr(sep + 1));
        }
    }
    if (k_max == 0) k_max = n_bits;
    if (k_min < 1 || k_max > n_bits || k_min > k_max)
        throw usage_error("bounds: k range out of [1, n_bits]");

    std::string csv = "N,k,lambda2,degree,Delta,delta_raw,delta_usable,r_exact,r_simplified,delta_ceiling\n";
    char buf[256];
    for (int k = k_min; k <= k_max; ++k) {
        const CoverThresholds t = cover_thresholds(n_bits, k);
        double mean_min_entry = 0.0;
        for (int i = 1; i <= k; ++i) mean_min_entry += min_nonzero_entry_power_value(n_bits, i);
        mean_min_entry /= double(k);
        std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%llu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      n_bits, k, lambda2_mixture(n_bits, k),
                      (unsigned long long)mixture_degree(n_bits, k), mean_min_entry, t.delta_raw,
                      t.delta_usable, t.r_exact, t.r_simplified, t.delta_ceiling);
        csv += buf;
    }
    csv += std::string("# manifest: none schema=") + kCsvSchema + "\n";
    write_output(out, csv);
    return 0;
}

int cmd_verify(const std::string& suite) {
    const auto results = verify_suite(suite);
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << "check=" << r.name << " oracle=\"" << r.oracle << "\" tolerance=\""
                  << r.tolerance << "\" status=" << (r.pass ? "PASS" : "FAIL");
        if (!r.detail.empty()) std::cout << " detail=\"" << r.detail << "\"";
        std::cout << "\n";
        if (!r.pass && all_pass) {
            all_pass = false;
            std::cerr << "verify: first failing check: " << r.name << "\n";
        }
    }
    return all_pass ? 0 : 1;
}

int cmd_experiment(const std::string& preset, const std::string& out_dir,
                   const ExperimentOptions& options) {
    const nlohmann::json manifest = run_experiment(preset, out_dir, options);
    std::cout << manifest.dump(2) << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"branching random walks on the hypercube: simulation, bounds, verification"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "run a branching random walk");
    simulate->add_option("--kernel", sim_args.kernel,
                         "single_flip|power|mixture|lazy|complete|complete_bipartite");
    simulate->add_option("--n-bits", sim_args.n_bits, "hypercube dimension");
    simulate->add_option("--k", sim_args.k, "mutation depth for power/mixture/lazy");
    simulate->add_option("--c", sim_args.c, "offspring per division");
    simulate->add_option("--mode", sim_args.mode,
                         "simple|multiplicity|division_rate|affinity_division");
    simulate->add_option("--p", sim_args.p, "division rate");
    simulate->add_option("--p-stay", sim_args.p_stay, "lazy stay probability");
    simulate->add_option("--steps", sim_args.steps, "number of steps");
    simulate->add_option("--replicas", sim_args.replicas, "independent replicas");
    simulate->add_option("--seed", sim_args.seed, "rng seed (env BRW_SEED sets the default)");
    simulate->add_option("--n", sim_args.complete_n, "vertices of the complete kernel");
    simulate->add_option("--half", sim_args.half, "half size of the complete bipartite kernel");
    simulate->add_option("--target", sim_args.target, "affinity target vertex");
    simulate->add_option("--threshold", sim_args.threshold,
                         "affinity step threshold: divide iff affinity >= n_bits - threshold");
    simulate->add_option("--snapshot-every", sim_args.snapshot_every, "record occupied vertices");
    simulate->add_option("--start", sim_args.start, "start vertices")->expected(-1);
    simulate->add_option("--config", sim_args.config_path, "JSON run config");
    simulate->add_option("--out", sim_args.out, "output path or - for stdout");
    simulate->add_option("--format", sim_args.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    int bounds_n = 0;
    std::string bounds_k_range, bounds_out = "-";
    CLI::App* bounds = app.add_subcommand("bounds", "emit the closed-form bound table");
    bounds->add_option("--n-bits", bounds_n, "hypercube dimension (>= 3)")->required();
    bounds->add_option("--k-range", bounds_k_range, "k range MIN:MAX (default 1:n_bits)");
    bounds->add_option("--out", bounds_out, "output path or - for stdout");

    std::string verify_suite_name = "all";
    CLI::App* verify = app.add_subcommand("verify", "run the brute-force oracle checks");
    verify->add_option("--suite", verify_suite_name,
                       "expander|spectra|min-entry|degree|binomial|parity|all");

    std::string exp_preset, exp_out = ".";
    ExperimentOptions exp_options;
    int exp_replicas = 0;
    CLI::App* experiment = app.add_subcommand("experiment", "reproduce a result table or figure");
    experiment->add_option("preset", exp_preset, "fig2|fig3|fig4|fig5|fig6|table2")->required();
    experiment->add_option("--out", exp_out, "output directory");
    experiment->add_option("--replicas", exp_replicas, "override the preset replica count");
    experiment->add_option("--seed", exp_options.seed, "rng seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_args, *simulate);
        if (bounds->parsed()) return cmd_bounds(bounds_n, bounds_k_range, bounds_out);
        if (verify->parsed()) return cmd_verify(verify_suite_name);
        if (experiment->parsed()) {
            if (exp_replicas > 0) exp_options.replicas = exp_replicas;
            return cmd_experiment(exp_preset, exp_out, exp_options);
        }
    } catch (const guard_error& e) {
        std::cerr << "guard violation: " << e.what() << "\n";
        return 3;
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace brw
