#include "brw/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "brw/errors.hpp"
#include "brw/serialize.hpp"
#include "brw/spectral.hpp"
#include "brw/stats.hpp"

namespace brw {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw guard_error("cannot open output file " + path.string());
    out << content;
}

std::string manifest_ref(const std::string& preset) { return preset + ".manifest.json"; }

SimConfig simple_config(KernelSpec kernel, int steps) {
    SimConfig c;
    c.kernel = std::move(kernel);
    c.c = 2;
    c.mode = SimMode::simple;
    c.steps = steps;
    c.start = {0};
    return c;
}

struct Emitted {
    std::vector<std::string> files;
    nlohmann::json params;
};

Emitted preset_table2(const std::filesystem::path& dir, std::uint64_t seed, int replicas,
                      int threads) {
    struct Row {
        const char* model;
        SimConfig config;
    };
    std::vector<Row> rows;
    rows.push_back({"simple_2brw_single_flip", simple_config(KernelSpec::single_flip(10), 10)});
    rows.push_back({"simple_2brw_complete_bipartite", simple_config(KernelSpec::complete_bipartite(512), 10)});
    SimConfig mult = simple_config(KernelSpec::single_flip(10), 10);
    mult.mode = SimMode::multiplicity;
    rows.push_back({"2brw_single_flip_multiplicity", std::move(mult)});

    std::string csv = "model,n_bits,replicas,s10_mean,s10_se\n";
    for (auto& row : rows) {
        const Aggregate agg = monte_carlo(row.config, replicas, seed, threads);
        csv += std::string(row.model) + ",10," + std::to_string(replicas) + "," +
               fmt(agg.per_step[10].s_mean) + "," + fmt(agg.per_step[10].s_se) + "\n";
    }
    csv += "# manifest: " + manifest_ref("table2") + " schema=" + kCsvSchema + "\n";
    write_file(dir / "table2.csv", csv);
    return {{"table2.csv"}, {{"n_bits", 10}, {"steps", 10}}};
}

Emitted kernel_sweep(const std::filesystem::path& dir, const std::string& preset,
                     const std::vector<std::pair<std::string, KernelSpec>>& kernels, int steps,
                     std::uint64_t seed, int replicas, int threads, nlohmann::json params) {
    std::string csv = "kernel,t,s_mean,s_se\n";
    for (const auto& [name, kernel] : kernels) {
        const Aggregate agg = monte_carlo(simple_config(kernel, steps), replicas, seed, threads);
        for (std::size_t t = 0; t < agg.per_step.size(); ++t)
            csv += name + "," + std::to_string(t) + "," + fmt(agg.per_step[t].s_mean) + "," +
                   fmt(agg.per_step[t].s_se) + "\n";
    }
    csv += "# manifest: " + manifest_ref(preset) + " schema=" + kCsvSchema + "\n";
    write_file(dir / (preset + ".csv"), csv);
    return {{preset + ".csv"}, std::move(params)};
}

Emitted preset_fig2(const std::filesystem::path& dir, std::uint64_t seed, int replicas,
                    int threads) {
    const int n = 10, steps = 20;
    nlohmann::json params{{"n_bits", n}, {"steps", steps}};
    // certified active-set levels at t = O(N), for the horizontal guide lines
    params["level_single_flip"] = std::pow(2.0, double(n - r_threshold(n).integer));
    params["level_mixture7"] = delta_mixture(n, 7).usable * std::pow(2.0, n);
    return kernel_sweep(dir, "fig2",
                        {{"single_flip", KernelSpec::single_flip(n)},
                         {"mixture7", KernelSpec::mixture(n, 7)}},
                        steps, seed, replicas, threads, std::move(params));
}

Emitted preset_fig5(const std::filesystem::path& dir, std::uint64_t seed, int replicas,
                    int threads) {
    const int n = 10, steps = 20;
    nlohmann::json params{{"n_bits", n}, {"steps", steps}};
    params["level_half"] = 512;      // best certified coverage at t = N
    params["level_bipartite"] = 256; // bipartite kernels at t = N - 1
    params["level_single_flip"] = std::pow(2.0, double(n - r_threshold(n).integer));
    return kernel_sweep(dir, "fig5",
                        {{"single_flip", KernelSpec::single_flip(n)},
                         {"power7", KernelSpec::power(n, 7)},
                         {"mixture7", KernelSpec::mixture(n, 7)},
                         {"complete_bipartite_512", KernelSpec::complete_bipartite(512)},
                         {"complete_1024", KernelSpec::complete(1024)}},
                        steps, seed, replicas, threads, std::move(params));
}

Emitted preset_fig3(const std::filesystem::path& dir) {
    std::string csv = "N,k,delta_raw,delta_usable\n";
    for (const int n : {7, 10})
        for (int k = 1; k <= n; ++k) {
            const CoverageDelta d = delta_mixture(n, k);
            csv += std::to_string(n) + "," + std::to_string(k) + "," + fmt(d.raw) + "," +
                   fmt(d.usable) + "\n";
        }
    csv += "# manifest: " + manifest_ref("fig3") + " schema=" + kCsvSchema + "\n";
    write_file(dir / "fig3.csv", csv);
    return {{"fig3.csv"}, {{"n_bits", {7, 10}}}};
}

Emitted preset_fig4(const std::filesystem::path& dir, std::uint64_t seed, int replicas,
                    int threads) {
    std::string csv = "N,k,t,s_mean,s_se\n";
    for (const int n : {7, 10}) {
        for (int k = 1; k <= n; ++k) {
            const Aggregate agg =
                monte_carlo(simple_config(KernelSpec::mixture(n, k), n + 1), replicas, seed, threads);
            for (const int t : {n - 1, n, n + 1})
                csv += std::to_string(n) + "," + std::to_string(k) + "," + std::to_string(t) + "," +
                       fmt(agg.per_step[std::size_t(t)].s_mean) + "," +
                       fmt(agg.per_step[std::size_t(t)].s_se) + "\n";
        }
    }
    csv += "# manifest: " + manifest_ref("fig4") + " schema=" + kCsvSchema + "\n";
    write_file(dir / "fig4.csv", csv);
    return {{"fig4.csv"}, {{"n_bits", {7, 10}}, {"t", "N-1, N, N+1"}}};
}

Emitted preset_fig6(const std::filesystem::path& dir, std::uint64_t seed, int replicas,
                    int threads) {
    const int n = 7, steps = 15, unfavorable = 3;
    const std::uint64_t target = 0;
    // divide only at affinity >= n - unfavorable, freeze below
    std::vector<double> table(std::size_t(n) + 1, 0.0);
    for (int a = n - unfavorable; a <= n; ++a) table[std::size_t(a)] = 1.0;

    auto config_for = [&](SimMode mode, int initial_affinity) {
        SimConfig c;
        c.kernel = KernelSpec::single_flip(n);
        c.mode = mode;
        c.c = 2;
        c.p = 0.6;
        c.steps = steps;
        c.target = target;
        c.start = {(std::uint64_t(1) << (n - initial_affinity)) - 1};  // affinity a0 vs target 0
        if (mode == SimMode::affinity_division) c.division_table = table;
        return c;
    };

    std::string hist_csv = "model,a0,affinity,count\n";
    std::string summary_csv = "model,a0,mean_affinity,z_mean,z_se\n";
    for (const auto& [model, mode] :
         std::vector<std::pair<std::string, SimMode>>{{"division_rate_p06", SimMode::division_rate},
                                                      {"affinity_step", SimMode::affinity_division}}) {
        for (int a0 = 0; a0 <= n; ++a0) {
            const Aggregate agg = monte_carlo(config_for(mode, a0), replicas, seed, threads);
            const auto& hist = agg.pooled_affinity[std::size_t(steps)];
            double weighted = 0.0, total = 0.0;
            for (std::size_t a = 0; a < hist.size(); ++a) {
                weighted += double(a) * double(hist[a]);
                total += double(hist[a]);
            }
            summary_csv += model + "," + std::to_string(a0) + "," + fmt(weighted / total) + "," +
                           fmt(agg.per_step[std::size_t(steps)].z_mean) + "," +
                           fmt(agg.per_step[std::size_t(steps)].z_se) + "\n";
            if (a0 == 6 || a0 == 7)
                for (std::size_t a = 0; a < hist.size(); ++a)
                    hist_csv += model + "," + std::to_string(a0) + "," + std::to_string(a) + "," +
                                std::to_string(hist[a]) + "\n";
        }
    }
    hist_csv += "# manifest: " + manifest_ref("fig6") + " schema=" + kCsvSchema + "\n";
    summary_csv += "# manifest: " + manifest_ref("fig6") + " schema=" + kCsvSchema + "\n";
    write_file(dir / "fig6_hist.csv", hist_csv);
    write_file(dir / "fig6_summary.csv", summary_csv);
    return {{"fig6_hist.csv", "fig6_summary.csv"},
            {{"n_bits", n}, {"steps", steps}, {"p", 0.6}, {"unfavorable_distance", unfavorable}}};
}

}  // namespace

std::vector<std::string> experiment_names() {
    return {"fig2", "fig3", "fig4", "fig5", "fig6", "table2"};
}

nlohmann::json run_experiment(const std::string& name, const std::string& out_dir,
                              const ExperimentOptions& options) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    const auto t0 = std::chrono::steady_clock::now();
    Emitted emitted;
    int replicas = 0;
    if (name == "table2") {
        replicas = options.replicas.value_or(100);
        emitted = preset_table2(dir, options.seed, replicas, options.threads);
    } else if (name == "fig2") {
        replicas = options.replicas.value_or(40);
        emitted = preset_fig2(dir, options.seed, replicas, options.threads);
    } else if (name == "fig3") {
        emitted = preset_fig3(dir);
    } else if (name == "fig4") {
        replicas = options.replicas.value_or(100);
        emitted = preset_fig4(dir, options.seed, replicas, options.threads);
    } else if (name == "fig5") {
        replicas = options.replicas.value_or(40);
        emitted = preset_fig5(dir, options.seed, replicas, options.threads);
    } else if (name == "fig6") {
        replicas = options.replicas.value_or(200);
        emitted = preset_fig6(dir, options.seed, replicas, options.threads);
    } else {
        throw usage_error("experiment: unknown preset '" + name + "'");
    }
    const auto t1 = std::chrono::steady_clock::now();

    nlohmann::json manifest;
    manifest["preset"] = name;
    manifest["schema"] = kCsvSchema;
    manifest["seed"] = options.seed;
    manifest["replicas"] = replicas;
    manifest["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
    manifest["files"] = emitted.files;
    manifest["params"] = emitted.params;
    write_file(dir / manifest_ref(name), manifest.dump(2) + "\n");
    return manifest;
}

}  // namespace brw
