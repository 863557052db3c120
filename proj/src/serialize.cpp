#include "brw/serialize.hpp"

#include <cinttypes>
#include <cstdio>

#include "brw/errors.hpp"

namespace brw {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

nlohmann::json kernel_to_json(const KernelSpec& kernel) {
    nlohmann::json j;
    switch (kernel.kind()) {
        case KernelKind::single_flip:
            j["kind"] = "single_flip";
            j["n_bits"] = kernel.n_bits();
            break;
        case KernelKind::power:
            j["kind"] = "power";
            j["n_bits"] = kernel.n_bits();
            j["k"] = kernel.k();
            break;
        case KernelKind::mixture:
            j["kind"] = "mixture";
            j["n_bits"] = kernel.n_bits();
            j["k"] = kernel.k();
            break;
        case KernelKind::lazy:
            j["kind"] = "lazy";
            j["n_bits"] = kernel.n_bits();
            j["p_stay"] = kernel.p_stay();
            if (kernel.base().kind() == KernelKind::mixture && kernel.base().k() > 1)
                j["k"] = kernel.base().k();
            else if (kernel.base().kind() != KernelKind::single_flip)
                throw usage_error("kernel_to_json: lazy bases other than single_flip/mixture "
                                  "have no config form");
            break;
        case KernelKind::complete:
            j["kind"] = "complete";
            j["n"] = kernel.state_count();
            break;
        case KernelKind::complete_bipartite:
            j["kind"] = "complete_bipartite";
            j["half"] = kernel.state_count() / 2;
            break;
        case KernelKind::explicit_matrix:
            throw usage_error("kernel_to_json: explicit matrices have no config form");
    }
    return j;
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    auto geti = [&](const char* key) {
        if (!j.contains(key)) throw usage_error(std::string("kernel config: missing field ") + key);
        return j.at(key).get<std::int64_t>();
    };
    if (kind == "single_flip") return KernelSpec::single_flip(int(geti("n_bits")));
    if (kind == "power") return KernelSpec::power(int(geti("n_bits")), int(geti("k")));
    if (kind == "mixture") return KernelSpec::mixture(int(geti("n_bits")), int(geti("k")));
    if (kind == "lazy") {
        const int n_bits = int(geti("n_bits"));
        const int k = j.contains("k") ? int(geti("k")) : 1;
        KernelSpec base = k > 1 ? KernelSpec::mixture(n_bits, k) : KernelSpec::single_flip(n_bits);
        return KernelSpec::lazy(j.at("p_stay").get<double>(), std::move(base));
    }
    if (kind == "complete") return KernelSpec::complete(std::uint64_t(geti("n")));
    if (kind == "complete_bipartite")
        return KernelSpec::complete_bipartite(std::uint64_t(geti("half")));
    throw usage_error("kernel config: unknown kind '" + kind + "'");
}

std::string mode_name(SimMode mode) {
    switch (mode) {
        case SimMode::simple: return "simple";
        case SimMode::multiplicity: return "multiplicity";
        case SimMode::division_rate: return "division_rate";
        case SimMode::affinity_division: return "affinity_division";
    }
    return "simple";
}

SimMode mode_from_name(const std::string& name) {
    if (name == "simple") return SimMode::simple;
    if (name == "multiplicity") return SimMode::multiplicity;
    if (name == "division_rate") return SimMode::division_rate;
    if (name == "affinity_division") return SimMode::affinity_division;
    throw usage_error("config: unknown mode '" + name + "'");
}

nlohmann::json sim_config_to_json(const SimConfig& config) {
    nlohmann::json j;
    j["kernel"] = kernel_to_json(config.kernel);
    j["c"] = config.c;
    j["mode"] = mode_name(config.mode);
    if (config.mode == SimMode::division_rate) j["p"] = config.p;
    if (!config.division_table.empty()) j["division_table"] = config.division_table;
    if (config.target) j["target"] = *config.target;
    j["start"] = config.start;
    j["steps"] = config.steps;
    j["seed"] = config.seed;
    if (config.snapshot_every) j["snapshot_every"] = *config.snapshot_every;
    j["dense_threshold_bits"] = config.dense_threshold_bits;
    return j;
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
    SimConfig c;
    c.kernel = kernel_from_json(j.at("kernel"));
    if (j.contains("c")) c.c = j.at("c").get<int>();
    if (j.contains("mode")) c.mode = mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("p")) c.p = j.at("p").get<double>();
    if (j.contains("division_table"))
        c.division_table = j.at("division_table").get<std::vector<double>>();
    if (j.contains("target")) c.target = j.at("target").get<std::uint64_t>();
    if (j.contains("start")) c.start = j.at("start").get<std::vector<std::uint64_t>>();
    if (j.contains("steps")) c.steps = j.at("steps").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("snapshot_every")) c.snapshot_every = j.at("snapshot_every").get<int>();
    if (j.contains("dense_threshold_bits"))
        c.dense_threshold_bits = j.at("dense_threshold_bits").get<int>();
    return c;
}

std::string config_digest(const SimConfig& config) {
    const std::string canon = sim_config_to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

nlohmann::json aggregate_to_json(const Aggregate& agg) {
    nlohmann::json j;
    j["config_digest"] = agg.config_digest;
    j["n"] = agg.replicas;
    nlohmann::json steps = nlohmann::json::array();
    for (std::size_t t = 0; t < agg.per_step.size(); ++t) {
        const auto& s = agg.per_step[t];
        steps.push_back({{"t", t},
                         {"s_mean", s.s_mean},
                         {"s_se", s.s_se},
                         {"z_mean", s.z_mean},
                         {"z_se", s.z_se}});
    }
    j["per_step"] = std::move(steps);
    j["histograms"] = agg.pooled_affinity;
    return j;
}

std::string trajectory_csv(const Trajectory& traj, const std::string& manifest_ref) {
    const bool has_hist = !traj.records.empty() && !traj.records[0].affinity_hist.empty();
    std::string out = "t,active_count,population";
    if (has_hist)
        for (std::size_t a = 0; a < traj.records[0].affinity_hist.size(); ++a)
            out += ",aff_" + std::to_string(a);
    out += "\n";
    for (std::size_t t = 0; t < traj.records.size(); ++t) {
        const auto& rec = traj.records[t];
        out += std::to_string(t) + "," + std::to_string(rec.active_count) + "," +
               std::to_string(rec.population);
        if (has_hist)
            for (const auto count : rec.affinity_hist) out += "," + std::to_string(count);
        out += "\n";
    }
    out += "# manifest: " + manifest_ref + " schema=" + kCsvSchema + "\n";
    return out;
}

std::string aggregate_csv(const Aggregate& agg, const std::string& manifest_ref) {
    std::string out = "t,s_mean,s_se,z_mean,z_se\n";
    for (std::size_t t = 0; t < agg.per_step.size(); ++t) {
        const auto& s = agg.per_step[t];
        out += std::to_string(t) + "," + fmt_double(s.s_mean) + "," + fmt_double(s.s_se) + "," +
               fmt_double(s.z_mean) + "," + fmt_double(s.z_se) + "\n";
    }
    out += "# manifest: " + manifest_ref + " schema=" + kCsvSchema + "\n";
    return out;
}

}  // namespace brw
