#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "brw/kernel.hpp"
#include "brw/sim.hpp"
#include "brw/stats.hpp"

namespace brw {

// Kernel config: {"kind": "single_flip|power|mixture|lazy|complete|complete_bipartite",
//                 "n_bits": .., "k": .., "p_stay": ..}.
// A lazy kernel wraps single_flip(n_bits), or mixture(n_bits, k) when k > 1.
nlohmann::json kernel_to_json(const KernelSpec& kernel);
KernelSpec kernel_from_json(const nlohmann::json& j);

nlohmann::json sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j);

std::string mode_name(SimMode mode);
SimMode mode_from_name(const std::string& name);

// FNV-1a over the canonical config JSON, as a 16-digit hex string.
std::string config_digest(const SimConfig& config);

nlohmann::json aggregate_to_json(const Aggregate& agg);

// CSV with a header row and a trailing "# manifest: ..." comment line.
std::string trajectory_csv(const Trajectory& traj, const std::string& manifest_ref);
std::string aggregate_csv(const Aggregate& agg, const std::string& manifest_ref);

constexpr const char* kCsvSchema = "brw-csv-v1";

}  // namespace brw
