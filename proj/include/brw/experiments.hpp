#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace brw {

struct ExperimentOptions {
    std::uint64_t seed = 20160512;
    std::optional<int> replicas;  // preset default when unset
    int threads = 0;
};

// Presets: fig2, fig3, fig4, fig5, fig6, table2. Writes one or more CSV data
// files plus <name>.manifest.json into out_dir; returns the manifest.
nlohmann::json run_experiment(const std::string& name, const std::string& out_dir,
                              const ExperimentOptions& options = {});

std::vector<std::string> experiment_names();

}  // namespace brw
