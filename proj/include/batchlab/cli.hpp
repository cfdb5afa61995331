#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "batchlab/datastage.hpp"
#include "batchlab/experiment.hpp"

namespace batchlab {

/// Everything a CLI run can be configured with. Loaded from the JSON config
/// file first, then individual flags override single keys.
struct RunConfig {
  CentrifugeConfig centrifuge;
  PolicySpec policy;
  SyntheticConfig datagen;
  std::size_t months = 1;
};

/// Sections: centrifuge, policy, stochastic, datagen. Unknown keys are
/// rejected with ConfigError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// `flow`, `tardiness:B`, `sq-tardiness:B` or `num-tardy:B` with B in seconds.
ObjectiveSpec parse_objective_spec(std::string_view text);

/// `v=sumtat,s=maxtat,r=maxtat`; omitted priorities keep their default.
StageRoutines parse_stage_spec(std::string_view text);

/// `lo..hi:step` (inclusive) or a comma separated list.
std::vector<double> parse_sweep_values(std::string_view text);

/// Seed from the flag, else from BATCHLAB_SEED, else 1.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag);

/// Entry point of the `batchlab` executable. Returns 0 on success, 2 on
/// usage or configuration errors and 1 on runtime failures; errors are
/// reported as one JSON object on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace batchlab
