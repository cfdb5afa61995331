#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "batchlab/des.hpp"
#include "batchlab/offline.hpp"
#include "batchlab/policies.hpp"
#include "batchlab/stochopt.hpp"

namespace batchlab {

enum class PolicyKind : std::uint8_t { fixed, threshold, lookahead, stochastic };
std::string_view to_string(PolicyKind kind);
/// Throws UsageError naming the valid choices.
PolicyKind parse_policy_kind(std::string_view text);
inline constexpr std::array<PolicyKind, 4> kAllPolicies{PolicyKind::fixed, PolicyKind::threshold,
                                                        PolicyKind::lookahead,
                                                        PolicyKind::stochastic};

struct PolicySpec {
  PolicyKind kind = PolicyKind::lookahead;
  ThresholdConfig threshold;
  LookaheadConfig lookahead;
  StochasticConfig stochastic;
};

/// `vital_cdfs` is required for the stochastic policy only.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const VitalCdfTable* vital_cdfs);

/// Simulates every registration day on its own with a fresh policy. Batch
/// ids keep counting across days.
std::vector<CompletionRecord> simulate_daily(std::span<const Sample> samples, const PolicySpec& spec,
                                             const VitalCdfTable* vital_cdfs,
                                             const CentrifugeConfig& config);

/// Runs independent jobs on up to `threads` workers (0 = hardware
/// concurrency). The first exception is rethrown after all workers join.
void run_parallel(std::vector<std::function<void()>> jobs, unsigned threads = 0);

}  // namespace batchlab
