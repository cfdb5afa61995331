#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "batchlab/domain.hpp"

namespace batchlab {

struct OfflineInstance {
  std::vector<Sample> samples;
  CentrifugeConfig centrifuge;
};

struct Batch {
  Seconds start = 0;
  std::vector<SampleId> members;  // ascending ids
  friend bool operator==(const Batch&, const Batch&) = default;
  friend auto operator<=>(const Batch&, const Batch&) = default;
};

/// Job of the feasibility problem: may not start before `release` and must
/// leave the centrifuge by `deadline`.
struct FeasibilityJob {
  SampleId id = 0;
  Seconds release = 0;
  Seconds deadline = 0;
};

/// A batching of all jobs with starts >= member releases, starts at least one
/// cycle apart, at most `capacity` members and every exit (start + cycle) by
/// the member deadlines, or nullopt when none exists.
std::optional<std::vector<Batch>> find_feasible(std::span<const FeasibilityJob> jobs,
                                                const CentrifugeConfig& config);

enum class StageRoutine : std::uint8_t { total_tat, max_tat };
std::string_view to_string(StageRoutine r);
StageRoutine parse_stage_routine(std::string_view text);

/// Result of one stage: a batching of every sample considered so far.
struct StageSchedule {
  std::vector<Batch> batches;                 // sorted by start
  std::map<SampleId, Seconds> completion;     // C_j for every scheduled sample
  std::map<SampleId, Seconds> deadline;       // centrifuge-exit deadline per sample
  Seconds objective = 0;                      // stage objective over the new samples
  std::optional<Seconds> bound;               // binary-searched max TAT, max-TAT stages only

  /// Canonical identity used for de-duplication.
  const std::vector<Batch>& key() const noexcept { return batches; }
};

/// Frozen completion times of the previous stages.
using FrozenCompletions = std::map<SampleId, Seconds>;

/// Every schedule minimizing the sum of completion times of the samples not
/// in `frozen`, keeping frozen samples at their completion time. Throws
/// InstanceTooLarge for more than `max_new` new samples.
std::vector<StageSchedule> subroutine_total_tat(std::span<const Sample> samples,
                                                const FrozenCompletions& frozen,
                                                const CentrifugeConfig& config,
                                                std::size_t max_new = 12);

/// One schedule minimizing the maximum patient TAT of the new samples.
StageSchedule subroutine_max_tat(std::span<const Sample> samples, const FrozenCompletions& frozen,
                                 const CentrifugeConfig& config);

/// Centrifuge-exit deadline of a new sample for the max-TAT bound c.
Seconds max_tat_deadline(const Sample& s, Seconds bound, Seconds initial_deadline,
                         Seconds cycle_time) noexcept;

/// Candidates with the smallest objective, de-duplicated and sorted by key.
std::vector<StageSchedule> select_optimal_schedules(std::vector<StageSchedule> candidates);

struct StageRoutines {
  StageRoutine vital = StageRoutine::total_tat;
  StageRoutine statim = StageRoutine::max_tat;
  StageRoutine routine = StageRoutine::max_tat;
  StageRoutine for_priority(Priority p) const noexcept;
};

struct StageCandidate {
  StageSchedule schedule;
  std::optional<std::size_t> parent;  // index into the previous stage
  bool selected = false;              // optimal among the live candidates
  bool live = true;                   // descends from selected schedules only
};

struct HierarchicalOptions {
  /// Also run later stages from schedules that lost a selection, so that
  /// whole alternative lineages can be inspected. They never become final.
  bool expand_pruned = false;
};

struct HierarchicalResult {
  std::vector<std::vector<StageCandidate>> stages;  // vital, statim, routine
  StageSchedule final_schedule;
  std::vector<Seconds> batch_starts;
};

HierarchicalResult hierarchical_optimize(const OfflineInstance& inst, const StageRoutines& routines,
                                         const HierarchicalOptions& options = {});

/// Throws DomainError unless the batches form a valid schedule of exactly
/// the given samples.
void validate_schedule(std::span<const Sample> samples, std::span<const Batch> batches,
                       const CentrifugeConfig& config);

/// Completion records of a batching; batch ids count from `first_batch_id`.
std::vector<CompletionRecord> completion_records(std::span<const Sample> samples,
                                                 std::span<const Batch> batches,
                                                 const CentrifugeConfig& config,
                                                 std::int64_t first_batch_id = 0);

/// Splits samples by registration day and optimizes each day on its own.
std::vector<CompletionRecord> solve_offline_daily(std::span<const Sample> samples,
                                                  const CentrifugeConfig& config,
                                                  const StageRoutines& routines);

}  // namespace batchlab
