#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "batchlab/des.hpp"

namespace batchlab {

struct ThresholdConfig {
  Seconds vital_timeout = 120;
  Seconds nonvital_timeout = 240;
  void validate() const;
};

struct LookaheadConfig {
  ThresholdConfig thresholds;
  /// In-transit vitals registered less than `window` seconds ago are ignored.
  /// Unset means every in-transit vital is considered.
  std::optional<Seconds> window;
  void validate() const;
};

/// Canonical batch filling: `mandatory` first, then the remaining buffer by
/// (priority desc, arrival asc, id asc) until `capacity` is reached. The
/// result does not depend on the order of `buffer`.
std::vector<SampleId> priority_fifo_fill(std::span<const Sample> buffer,
                                         std::span<const SampleId> mandatory, int capacity);

/// First grid point k*cycle (k >= 1) that is >= t.
Seconds next_grid_point(Seconds t, Seconds cycle);

// The three rule policies as pure functions of the current event and view.
// They may return the same wake-up time repeatedly; the policy classes below
// drop duplicates.
BatchDecision fixed_schedule_decide(const SimEvent& event, const ObservableState& view);
BatchDecision threshold_decide(const SimEvent& event, const ObservableState& view,
                               const ThresholdConfig& config);
BatchDecision lookahead_decide(const SimEvent& event, const ObservableState& view,
                               const LookaheadConfig& config);

/// Remembers outstanding wake-ups so a policy never books the same instant twice.
class WakeupBook {
public:
  void on_event(const SimEvent& event);
  BatchDecision filter(BatchDecision decision);

private:
  std::set<Seconds> pending_;
};

class FixedSchedulePolicy final : public Policy {
public:
  BatchDecision decide(const SimEvent& event, const ObservableState& view) override;
  std::string name() const override { return "fixed"; }

private:
  WakeupBook wakeups_;
};

class ThresholdPolicy final : public Policy {
public:
  explicit ThresholdPolicy(ThresholdConfig config = {});
  BatchDecision decide(const SimEvent& event, const ObservableState& view) override;
  std::string name() const override { return "threshold"; }

private:
  ThresholdConfig config_;
  WakeupBook wakeups_;
};

class LookaheadPolicy final : public Policy {
public:
  explicit LookaheadPolicy(LookaheadConfig config = {});
  BatchDecision decide(const SimEvent& event, const ObservableState& view) override;
  std::string name() const override { return "lookahead"; }

private:
  LookaheadConfig config_;
  WakeupBook wakeups_;
};

/// Replays a precomputed list of batch starts. An empty member list means
/// "fill from the buffer by priority".
struct PlannedBatch {
  Seconds start = 0;
  std::vector<SampleId> members;
};

class ScheduledPolicy final : public Policy {
public:
  explicit ScheduledPolicy(std::vector<PlannedBatch> plan);
  BatchDecision decide(const SimEvent& event, const ObservableState& view) override;
  std::string name() const override { return "scheduled"; }

private:
  std::vector<PlannedBatch> plan_;
  std::size_t next_ = 0;
  bool booked_ = false;
};

}  // namespace batchlab
