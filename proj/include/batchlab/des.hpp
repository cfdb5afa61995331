#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "batchlab/domain.hpp"

namespace batchlab {

/// Simultaneous events are processed in the enumerator order: arrivals first so
/// that a sample arriving at a wake-up instant can join that run.
enum class EventKind : std::uint8_t {
  sample_arrived = 0,
  sample_registered = 1,
  centrifuging_done = 2,
  custom_wakeup = 3,
};

std::string_view to_string(EventKind kind);

struct SimEvent {
  Seconds time = 0;
  EventKind kind = EventKind::custom_wakeup;
  std::int64_t payload = -1;  // sample id, batch id or -1
  std::uint64_t sequence = 0;

  /// Strict weak order (time, kind, sequence).
  friend bool operator<(const SimEvent& a, const SimEvent& b) noexcept {
    if (a.time != b.time) return a.time < b.time;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.sequence < b.sequence;
  }
};

/// What a policy may know about a sample that is still on its way. There is
/// deliberately no transport time here.
struct TransitSample {
  SampleId id = 0;
  Seconds registration = 0;
  std::string ward;
  Priority priority = Priority::routine;
  Seconds processing = 1;
};

class SimState;

/// Read-only window onto the simulation handed to policies.
class ObservableState {
public:
  Seconds now() const noexcept;
  const CentrifugeConfig& config() const noexcept;
  bool busy() const noexcept;
  std::optional<Seconds> busy_until() const noexcept;
  /// Start of the most recent run, if any.
  std::optional<Seconds> last_start() const noexcept;
  /// Samples that arrived and wait to be centrifuged, in arrival order.
  std::span<const Sample> buffer() const noexcept;
  /// Registered samples that have not arrived yet, in registration order.
  std::span<const TransitSample> in_transit() const noexcept;

private:
  friend class SimState;
  explicit ObservableState(const SimState& state) noexcept : state_(&state) {}
  const SimState* state_;
};

struct BatchDecision {
  enum class Kind : std::uint8_t { run_now, wake_at, idle };

  Kind kind = Kind::idle;
  std::vector<SampleId> batch;
  Seconds wake_time = 0;

  static BatchDecision run_now(std::vector<SampleId> batch) {
    return {Kind::run_now, std::move(batch), 0};
  }
  static BatchDecision wake_at(Seconds t) { return {Kind::wake_at, {}, t}; }
  static BatchDecision idle() { return {}; }
};

/// A dispatching policy. One instance per simulation run; implementations may
/// keep private state between calls.
class Policy {
public:
  virtual ~Policy() = default;
  virtual BatchDecision decide(const SimEvent& event, const ObservableState& view) = 0;
  virtual std::string name() const = 0;
};

struct BatchRun {
  std::int64_t id = 0;
  Seconds start = 0;
  std::vector<SampleId> members;
};

/// Mutable world of one simulation: clock, in-transit set, buffer, centrifuge.
class SimState {
public:
  explicit SimState(CentrifugeConfig config);

  Seconds now() const noexcept { return now_; }
  void advance_to(Seconds t);

  void register_sample(const Sample& sample);
  void arrive(SampleId id);

  /// Loads `batch` at time t (which must be the current clock) and records the
  /// completion times. Returns the time the cycle ends. Throws
  /// ProtocolViolation if the centrifuge is busy, the batch is empty, exceeds
  /// the capacity, repeats a sample or names a sample not in the buffer.
  Seconds run_centrifuge(Seconds t, std::span<const SampleId> batch);
  void finish_run();

  bool busy() const noexcept { return busy_until_.has_value(); }
  std::optional<Seconds> busy_until() const noexcept { return busy_until_; }
  std::optional<Seconds> last_start() const noexcept { return last_start_; }
  const CentrifugeConfig& config() const noexcept { return config_; }

  std::span<const Sample> buffer() const noexcept { return buffer_; }
  std::span<const TransitSample> in_transit() const noexcept { return transit_view_; }
  std::size_t in_transit_count() const noexcept { return transit_view_.size(); }

  const std::vector<CompletionRecord>& completions() const noexcept { return completions_; }
  const std::vector<BatchRun>& runs() const noexcept { return runs_; }

  ObservableState view() const noexcept { return ObservableState(*this); }

private:
  CentrifugeConfig config_;
  Seconds now_ = 0;
  std::optional<Seconds> busy_until_;
  std::optional<Seconds> last_start_;
  std::vector<Sample> transit_full_;
  std::vector<TransitSample> transit_view_;
  std::vector<Sample> buffer_;
  std::vector<CompletionRecord> completions_;
  std::vector<BatchRun> runs_;
};

struct TraceEntry {
  std::uint64_t sequence = 0;
  Seconds time = 0;
  EventKind kind = EventKind::custom_wakeup;
  std::optional<SampleId> sample_id;
  std::optional<std::int64_t> batch_id;
};

struct SimOptions {
  /// Registrations after the horizon are rejected. The run itself continues
  /// until the event queue drains.
  std::optional<Seconds> horizon;
  bool record_trace = false;
  std::uint64_t max_events = 100'000'000;
};

struct SimulationResult {
  std::vector<CompletionRecord> completions;
  std::vector<BatchRun> runs;
  std::vector<TraceEntry> trace;
};

/// Runs the sample dispatcher and the policy process until no events remain.
/// Every sample is completed exactly once, otherwise ProtocolViolation.
SimulationResult run_simulation(std::span<const Sample> samples, Policy& policy,
                                const CentrifugeConfig& config, const SimOptions& options = {});

/// CSV `event_seq,time_s,kind,sample_id,batch_id`.
void write_trace_csv(std::span<const TraceEntry> trace, const std::filesystem::path& path);

/// CSV `sample_id,batch_id,batch_start_s,arrival_s,completion_s`.
void write_completions_csv(std::span<const CompletionRecord> records,
                           const std::filesystem::path& path);
std::vector<CompletionRecord> read_completions_csv(const std::filesystem::path& path);

}  // namespace batchlab
