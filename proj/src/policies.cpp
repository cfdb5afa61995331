#include "batchlab/policies.hpp"

#include <algorithm>
#include <unordered_set>

#include "batchlab/errors.hpp"

namespace batchlab {

void ThresholdConfig::validate() const {
  if (vital_timeout <= 0 || nonvital_timeout <= 0)
    throw ConfigError("threshold timeouts must be positive");
}

void LookaheadConfig::validate() const {
  thresholds.validate();
  if (window && *window <= 0) throw ConfigError("look-ahead window must be positive");
}

namespace {

bool fill_before(const Sample& a, const Sample& b) {
  if (a.priority != b.priority) return a.priority > b.priority;
  if (a.arrival() != b.arrival()) return a.arrival() < b.arrival();
  return a.id < b.id;
}

bool has_vital(std::span<const Sample> buffer) {
  return std::any_of(buffer.begin(), buffer.end(),
                     [](const Sample& s) { return s.priority == Priority::vital; });
}

Seconds latest_arrival(std::span<const Sample> buffer) {
  Seconds latest = buffer.front().arrival();
  for (const auto& s : buffer) latest = std::max(latest, s.arrival());
  return latest;
}

BatchDecision run_fill(const ObservableState& view) {
  return BatchDecision::run_now(priority_fifo_fill(view.buffer(), {}, view.config().capacity));
}

}  // namespace

std::vector<SampleId> priority_fifo_fill(std::span<const Sample> buffer,
                                         std::span<const SampleId> mandatory, int capacity) {
  if (mandatory.size() > static_cast<std::size_t>(capacity))
    throw UsageError(std::to_string(mandatory.size()) + " mandatory samples exceed capacity " +
                     std::to_string(capacity));
  std::unordered_set<SampleId> required(mandatory.begin(), mandatory.end());
  std::vector<const Sample*> forced;
  std::vector<const Sample*> rest;
  for (const auto& s : buffer) (required.count(s.id) ? forced : rest).push_back(&s);
  if (forced.size() != required.size())
    throw UsageError("mandatory sample is not in the buffer");

  auto by_rule = [](const Sample* a, const Sample* b) { return fill_before(*a, *b); };
  std::sort(forced.begin(), forced.end(), by_rule);
  std::sort(rest.begin(), rest.end(), by_rule);

  std::vector<SampleId> out;
  out.reserve(std::min<std::size_t>(buffer.size(), capacity));
  for (const Sample* s : forced) out.push_back(s->id);
  for (const Sample* s : rest) {
    if (out.size() >= static_cast<std::size_t>(capacity)) break;
    out.push_back(s->id);
  }
  return out;
}

Seconds next_grid_point(Seconds t, Seconds cycle) {
  if (t <= cycle) return cycle;
  return ((t + cycle - 1) / cycle) * cycle;
}

BatchDecision fixed_schedule_decide(const SimEvent& event, const ObservableState& view) {
  const Seconds cycle = view.config().cycle_time;
  const Seconds now = view.now();
  if (view.buffer().empty()) return BatchDecision::idle();
  const bool on_grid = now >= cycle && now % cycle == 0;
  // Arrivals sort first among simultaneous events, so deferring to the
  // wake-up at the same instant lets every sample arriving then board.
  if (on_grid && !view.busy() && event.kind != EventKind::sample_arrived) return run_fill(view);
  Seconds next = next_grid_point(now, cycle);
  if (next == now && (view.busy() || event.kind != EventKind::sample_arrived)) next += cycle;
  return BatchDecision::wake_at(next);
}

BatchDecision threshold_decide(const SimEvent&, const ObservableState& view,
                               const ThresholdConfig& config) {
  const auto buffer = view.buffer();
  if (view.busy() || buffer.empty()) return BatchDecision::idle();
  if (buffer.size() >= static_cast<std::size_t>(view.config().capacity)) return run_fill(view);
  const Seconds timeout = has_vital(buffer) ? config.vital_timeout : config.nonvital_timeout;
  const Seconds due = latest_arrival(buffer) + timeout;
  if (view.now() >= due) return run_fill(view);
  return BatchDecision::wake_at(due);
}

BatchDecision lookahead_decide(const SimEvent&, const ObservableState& view,
                               const LookaheadConfig& config) {
  const auto buffer = view.buffer();
  if (view.busy() || buffer.empty()) return BatchDecision::idle();
  if (buffer.size() >= static_cast<std::size_t>(view.config().capacity)) return run_fill(view);

  const Seconds now = view.now();
  bool vital_considered = false;
  for (const auto& t : view.in_transit()) {
    if (t.priority != Priority::vital) continue;
    if (config.window && now - t.registration < *config.window) continue;
    vital_considered = true;
    break;
  }
  const bool vital_available = has_vital(buffer);
  const Seconds latest = latest_arrival(buffer);
  const auto& th = config.thresholds;

  if (vital_available) {
    // (a) nothing vital on its way, (c) vital timeout since the last arrival.
    if (!vital_considered || now >= latest + th.vital_timeout) return run_fill(view);
    return BatchDecision::wake_at(latest + th.vital_timeout);
  }
  if (vital_considered) return BatchDecision::idle();  // the arrival will wake us
  // (b) no vital anywhere in sight: plain non-vital timeout.
  if (now >= latest + th.nonvital_timeout) return run_fill(view);
  return BatchDecision::wake_at(latest + th.nonvital_timeout);
}

void WakeupBook::on_event(const SimEvent& event) {
  if (event.kind == EventKind::custom_wakeup) pending_.erase(event.time);
}

BatchDecision WakeupBook::filter(BatchDecision decision) {
  if (decision.kind != BatchDecision::Kind::wake_at) return decision;
  if (!pending_.insert(decision.wake_time).second) return BatchDecision::idle();
  return decision;
}

BatchDecision FixedSchedulePolicy::decide(const SimEvent& event, const ObservableState& view) {
  wakeups_.on_event(event);
  return wakeups_.filter(fixed_schedule_decide(event, view));
}

ThresholdPolicy::ThresholdPolicy(ThresholdConfig config) : config_(config) { config_.validate(); }

BatchDecision ThresholdPolicy::decide(const SimEvent& event, const ObservableState& view) {
  wakeups_.on_event(event);
  return wakeups_.filter(threshold_decide(event, view, config_));
}

LookaheadPolicy::LookaheadPolicy(LookaheadConfig config) : config_(config) { config_.validate(); }

BatchDecision LookaheadPolicy::decide(const SimEvent& event, const ObservableState& view) {
  wakeups_.on_event(event);
  return wakeups_.filter(lookahead_decide(event, view, config_));
}

ScheduledPolicy::ScheduledPolicy(std::vector<PlannedBatch> plan) : plan_(std::move(plan)) {
  std::sort(plan_.begin(), plan_.end(),
            [](const PlannedBatch& a, const PlannedBatch& b) { return a.start < b.start; });
}

BatchDecision ScheduledPolicy::decide(const SimEvent& event, const ObservableState& view) {
  if (next_ >= plan_.size()) return BatchDecision::idle();
  const auto& batch = plan_[next_];
  if (event.kind == EventKind::custom_wakeup && event.time == batch.start) {
    ++next_;
    booked_ = false;
    if (batch.members.empty()) {
      if (view.buffer().empty()) return BatchDecision::idle();
      return run_fill(view);
    }
    return BatchDecision::run_now(batch.members);
  }
  if (batch.start < view.now())
    throw ProtocolViolation("planned batch at " + std::to_string(batch.start) +
                            " s can no longer start");
  if (!booked_) {
    booked_ = true;
    return BatchDecision::wake_at(batch.start);
  }
  return BatchDecision::idle();
}

}  // namespace batchlab
