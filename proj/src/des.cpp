#include "batchlab/des.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "batchlab/csv.hpp"
#include "batchlab/errors.hpp"

namespace batchlab {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::sample_arrived: return "SAMPLE_ARRIVED";
    case EventKind::sample_registered: return "SAMPLE_REGISTERED";
    case EventKind::centrifuging_done: return "CENTRIFUGING_DONE";
    case EventKind::custom_wakeup: return "CUSTOM_WAKEUP";
  }
  return "?";
}

Seconds ObservableState::now() const noexcept { return state_->now(); }
const CentrifugeConfig& ObservableState::config() const noexcept { return state_->config(); }
bool ObservableState::busy() const noexcept { return state_->busy(); }
std::optional<Seconds> ObservableState::busy_until() const noexcept { return state_->busy_until(); }
std::optional<Seconds> ObservableState::last_start() const noexcept { return state_->last_start(); }
std::span<const Sample> ObservableState::buffer() const noexcept { return state_->buffer(); }
std::span<const TransitSample> ObservableState::in_transit() const noexcept {
  return state_->in_transit();
}

SimState::SimState(CentrifugeConfig config) : config_(config) { config_.validate(); }

void SimState::advance_to(Seconds t) {
  if (t < now_)
    throw ProtocolViolation("clock moved backwards from " + std::to_string(now_) + " to " +
                            std::to_string(t));
  now_ = t;
}

void SimState::register_sample(const Sample& sample) {
  transit_full_.push_back(sample);
  transit_view_.push_back(
      {sample.id, sample.registration, sample.ward, sample.priority, sample.processing});
}

void SimState::arrive(SampleId id) {
  auto it = std::find_if(transit_full_.begin(), transit_full_.end(),
                         [id](const Sample& s) { return s.id == id; });
  if (it == transit_full_.end())
    throw ProtocolViolation("sample " + std::to_string(id) + " arrived without registration");
  const auto pos = it - transit_full_.begin();
  buffer_.push_back(std::move(*it));
  transit_full_.erase(it);
  transit_view_.erase(transit_view_.begin() + pos);
}

Seconds SimState::run_centrifuge(Seconds t, std::span<const SampleId> batch) {
  if (t != now_)
    throw ProtocolViolation("run requested at " + std::to_string(t) + " but clock is " +
                            std::to_string(now_));
  if (busy())
    throw ProtocolViolation("run requested at " + std::to_string(t) +
                            " while centrifuge is busy until " + std::to_string(*busy_until_));
  if (batch.empty()) throw ProtocolViolation("run requested with an empty batch");
  if (batch.size() > static_cast<std::size_t>(config_.capacity))
    throw ProtocolViolation("batch of " + std::to_string(batch.size()) +
                            " exceeds capacity " + std::to_string(config_.capacity));
  std::unordered_set<SampleId> seen;
  for (SampleId id : batch) {
    if (!seen.insert(id).second)
      throw ProtocolViolation("sample " + std::to_string(id) + " listed twice in batch");
    if (std::none_of(buffer_.begin(), buffer_.end(), [id](const Sample& s) { return s.id == id; }))
      throw ProtocolViolation("sample " + std::to_string(id) + " is not in the buffer");
  }

  const auto batch_id = static_cast<std::int64_t>(runs_.size());
  BatchRun run{batch_id, t, {batch.begin(), batch.end()}};
  for (SampleId id : batch) {
    auto it = std::find_if(buffer_.begin(), buffer_.end(), [id](const Sample& s) { return s.id == id; });
    completions_.push_back({id, t, t + config_.cycle_time + it->processing, it->arrival(), batch_id});
    buffer_.erase(it);
  }
  runs_.push_back(std::move(run));
  busy_until_ = t + config_.cycle_time;
  last_start_ = t;
  return *busy_until_;
}

void SimState::finish_run() {
  if (!busy()) throw ProtocolViolation("centrifuge finished while idle");
  busy_until_.reset();
}

namespace {
struct LaterFirst {
  bool operator()(const SimEvent& a, const SimEvent& b) const noexcept { return b < a; }
};
}  // namespace

SimulationResult run_simulation(std::span<const Sample> samples, Policy& policy,
                                const CentrifugeConfig& config, const SimOptions& options) {
  config.validate();
  std::unordered_map<SampleId, const Sample*> by_id;
  by_id.reserve(samples.size());
  for (const auto& s : samples) {
    validate(s);
    if (options.horizon && s.registration > *options.horizon)
      throw UsageError("sample " + std::to_string(s.id) + " registered after the horizon");
    if (!by_id.emplace(s.id, &s).second)
      throw UsageError("duplicate sample id " + std::to_string(s.id));
  }

  std::vector<const Sample*> order;
  order.reserve(samples.size());
  for (const auto& s : samples) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const Sample* a, const Sample* b) {
    return a->registration != b->registration ? a->registration < b->registration : a->id < b->id;
  });

  std::priority_queue<SimEvent, std::vector<SimEvent>, LaterFirst> queue;
  std::uint64_t sequence = 0;
  auto push = [&](Seconds time, EventKind kind, std::int64_t payload) {
    queue.push({time, kind, payload, sequence++});
  };
  for (const Sample* s : order) push(s->registration, EventKind::sample_registered, s->id);

  SimState state(config);
  SimulationResult result;
  std::uint64_t processed = 0;

  while (!queue.empty()) {
    const SimEvent event = queue.top();
    queue.pop();
    if (++processed > options.max_events)
      throw ProtocolViolation("event limit exceeded; policy '" + policy.name() +
                              "' keeps scheduling wake-ups");
    state.advance_to(event.time);

    TraceEntry entry{event.sequence, event.time, event.kind, std::nullopt, std::nullopt};
    switch (event.kind) {
      case EventKind::sample_registered: {
        const Sample& s = *by_id.at(event.payload);
        state.register_sample(s);
        push(s.arrival(), EventKind::sample_arrived, s.id);
        entry.sample_id = s.id;
        break;
      }
      case EventKind::sample_arrived:
        state.arrive(event.payload);
        entry.sample_id = event.payload;
        break;
      case EventKind::centrifuging_done:
        state.finish_run();
        entry.batch_id = event.payload;
        break;
      case EventKind::custom_wakeup:
        break;
    }
    if (options.record_trace) result.trace.push_back(entry);

    BatchDecision decision = policy.decide(event, state.view());
    switch (decision.kind) {
      case BatchDecision::Kind::run_now: {
        const Seconds done = state.run_centrifuge(event.time, decision.batch);
        push(done, EventKind::centrifuging_done, state.runs().back().id);
        break;
      }
      case BatchDecision::Kind::wake_at:
        if (decision.wake_time < event.time)
          throw ProtocolViolation("policy '" + policy.name() + "' requested wake-up at " +
                                  std::to_string(decision.wake_time) + " before clock " +
                                  std::to_string(event.time));
        push(decision.wake_time, EventKind::custom_wakeup, -1);
        break;
      case BatchDecision::Kind::idle:
        break;
    }
  }

  if (!state.buffer().empty() || state.in_transit_count() != 0)
    throw ProtocolViolation("policy '" + policy.name() + "' stalled with " +
                            std::to_string(state.buffer().size()) + " samples in the buffer");

  result.completions = state.completions();
  result.runs = state.runs();
  return result;
}

void write_trace_csv(std::span<const TraceEntry> trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "event_seq,time_s,kind,sample_id,batch_id\n";
  for (const auto& e : trace) {
    out << e.sequence << ',' << e.time << ',' << to_string(e.kind) << ',';
    if (e.sample_id) out << *e.sample_id;
    out << ',';
    if (e.batch_id) out << *e.batch_id;
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_completions_csv(std::span<const CompletionRecord> records,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sample_id,batch_id,batch_start_s,arrival_s,completion_s\n";
  for (const auto& r : records)
    out << r.sample_id << ',' << r.batch_id << ',' << r.batch_start << ',' << r.arrival << ','
        << r.completion << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<CompletionRecord> read_completions_csv(const std::filesystem::path& path) {
  auto table = csv::read(path);
  csv::require_header(table, {"sample_id", "batch_id", "batch_start_s", "arrival_s", "completion_s"},
                      path);
  std::vector<CompletionRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows)
    out.push_back({csv::to_int(row[0], path), csv::to_int(row[2], path), csv::to_int(row[4], path),
                   csv::to_int(row[3], path), csv::to_int(row[1], path)});
  return out;
}

}  // namespace batchlab
