#include "batchlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "batchlab/errors.hpp"

namespace batchlab {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::fixed: return "fixed";
    case PolicyKind::threshold: return "threshold";
    case PolicyKind::lookahead: return "lookahead";
    case PolicyKind::stochastic: return "stochastic";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view text) {
  for (PolicyKind k : kAllPolicies)
    if (text == to_string(k)) return k;
  throw UsageError("unknown policy '" + std::string(text) +
                   "', expected one of fixed, threshold, lookahead, stochastic");
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const VitalCdfTable* vital_cdfs) {
  switch (spec.kind) {
    case PolicyKind::fixed: return std::make_unique<FixedSchedulePolicy>();
    case PolicyKind::threshold: return std::make_unique<ThresholdPolicy>(spec.threshold);
    case PolicyKind::lookahead: return std::make_unique<LookaheadPolicy>(spec.lookahead);
    case PolicyKind::stochastic:
      if (!vital_cdfs) throw UsageError("the stochastic policy needs vital transport distributions");
      return std::make_unique<StochasticPolicy>(*vital_cdfs, spec.stochastic);
  }
  throw UsageError("unknown policy");
}

std::vector<CompletionRecord> simulate_daily(std::span<const Sample> samples, const PolicySpec& spec,
                                             const VitalCdfTable* vital_cdfs,
                                             const CentrifugeConfig& config) {
  std::map<Seconds, std::vector<Sample>> days;
  for (const auto& s : samples) days[s.registration / kSecondsPerDay].push_back(s);
  std::vector<CompletionRecord> out;
  std::int64_t next_batch = 0;
  for (const auto& [day, list] : days) {
    auto policy = make_policy(spec, vital_cdfs);
    auto result = run_simulation(list, *policy, config);
    for (auto& r : result.completions) {
      r.batch_id += next_batch;
      out.push_back(r);
    }
    next_batch += static_cast<std::int64_t>(result.runs.size());
  }
  return out;
}

void run_parallel(std::vector<std::function<void()>> jobs, unsigned threads) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
  if (threads <= 1) {
    for (auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        try {
          jobs[i]();
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace batchlab
