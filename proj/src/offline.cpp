#include "batchlab/offline.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "batchlab/errors.hpp"

namespace batchlab {

namespace {

constexpr Seconds kInitialSlack = 24 * 60 * 60;

/// Disjoint closed integer ranges where no batch may start.
class ForbiddenRegions {
public:
  void add(Seconds lo, Seconds hi) {
    if (lo > hi) return;
    auto it = ranges_.upper_bound(lo);
    if (it != ranges_.begin()) {
      auto prev = std::prev(it);
      if (prev->second + 1 >= lo) {
        lo = prev->first;
        hi = std::max(hi, prev->second);
        it = ranges_.erase(prev);
      }
    }
    while (it != ranges_.end() && it->first <= hi + 1) {
      hi = std::max(hi, it->second);
      it = ranges_.erase(it);
    }
    ranges_.emplace(lo, hi);
  }

  /// Latest allowed start <= t.
  Seconds left_of(Seconds t) const {
    auto it = ranges_.upper_bound(t);
    if (it == ranges_.begin()) return t;
    --it;
    return it->second >= t ? it->first - 1 : t;
  }

  /// Earliest allowed start >= t.
  Seconds right_of(Seconds t) const {
    auto it = ranges_.upper_bound(t);
    if (it == ranges_.begin()) return t;
    --it;
    return it->second >= t ? it->second + 1 : t;
  }

private:
  std::map<Seconds, Seconds> ranges_;
};

}  // namespace

std::optional<std::vector<Batch>> find_feasible(std::span<const FeasibilityJob> jobs,
                                                const CentrifugeConfig& config) {
  config.validate();
  const Seconds delta = config.cycle_time;
  const auto cap = static_cast<std::size_t>(config.capacity);
  std::vector<Batch> out;
  if (jobs.empty()) return out;
  for (const auto& j : jobs)
    if (j.deadline - delta < j.release) return std::nullopt;

  // Backward pass: for every release rho and start deadline eps, the jobs
  // released at or after rho with start deadline <= eps need their first
  // batch no later than c. If c < rho + delta, a batch started in
  // (c - delta, rho) would push them past their deadlines.
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return jobs[a].release > jobs[b].release;
  });
  ForbiddenRegions forbidden;
  std::vector<Seconds> pool;  // start deadlines of jobs released >= rho, ascending
  for (std::size_t i = 0; i < order.size();) {
    const Seconds rho = jobs[order[i]].release;
    for (; i < order.size() && jobs[order[i]].release == rho; ++i) {
      const Seconds e = jobs[order[i]].deadline - delta;
      pool.insert(std::upper_bound(pool.begin(), pool.end(), e), e);
    }
    for (std::size_t m = 1; m <= pool.size(); ++m) {
      if (m < pool.size() && pool[m] == pool[m - 1]) continue;
      const std::size_t batches = (m + cap - 1) / cap;
      Seconds s = std::numeric_limits<Seconds>::max();
      for (std::size_t k = batches; k-- > 0;) {
        const Seconds bound = pool[k * cap];
        s = forbidden.left_of(s == std::numeric_limits<Seconds>::max() ? bound
                                                                       : std::min(bound, s - delta));
      }
      if (s < rho) return std::nullopt;
      if (s < rho + delta) forbidden.add(s - delta + 1, rho - 1);
    }
  }

  // Forward pass: start as early as allowed, earliest deadline first.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return jobs[a].release < jobs[b].release;
  });
  using Entry = std::pair<Seconds, SampleId>;  // start deadline, id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  std::size_t next = 0;
  std::optional<Seconds> prev;
  std::size_t done = 0;
  while (done < jobs.size()) {
    Seconds t = prev ? *prev + delta : std::numeric_limits<Seconds>::min();
    if (ready.empty()) t = std::max(t, jobs[order[next]].release);
    t = forbidden.right_of(t);
    for (; next < order.size() && jobs[order[next]].release <= t; ++next)
      ready.emplace(jobs[order[next]].deadline - delta, jobs[order[next]].id);
    Batch batch{t, {}};
    while (!ready.empty() && batch.members.size() < cap) {
      if (ready.top().first < t) return std::nullopt;
      batch.members.push_back(ready.top().second);
      ready.pop();
    }
    std::sort(batch.members.begin(), batch.members.end());
    done += batch.members.size();
    out.push_back(std::move(batch));
    prev = t;
  }
  return out;
}

std::string_view to_string(StageRoutine r) {
  return r == StageRoutine::total_tat ? "total_tat" : "max_tat";
}

StageRoutine parse_stage_routine(std::string_view text) {
  std::string s(text);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::replace(s.begin(), s.end(), '-', '_');
  if (s == "total_tat" || s == "sum" || s == "sumtat") return StageRoutine::total_tat;
  if (s == "max_tat" || s == "max" || s == "maxtat") return StageRoutine::max_tat;
  throw UsageError("unknown stage routine '" + std::string(text) + "'");
}

StageRoutine StageRoutines::for_priority(Priority p) const noexcept {
  switch (p) {
    case Priority::vital: return vital;
    case Priority::statim: return statim;
    case Priority::routine: return routine;
  }
  return routine;
}

void validate_schedule(std::span<const Sample> samples, std::span<const Batch> batches,
                       const CentrifugeConfig& config) {
  std::unordered_map<SampleId, const Sample*> by_id;
  for (const auto& s : samples)
    if (!by_id.emplace(s.id, &s).second)
      throw DomainError("duplicate sample id " + std::to_string(s.id));
  std::unordered_set<SampleId> seen;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const auto& batch = batches[b];
    if (batch.members.empty()) throw DomainError("empty batch");
    if (batch.members.size() > static_cast<std::size_t>(config.capacity))
      throw DomainError("batch exceeds capacity");
    if (b > 0 && batch.start < batches[b - 1].start + config.cycle_time)
      throw DomainError("batches closer than one cycle");
    for (SampleId id : batch.members) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw DomainError("unknown sample " + std::to_string(id));
      if (!seen.insert(id).second) throw DomainError("sample batched twice");
      if (it->second->arrival() > batch.start)
        throw DomainError("sample " + std::to_string(id) + " batched before arrival");
    }
  }
  if (seen.size() != samples.size()) throw DomainError("schedule misses samples");
}

std::vector<CompletionRecord> completion_records(std::span<const Sample> samples,
                                                 std::span<const Batch> batches,
                                                 const CentrifugeConfig& config,
                                                 std::int64_t first_batch_id) {
  std::unordered_map<SampleId, const Sample*> by_id;
  for (const auto& s : samples) by_id.emplace(s.id, &s);
  std::vector<CompletionRecord> out;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    for (SampleId id : batches[b].members) {
      const Sample& s = *by_id.at(id);
      out.push_back({id, batches[b].start, batches[b].start + config.cycle_time + s.processing,
                     s.arrival(), first_batch_id + static_cast<std::int64_t>(b)});
    }
  }
  return out;
}

namespace {

struct StageInput {
  std::vector<const Sample*> fresh;  // samples to schedule in this stage
  std::vector<Batch> frozen;         // batches implied by previous stages
  std::unordered_map<SampleId, const Sample*> by_id;
};

StageInput prepare_stage(std::span<const Sample> samples, const FrozenCompletions& frozen,
                         const CentrifugeConfig& config) {
  config.validate();
  StageInput in;
  for (const auto& s : samples) {
    validate(s);
    if (!in.by_id.emplace(s.id, &s).second)
      throw DomainError("duplicate sample id " + std::to_string(s.id));
  }
  std::map<Seconds, std::vector<SampleId>> starts;
  for (const auto& [id, completion] : frozen) {
    auto it = in.by_id.find(id);
    if (it == in.by_id.end())
      throw UsageError("frozen sample " + std::to_string(id) + " is not in the stage");
    starts[completion - config.cycle_time - it->second->processing].push_back(id);
  }
  for (const auto& s : samples)
    if (!frozen.count(s.id)) in.fresh.push_back(&s);
  for (auto& [start, ids] : starts) {
    std::sort(ids.begin(), ids.end());
    in.frozen.push_back({start, std::move(ids)});
  }
  std::vector<Sample> frozen_samples;
  for (const auto& b : in.frozen)
    for (SampleId id : b.members) frozen_samples.push_back(*in.by_id.at(id));
  validate_schedule(frozen_samples, in.frozen, config);
  return in;
}

StageSchedule make_schedule(const StageInput& in, std::vector<Batch> batches,
                            const CentrifugeConfig& config) {
  std::sort(batches.begin(), batches.end());
  StageSchedule out;
  for (auto& b : batches) {
    std::sort(b.members.begin(), b.members.end());
    for (SampleId id : b.members)
      out.completion[id] = b.start + config.cycle_time + in.by_id.at(id)->processing;
  }
  for (const auto& b : in.frozen)
    for (SampleId id : b.members) out.deadline[id] = b.start + config.cycle_time;
  out.batches = std::move(batches);
  return out;
}

/// Branch and bound over batchings in start order. Any batch with room takes
/// every waiting sample, since moving a waiting sample forward strictly
/// lowers the sum; only the choice of members of full batches branches.
class TotalTatSearch {
public:
  TotalTatSearch(const StageInput& in, const CentrifugeConfig& config)
      : in_(in), delta_(config.cycle_time), cap_(static_cast<std::size_t>(config.capacity)) {
    for (const Sample* s : in.fresh) fresh_.push_back(s);
    std::sort(fresh_.begin(), fresh_.end(), [](const Sample* a, const Sample* b) {
      return std::pair(a->arrival(), a->id) < std::pair(b->arrival(), b->id);
    });
  }

  std::vector<std::vector<Batch>> run() {
    const std::uint32_t all = fresh_.empty() ? 0U : (1U << fresh_.size()) - 1U;
    std::vector<Batch> path;
    dfs(std::numeric_limits<Seconds>::min() / 4, 0, all, 0, path);
    return std::move(found_);
  }

  Seconds best() const noexcept { return best_; }

private:
  Seconds bound(Seconds earliest, std::uint32_t open) const {
    Seconds lb = 0;
    for (std::size_t i = 0; i < fresh_.size(); ++i)
      if (open >> i & 1U)
        lb += std::max(fresh_[i]->arrival(), earliest) + delta_ + fresh_[i]->processing;
    return lb;
  }

  // Calls visit(subset) for every subset of `pool` with exactly k members.
  template <class F>
  void choose(const std::vector<std::size_t>& pool, std::size_t k, F&& visit) {
    std::vector<std::size_t> pick;
    auto rec = [&](auto&& self, std::size_t from) -> void {
      if (pick.size() == k) {
        visit(pick);
        return;
      }
      for (std::size_t i = from; i + (k - pick.size()) <= pool.size(); ++i) {
        pick.push_back(pool[i]);
        self(self, i + 1);
        pick.pop_back();
      }
    };
    rec(rec, 0);
  }

  void place(Seconds start, std::vector<SampleId> base, const std::vector<std::size_t>& pick,
             Seconds earliest_next, std::size_t frozen_next, std::uint32_t open, Seconds cost,
             std::vector<Batch>& path) {
    for (std::size_t i : pick) {
      base.push_back(fresh_[i]->id);
      open &= ~(1U << i);
      cost += start + delta_ + fresh_[i]->processing;
    }
    path.push_back({start, std::move(base)});
    dfs(earliest_next, frozen_next, open, cost, path);
    path.pop_back();
  }

  void dfs(Seconds earliest, std::size_t frozen_next, std::uint32_t open, Seconds cost,
           std::vector<Batch>& path) {
    if (cost + bound(earliest, open) > best_) return;
    if (open == 0 && frozen_next == in_.frozen.size()) {
      if (cost < best_) {
        best_ = cost;
        found_.clear();
      }
      found_.push_back(path);
      return;
    }
    if (frozen_next < in_.frozen.size()) {
      const Batch& f = in_.frozen[frozen_next];
      std::vector<std::size_t> waiting;
      for (std::size_t i = 0; i < fresh_.size(); ++i)
        if ((open >> i & 1U) && fresh_[i]->arrival() <= f.start) waiting.push_back(i);
      const std::size_t room = cap_ - f.members.size();
      choose(waiting, std::min(room, waiting.size()), [&](const std::vector<std::size_t>& pick) {
        place(f.start, f.members, pick, f.start + delta_, frozen_next + 1, open, cost, path);
      });
    }
    if (open == 0) return;
    const Seconds limit = frozen_next < in_.frozen.size()
                              ? in_.frozen[frozen_next].start - delta_
                              : std::numeric_limits<Seconds>::max();
    std::set<Seconds> starts;
    for (std::size_t i = 0; i < fresh_.size(); ++i)
      if (open >> i & 1U) starts.insert(std::max(earliest, fresh_[i]->arrival()));
    for (Seconds t : starts) {
      if (t > limit) break;
      std::vector<std::size_t> waiting;
      for (std::size_t i = 0; i < fresh_.size(); ++i)
        if ((open >> i & 1U) && fresh_[i]->arrival() <= t) waiting.push_back(i);
      choose(waiting, std::min(cap_, waiting.size()), [&](const std::vector<std::size_t>& pick) {
        // A full batch that could start earlier is never needed.
        const bool tight = t == earliest || std::any_of(pick.begin(), pick.end(), [&](auto i) {
                             return fresh_[i]->arrival() == t;
                           });
        if (tight) place(t, {}, pick, t + delta_, frozen_next, open, cost, path);
      });
    }
  }

  const StageInput& in_;
  Seconds delta_;
  std::size_t cap_;
  std::vector<const Sample*> fresh_;
  Seconds best_ = std::numeric_limits<Seconds>::max();
  std::vector<std::vector<Batch>> found_;
};

std::vector<FeasibilityJob> frozen_jobs(const StageInput& in, Seconds delta) {
  std::vector<FeasibilityJob> jobs;
  for (const auto& b : in.frozen)
    for (SampleId id : b.members) jobs.push_back({id, b.start, b.start + delta});
  return jobs;
}

}  // namespace

std::vector<StageSchedule> subroutine_total_tat(std::span<const Sample> samples,
                                                const FrozenCompletions& frozen,
                                                const CentrifugeConfig& config,
                                                std::size_t max_new) {
  const StageInput in = prepare_stage(samples, frozen, config);
  if (in.fresh.size() > std::min<std::size_t>(max_new, 30))
    throw InstanceTooLarge(std::to_string(in.fresh.size()) +
                           " samples exceed the exact total-TAT limit of " +
                           std::to_string(max_new));
  TotalTatSearch search(in, config);
  auto found = search.run();
  if (found.empty()) throw InfeasibleError("no schedule keeps the frozen batches");
  Seconds released = 0;
  for (const Sample* s : in.fresh) released += s->registration;

  std::vector<StageSchedule> out;
  for (auto& batches : found) {
    StageSchedule s = make_schedule(in, std::move(batches), config);
    for (const Sample* f : in.fresh) s.deadline[f->id] = s.completion[f->id] - f->processing;
    s.objective = search.best() - released;
    out.push_back(std::move(s));
  }
  return select_optimal_schedules(std::move(out));
}

Seconds max_tat_deadline(const Sample& s, Seconds bound, Seconds initial_deadline,
                         Seconds cycle_time) noexcept {
  return std::min(initial_deadline,
                  std::max(s.arrival() + cycle_time, s.registration + bound - s.processing));
}

StageSchedule subroutine_max_tat(std::span<const Sample> samples, const FrozenCompletions& frozen,
                                 const CentrifugeConfig& config) {
  const StageInput in = prepare_stage(samples, frozen, config);
  const Seconds delta = config.cycle_time;
  std::vector<FeasibilityJob> jobs = frozen_jobs(in, delta);
  const std::size_t first_fresh = jobs.size();
  Seconds upper = 0;
  for (const Sample* s : in.fresh) {
    const Seconds initial = s->arrival() + kInitialSlack;
    jobs.push_back({s->id, s->arrival(), initial});
    upper = std::max(upper, initial - s->registration + s->processing);
  }
  auto with_bound = [&](Seconds c) {
    for (std::size_t i = 0; i < in.fresh.size(); ++i) {
      const Sample& s = *in.fresh[i];
      jobs[first_fresh + i].deadline = max_tat_deadline(s, c, s.arrival() + kInitialSlack, delta);
    }
    return find_feasible(jobs, config);
  };

  auto batches = find_feasible(jobs, config);
  if (!batches) throw InfeasibleError("no schedule within 24 h of arrival keeps the frozen batches");
  Seconds lo = 0, hi = upper;
  while (lo < hi) {
    const Seconds mid = lo + (hi - lo) / 2;
    if (with_bound(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  batches = with_bound(lo);

  StageSchedule out = make_schedule(in, std::move(*batches), config);
  for (std::size_t i = 0; i < in.fresh.size(); ++i) {
    const Sample& s = *in.fresh[i];
    out.deadline[s.id] = jobs[first_fresh + i].deadline;
    out.objective = std::max(out.objective, out.completion.at(s.id) - s.registration);
  }
  out.bound = lo;
  return out;
}

std::vector<StageSchedule> select_optimal_schedules(std::vector<StageSchedule> candidates) {
  if (candidates.empty()) return candidates;
  Seconds best = candidates.front().objective;
  for (const auto& c : candidates) best = std::min(best, c.objective);
  std::vector<StageSchedule> out;
  for (auto& c : candidates)
    if (c.objective == best) out.push_back(std::move(c));
  std::stable_sort(out.begin(), out.end(),
                   [](const StageSchedule& a, const StageSchedule& b) { return a.key() < b.key(); });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const StageSchedule& a, const StageSchedule& b) {
                          return a.key() == b.key();
                        }),
            out.end());
  return out;
}

HierarchicalResult hierarchical_optimize(const OfflineInstance& inst, const StageRoutines& routines,
                                         const HierarchicalOptions& options) {
  inst.centrifuge.validate();
  HierarchicalResult result;
  std::vector<Sample> considered;
  for (Priority p : kPrioritiesByImportance) {
    for (const auto& s : inst.samples)
      if (s.priority == p) considered.push_back(s);

    std::vector<StageCandidate> stage;
    // Earlier samples keep the deadline of the stage that placed them rather
    // than the pin the subroutines see.
    auto expand = [&](const StageSchedule* prev, std::optional<std::size_t> parent, bool live) {
      const FrozenCompletions frozen = prev ? prev->completion : FrozenCompletions{};
      auto add = [&](StageSchedule s) {
        if (prev)
          for (const auto& [id, d] : prev->deadline) s.deadline[id] = d;
        stage.push_back({std::move(s), parent, false, live});
      };
      if (routines.for_priority(p) == StageRoutine::total_tat) {
        for (auto& s : subroutine_total_tat(considered, frozen, inst.centrifuge)) add(std::move(s));
      } else {
        add(subroutine_max_tat(considered, frozen, inst.centrifuge));
      }
    };
    if (result.stages.empty()) {
      expand(nullptr, std::nullopt, true);
    } else {
      const auto& prev = result.stages.back();
      for (std::size_t i = 0; i < prev.size(); ++i) {
        if (!prev[i].selected && !options.expand_pruned) continue;
        expand(&prev[i].schedule, i, prev[i].selected);
      }
    }

    std::optional<Seconds> best;
    for (const auto& c : stage)
      if (c.live) best = best ? std::min(*best, c.schedule.objective) : c.schedule.objective;
    if (!best) throw InfeasibleError("no schedule survives the stage");
    std::set<std::vector<Batch>> kept;
    for (auto& c : stage)
      if (c.live && c.schedule.objective == *best) c.selected = kept.insert(c.schedule.key()).second;
    result.stages.push_back(std::move(stage));
  }

  const StageCandidate* final = nullptr;
  for (const auto& c : result.stages.back())
    if (c.selected && (!final || c.schedule.key() < final->schedule.key())) final = &c;
  result.final_schedule = final->schedule;
  for (const auto& b : result.final_schedule.batches) result.batch_starts.push_back(b.start);
  validate_schedule(inst.samples, result.final_schedule.batches, inst.centrifuge);
  return result;
}

std::vector<CompletionRecord> solve_offline_daily(std::span<const Sample> samples,
                                                  const CentrifugeConfig& config,
                                                  const StageRoutines& routines) {
  std::map<Seconds, std::vector<Sample>> days;
  for (const auto& s : samples) days[s.registration / kSecondsPerDay].push_back(s);
  std::vector<CompletionRecord> out;
  std::int64_t next_batch = 0;
  for (auto& [day, list] : days) {
    const OfflineInstance inst{std::move(list), config};
    const auto result = hierarchical_optimize(inst, routines);
    auto records = completion_records(inst.samples, result.final_schedule.batches, config, next_batch);
    next_batch += static_cast<std::int64_t>(result.final_schedule.batches.size());
    out.insert(out.end(), records.begin(), records.end());
  }
  return out;
}

}  // namespace batchlab
