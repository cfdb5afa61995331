#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <set>

#include "batchlab/errors.hpp"
#include "batchlab/offline.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace batchlab;

namespace {

constexpr Seconds kMin = 60;

using namespace fixture;

std::vector<Sample> only(const std::vector<Sample>& all, Priority p) {
  std::vector<Sample> out;
  for (const auto& s : all)
    if (s.priority == p) out.push_back(s);
  return out;
}

void expect_frozen_kept(const StageSchedule& s, const FrozenCompletions& frozen) {
  for (const auto& [id, c] : frozen) EXPECT_EQ(s.completion.at(id), c) << "frozen sample " << id;
}

}  // namespace

TEST(Feasible, ForcedSingleSample) {
  std::vector<FeasibilityJob> jobs{{1, 100, 1000}};
  auto s = find_feasible(jobs, CentrifugeConfig{56, 900});
  ASSERT_TRUE(s);
  ASSERT_EQ(s->size(), 1u);
  EXPECT_EQ((*s)[0].start, 100);
}

TEST(Feasible, CountingArgument) {
  std::vector<FeasibilityJob> jobs{{1, 0, 901}, {2, 1, 902}};
  EXPECT_FALSE(find_feasible(jobs, CentrifugeConfig{1, 900}));
  EXPECT_TRUE(find_feasible(jobs, CentrifugeConfig{2, 900}));
}

TEST(FeasibleProperty, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(101);
  int mismatches = 0;
  for (int k = 0; k < 300; ++k) {
    CentrifugeConfig cfg{std::uniform_int_distribution<int>(1, 3)(rng), 600};
    auto jobs = random_jobs(rng, cfg.cycle_time);
    auto got = find_feasible(jobs, cfg);
    bool want = oracle::feasible(jobs, cfg.capacity, cfg.cycle_time);
    if (got.has_value() != want) ++mismatches;
    if (got) EXPECT_TRUE(oracle::valid_for(jobs, *got, cfg.capacity, cfg.cycle_time));
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(FeasibleProperty, LooserDeadlinesStayFeasible) {
  std::mt19937_64 rng(103);
  for (int k = 0; k < 300; ++k) {
    CentrifugeConfig cfg{2, 600};
    auto jobs = random_jobs(rng, cfg.cycle_time);
    if (!find_feasible(jobs, cfg)) continue;
    for (auto& j : jobs) j.deadline += static_cast<Seconds>(rng() % 500);
    EXPECT_TRUE(find_feasible(jobs, cfg));
  }
}

TEST(TotalTat, WorkedExampleVitals) {
  auto in = worked_example();
  auto vit = only(in.samples, Priority::vital);
  auto all = subroutine_total_tat(vit, {}, in.centrifuge);
  ASSERT_EQ(all.size(), 2u);
  std::set<std::vector<Batch>> got;
  for (const auto& s : all) {
    got.insert(s.batches);
    Seconds sum = 0;
    for (const auto& v : vit) sum += s.completion.at(v.id) - v.registration;
    EXPECT_EQ(sum, 60 * kMin);
  }
  std::set<std::vector<Batch>> want{{{150, {1}}, {1050, {2}}}, {{600, {1, 2}}}};
  EXPECT_EQ(got, want);
}

TEST(TotalTat, SingleSampleAndGuard) {
  std::vector<Sample> one{{1, 10, 50, "A", Priority::vital, 300}};
  auto s = subroutine_total_tat(one, {}, CentrifugeConfig{});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].completion.at(1), 60 + 900 + 300);
  std::vector<Sample> many;
  for (int i = 1; i <= 13; ++i) many.push_back({i, 0, 10 * i, "A", Priority::vital, 300});
  EXPECT_THROW(subroutine_total_tat(many, {}, CentrifugeConfig{}), InstanceTooLarge);
}

TEST(TotalTatProperty, MatchesPartitionEnumeration) {
  std::mt19937_64 rng(107);
  for (int k = 0; k < 120; ++k) {
    auto c = random_stage(rng);
    auto got = subroutine_total_tat(c.all, c.frozen, c.cfg);
    ASSERT_FALSE(got.empty());
    Seconds want = oracle::min_total_completion(c.fresh, c.frozen_batches, c.cfg.capacity, c.cfg.cycle_time);
    for (const auto& s : got) {
      Seconds sum = 0;
      for (const auto& f : c.fresh) sum += s.completion.at(f.id);
      EXPECT_EQ(sum, want) << "case " << k;
      expect_frozen_kept(s, c.frozen);
      EXPECT_NO_THROW(validate_schedule(c.all, s.batches, c.cfg));
    }
  }
}

TEST(MaxTat, DeadlineAlgebraWorkedExample) {
  auto in = worked_example();
  const Seconds d = 900;
  auto dl = [&](SampleId id, Seconds c) {
    return max_tat_deadline(in.samples[id - 1], c * kMin, in.samples[id - 1].arrival() + 86400, d);
  };
  EXPECT_EQ(dl(3, 40), 35 * kMin);
  EXPECT_EQ(dl(4, 40), 50 * kMin);
  EXPECT_EQ(dl(5, 40), 52 * kMin);
  EXPECT_EQ(dl(6, 70), 65 * kMin);
  EXPECT_EQ(dl(3, 45), 40 * kMin);
  EXPECT_EQ(dl(4, 45), 55 * kMin);
  EXPECT_EQ(dl(5, 45), 57 * kMin);
  EXPECT_EQ(dl(6, 60), 55 * kMin);
}

TEST(MaxTatProperty, MatchesPartitionEnumeration) {
  std::mt19937_64 rng(109);
  for (int k = 0; k < 120; ++k) {
    auto c = random_stage(rng);
    auto s = subroutine_max_tat(c.all, c.frozen, c.cfg);
    Seconds want = oracle::min_max_tat(c.fresh, c.frozen_batches, c.cfg.capacity, c.cfg.cycle_time);
    Seconds worst = 0;
    for (const auto& f : c.fresh) worst = std::max(worst, s.completion.at(f.id) - f.registration);
    EXPECT_EQ(worst, want) << "case " << k;
    EXPECT_EQ(s.objective, want);
    expect_frozen_kept(s, c.frozen);
    EXPECT_NO_THROW(validate_schedule(c.all, s.batches, c.cfg));
  }
}

TEST(Select, KeepsMinimaDeduplicated) {
  StageSchedule a, b, c;
  a.objective = 60;
  a.batches = {{0, {1}}};
  b.objective = 60;
  b.batches = {{10, {1}}};
  c.objective = 75;
  c.batches = {{20, {1}}};
  auto kept = select_optimal_schedules({a, b, c, a});
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].objective, 60);
  EXPECT_EQ(kept[1].objective, 60);
  EXPECT_EQ(select_optimal_schedules({a, a}).size(), 1u);
}

TEST(Hierarchical, WorkedExample) {
  auto t0 = std::chrono::steady_clock::now();
  HierarchicalOptions opt;
  opt.expand_pruned = true;
  auto res = hierarchical_optimize(worked_example(), StageRoutines{}, opt);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
  EXPECT_EQ(res.batch_starts, (std::vector<Seconds>{150, 1050, 2100, 3000}));
  ASSERT_EQ(res.stages.size(), 3u);
  ASSERT_EQ(res.stages[0].size(), 2u);
  // Statim stage: 40 min survives, 45 min is pruned.
  std::vector<Seconds> statim_obj;
  for (const auto& c : res.stages[1]) statim_obj.push_back(c.schedule.objective);
  std::sort(statim_obj.begin(), statim_obj.end());
  EXPECT_EQ(statim_obj, (std::vector<Seconds>{40 * kMin, 45 * kMin}));
  for (const auto& c : res.stages[1]) EXPECT_EQ(c.selected, c.schedule.objective == 40 * kMin);
  // Deadlines are those of the stage that placed each sample.
  std::set<std::vector<Seconds>> deadlines;
  for (const auto& c : res.stages[2]) {
    std::vector<Seconds> d;
    for (SampleId id = 1; id <= 6; ++id) d.push_back(c.schedule.deadline.at(id));
    deadlines.insert(d);
  }
  EXPECT_EQ(deadlines, (std::set<std::vector<Seconds>>{{1050, 1950, 35 * kMin, 50 * kMin, 52 * kMin, 65 * kMin},
                                                       {25 * kMin, 25 * kMin, 40 * kMin, 55 * kMin, 57 * kMin, 55 * kMin}}));
}

TEST(Hierarchical, VitalOnlyCollapses) {
  auto in = worked_example();
  in.samples = only(in.samples, Priority::vital);
  auto res = hierarchical_optimize(in, StageRoutines{});
  auto direct = subroutine_total_tat(in.samples, {}, in.centrifuge);
  EXPECT_EQ(res.final_schedule.batches, direct.front().batches);
}

TEST(HierarchicalProperty, LexicographicBruteForce) {
  // Every stage's objective matches enumerating all schedules of that stage's
  // samples around the frozen earlier stages.
  std::mt19937_64 rng(113);
  for (int k = 0; k < 60; ++k) {
    OfflineInstance in;
    in.centrifuge = {2, 600};
    std::uniform_int_distribution<Seconds> reg(0, 1500), tr(1, 1200);
    std::uniform_int_distribution<int> n_d(1, 6), pr(0, 2);
    int n = n_d(rng);
    for (int i = 0; i < n; ++i)
      in.samples.push_back({i + 1, reg(rng), tr(rng), "A", static_cast<Priority>(pr(rng)), 300});
    auto res = hierarchical_optimize(in, StageRoutines{});
    const auto& fin = res.final_schedule;
    EXPECT_NO_THROW(validate_schedule(in.samples, fin.batches, in.centrifuge));
    std::vector<oracle::FrozenBatch> frozen;
    std::map<Seconds, int> starts;
    for (Priority p : kPrioritiesByImportance) {
      auto fresh = only(in.samples, p);
      if (fresh.empty()) continue;
      Seconds want = p == Priority::vital
                         ? oracle::min_total_completion(fresh, frozen, 2, 600)
                         : oracle::min_max_tat(fresh, frozen, 2, 600);
      Seconds got = 0;
      for (const auto& f : fresh) {
        Seconds c = fin.completion.at(f.id);
        got = p == Priority::vital ? got + c : std::max(got, c - f.registration);
        ++starts[c - 600 - f.processing];
      }
      EXPECT_EQ(got, want) << "case " << k << " priority " << to_string(p);
      frozen.clear();
      for (auto [s, cnt] : starts) frozen.push_back({s, cnt});
    }
  }
}

TEST(Offline, DailyDecomposition) {
  auto in = worked_example();
  std::vector<Sample> two = in.samples;
  for (auto s : in.samples) {
    s.id += 100;
    s.registration += kSecondsPerDay;
    two.push_back(s);
  }
  auto recs = solve_offline_daily(two, in.centrifuge, StageRoutines{});
  ASSERT_EQ(recs.size(), 12u);
  std::map<SampleId, Seconds> c;
  for (const auto& r : recs) c[r.sample_id] = r.completion;
  for (const auto& s : in.samples) EXPECT_EQ(c[s.id + 100] - c[s.id], kSecondsPerDay);
}
