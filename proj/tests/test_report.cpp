#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include "batchlab/errors.hpp"
#include "batchlab/report.hpp"

using namespace batchlab;
namespace fs = std::filesystem;

namespace {

// One sample per TAT value; registration day chosen by the caller.
struct Built {
  std::vector<Sample> samples;
  std::vector<CompletionRecord> records;
};

void add(Built& b, Seconds day, Priority p, Seconds tat, Seconds transport = 300) {
  SampleId id = static_cast<SampleId>(b.samples.size() + 1);
  Seconds r = day * kSecondsPerDay + 3600;
  b.samples.push_back({id, r, transport, "W", p, 600});
  b.records.push_back({id, r + transport, r + tat, r + transport, static_cast<std::int64_t>(id)});
}

}  // namespace

TEST(Quantile, NearestRank) {
  std::vector<Seconds> v{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  EXPECT_EQ(nearest_rank(v, 0.95), 100);
  EXPECT_EQ(nearest_rank(v, 0.5), 50);
  EXPECT_EQ(nearest_rank(v, 0.0), 10);
  EXPECT_EQ(nearest_rank(v, 1.0), 100);
  std::vector<Seconds> twenty(20);
  for (int i = 0; i < 20; ++i) twenty[static_cast<std::size_t>(i)] = i + 1;
  EXPECT_EQ(nearest_rank(twenty, 0.95), 19);
  std::vector<Seconds> one{42};
  for (double q : {0.0, 0.5, 0.95, 1.0}) EXPECT_EQ(nearest_rank(one, q), 42);
  EXPECT_THROW(nearest_rank(std::vector<Seconds>{}, 0.5), UsageError);
  EXPECT_THROW(tat_stats({}), UsageError);
}

TEST(Quantile, MatchesSortedCount) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Seconds> v(0, 10000);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Seconds> xs(1 + rep % 37);
    for (auto& x : xs) x = v(rng);
    auto s = tat_stats(xs);
    // Oracle: smallest value with at least q n values <= it.
    for (double q : {0.5, 0.95}) {
      Seconds want = 0;
      for (Seconds c : s.ecdf) {
        std::size_t le = static_cast<std::size_t>(std::count_if(xs.begin(), xs.end(), [&](Seconds x) { return x <= c; }));
        if (static_cast<double>(le) * 100 >= q * 100 * static_cast<double>(xs.size()) - 1e-6) {
          want = c;
          break;
        }
      }
      ASSERT_EQ(q == 0.5 ? s.median : s.q95, want);
    }
  }
}

TEST(Report, PatientAndLabSplit) {
  Built b;
  add(b, 0, Priority::vital, 1350, 150);
  add(b, 0, Priority::statim, 2400);
  auto r = compute_report(b.records, b.samples, "x");
  EXPECT_EQ(r.label, "x");
  EXPECT_EQ(r.patient.at(Priority::vital).max, 1350);
  EXPECT_EQ(r.laboratory.at(Priority::vital).max, 1200);
  EXPECT_EQ(r.patient.count(Priority::routine), 0u);
  b.records.pop_back();
  EXPECT_THROW(compute_report(b.records, b.samples), UsageError);
}

TEST(Hierarchical, TwoDays) {
  Built b;
  add(b, 0, Priority::statim, 100);
  add(b, 1, Priority::statim, 200);
  add(b, 1, Priority::vital, 900);
  auto daily = daily_reports(b.records, b.samples);
  ASSERT_EQ(daily.size(), 2u);
  auto h = hierarchical_aggregate(daily, Priority::statim);
  ASSERT_EQ(h.days.size(), 2u);
  EXPECT_DOUBLE_EQ(h.of_max.max, 200);
  EXPECT_DOUBLE_EQ(h.of_max.mean, 150);
  auto v = hierarchical_aggregate(daily, Priority::vital);
  EXPECT_EQ(v.days.size(), 1u);
  EXPECT_DOUBLE_EQ(v.of_mean.mean, 900);
}

TEST(Hierarchical, MatchesRegrouping) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Seconds> tat(600, 9000);
  std::uniform_int_distribution<int> day(0, 6), pri(0, 2);
  for (int rep = 0; rep < 50; ++rep) {
    Built b;
    for (int i = 0; i < 80; ++i) add(b, day(rng), static_cast<Priority>(pri(rng)), tat(rng));
    auto daily = daily_reports(b.records, b.samples);
    for (Priority p : kPrioritiesByImportance) {
      std::map<Seconds, std::vector<Seconds>> by_day;
      for (std::size_t i = 0; i < b.samples.size(); ++i)
        if (b.samples[i].priority == p)
          by_day[b.samples[i].registration / kSecondsPerDay].push_back(b.records[i].completion -
                                                                         b.samples[i].registration);
      double max_of_q95 = 0, mean_of_max = 0, mean_of_mean = 0;
      for (auto& [d, xs] : by_day) {
        std::sort(xs.begin(), xs.end());
        std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(xs.size()) - 1e-9));
        max_of_q95 = std::max(max_of_q95, static_cast<double>(xs[std::max<std::size_t>(rank, 1) - 1]));
        mean_of_max += static_cast<double>(xs.back());
        double m = 0;
        for (Seconds x : xs) m += static_cast<double>(x);
        mean_of_mean += m / static_cast<double>(xs.size());
      }
      auto h = hierarchical_aggregate(daily, p);
      ASSERT_EQ(h.days.size(), by_day.size());
      if (by_day.empty()) continue;
      double n = static_cast<double>(by_day.size());
      EXPECT_DOUBLE_EQ(h.of_q95.max, max_of_q95);
      EXPECT_NEAR(h.of_max.mean, mean_of_max / n, 1e-9);
      EXPECT_NEAR(h.of_mean.mean, mean_of_mean / n, 1e-9);
    }
  }
}

TEST(Report, MergePoolsValues) {
  Built a, b;
  add(a, 0, Priority::statim, 100);
  add(a, 0, Priority::statim, 300);
  add(b, 0, Priority::statim, 200);
  add(b, 0, Priority::routine, 500);
  std::vector<TatReport> reps{compute_report(a.records, a.samples), compute_report(b.records, b.samples)};
  auto m = merge_reports(reps, "all");
  EXPECT_EQ(m.label, "all");
  EXPECT_EQ(m.patient.at(Priority::statim).ecdf, (std::vector<Seconds>{100, 200, 300}));
  EXPECT_EQ(m.patient.at(Priority::statim).median, 200);
  EXPECT_EQ(m.patient.at(Priority::routine).count, 1u);
}

TEST(Report, JsonRoundTrip) {
  Built b;
  add(b, 0, Priority::vital, 1350, 150);
  add(b, 0, Priority::statim, 2401);
  add(b, 2, Priority::routine, 7777, 900);
  auto r = compute_report(b.records, b.samples, "run \"a\"");
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
  EXPECT_THROW(report_from_json("{not json"), Error);
}

TEST(Report, EcdfExportAndCompare) {
  auto dir = fs::temp_directory_path() / "batchlab_report_ecdf";
  fs::remove_all(dir);
  Built b;
  add(b, 0, Priority::statim, 100);
  add(b, 0, Priority::statim, 300);
  add(b, 0, Priority::vital, 900);
  auto r = compute_report(b.records, b.samples, "one");
  auto files = ecdf_export(r, dir);
  EXPECT_EQ(files.size(), 6u);
  EXPECT_EQ(read_ecdf_csv(dir / "patient_statim.csv"), (std::vector<Seconds>{100, 300}));
  EXPECT_TRUE(read_ecdf_csv(dir / "laboratory_routine.csv").empty());

  auto r2 = r;
  r2.label = "two";
  std::vector<TatReport> runs{r, r2};
  std::ostringstream csv;
  write_compare_csv(runs, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "run,priority,tat_kind,count,mean_s,median_s,q95_s,max_s");
  int rows = 0, empty = 0;
  while (std::getline(lines, line)) {
    ++rows;
    empty += line.find(",ROUTINE,") != std::string::npos && line.find(",0,") != std::string::npos;
  }
  // Two runs, three priorities, two TAT kinds; routine rows report zero samples.
  EXPECT_EQ(rows, 12);
  EXPECT_EQ(empty, 4);
  fs::remove_all(dir);
}
