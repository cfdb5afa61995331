#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "batchlab/offline.hpp"
#include "batchlab/stochopt.hpp"
#include "oracles.hpp"

// Instance generators shared by the unit tests and the acceptance suite.
namespace fixture {

using namespace batchlab;

/// Six samples, two vitals, three statims, one routine; cycle 15 min.
inline OfflineInstance worked_example() {
  OfflineInstance in;
  in.samples = {{1, 0, 150, "A", Priority::vital, 300},      {2, 0, 600, "B", Priority::vital, 300},
                {3, 0, 1020, "C", Priority::statim, 300},    {4, 900, 1020, "C", Priority::statim, 300},
                {5, 1020, 1080, "D", Priority::statim, 300}, {6, 0, 2400, "E", Priority::routine, 300}};
  in.centrifuge = {56, 900};
  return in;
}

inline std::vector<FeasibilityJob> random_jobs(std::mt19937_64& rng, Seconds cycle) {
  std::uniform_int_distribution<int> n_d(1, 8);
  std::uniform_int_distribution<Seconds> rel(0, 3 * cycle);
  std::uniform_int_distribution<Seconds> slack(0, 3 * cycle);
  std::vector<FeasibilityJob> jobs;
  int n = n_d(rng);
  for (int i = 0; i < n; ++i) {
    Seconds r = rel(rng);
    jobs.push_back({i + 1, r, r + cycle + slack(rng)});
  }
  return jobs;
}

struct StageCase {
  std::vector<Sample> all;
  FrozenCompletions frozen;
  std::vector<Sample> fresh;
  std::vector<oracle::FrozenBatch> frozen_batches;
  CentrifugeConfig cfg;
};

// Random earlier-stage batches followed by up to six new samples.
inline StageCase random_stage(std::mt19937_64& rng) {
  StageCase c;
  std::uniform_int_distribution<int> cap(1, 3);
  c.cfg = {cap(rng), std::uniform_int_distribution<Seconds>(300, 900)(rng)};
  std::uniform_int_distribution<int> nf(0, 2), nn(1, 6);
  std::uniform_int_distribution<Seconds> reg(0, 2000), tr(1, 1500);
  const Seconds ps[] = {300, 540, 600};
  std::uniform_int_distribution<int> pick(0, 2);
  SampleId id = 1;
  Seconds t = std::uniform_int_distribution<Seconds>(0, 600)(rng);
  int batches = nf(rng);
  for (int b = 0; b < batches; ++b) {
    int size = std::uniform_int_distribution<int>(1, c.cfg.capacity)(rng);
    for (int k = 0; k < size; ++k) {
      Seconds arrival = std::max<Seconds>(1, t - static_cast<Seconds>(rng() % 400));
      Seconds r = std::max<Seconds>(0, arrival - 1 - static_cast<Seconds>(rng() % 300));
      Sample s{id++, r, arrival - r, "F", Priority::vital, ps[pick(rng)]};
      c.all.push_back(s);
      c.frozen[s.id] = t + c.cfg.cycle_time + s.processing;
    }
    c.frozen_batches.push_back({t, size});
    t += c.cfg.cycle_time + static_cast<Seconds>(rng() % 1200);
  }
  int n = nn(rng);
  for (int k = 0; k < n; ++k) {
    Sample s{id++, reg(rng), tr(rng), "N", Priority::statim, ps[pick(rng)]};
    c.all.push_back(s);
    c.fresh.push_back(s);
  }
  return c;
}

inline StochInstance random_stoch_instance(std::mt19937_64& rng, int max_avail, int max_transit) {
  StochInstance in;
  std::uniform_int_distribution<Seconds> now_d(1800, 3600);
  in.now = now_d(rng);
  std::uniform_int_distribution<int> na(0, max_avail), nt(0, max_transit);
  int a = na(rng), t = nt(rng);
  if (a + t == 0) a = 1;
  std::uniform_int_distribution<int> coin(0, 1);
  if (coin(rng)) in.last_start = in.now - std::uniform_int_distribution<Seconds>(0, 1200)(rng);
  in.centrifuge.cycle_time = std::uniform_int_distribution<Seconds>(300, 900)(rng);
  std::uniform_int_distribution<Seconds> age(0, 1500);
  const Seconds ps[] = {540, 600, 1080, 1620};
  std::uniform_int_distribution<int> pick(0, 3);
  for (int i = 0; i < a; ++i) in.available.push_back({i + 1, in.now - age(rng), ps[pick(rng)]});
  for (int i = 0; i < t; ++i)
    in.transit.push_back({100 + i, in.now - age(rng), ps[pick(rng)],
                          oracle::random_cdf(rng, 60, 1800, 5)});
  std::uniform_int_distribution<int> kind(0, 3);
  in.objective.kind = static_cast<ObjectiveKind>(kind(rng));
  in.objective.beta = std::uniform_int_distribution<Seconds>(0, 3000)(rng);
  in.deadline = std::uniform_int_distribution<Seconds>(1200, 3600)(rng);
  in.penalty = coin(rng) ? 1000.0 : 0.0;
  return in;
}

}  // namespace fixture
