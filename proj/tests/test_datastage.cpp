#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "batchlab/datastage.hpp"
#include "batchlab/errors.hpp"
#include "oracles.hpp"

using namespace batchlab;
namespace fs = std::filesystem;

namespace {

RawRecord rec(SampleId id, const std::string& ward, Priority p, Seconds transport,
              Seconds lab = 1800) {
  return {id, ward, p, 1000, 1000 + transport, 1000 + transport + lab, 600};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("batchlab_ds_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cleanse, ExclusionRules) {
  CleansingRules rules;
  Rng rng = make_stream(1, 0);
  std::vector<RawRecord> in{rec(1, "a", Priority::statim, 201 * 60),
                            rec(2, "a", Priority::statim, 200 * 60),
                            rec(3, "a", Priority::routine, 600, 86401),
                            rec(4, "a", Priority::routine, 600, 86400)};
  auto out = cleanse(in, rules, rng);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].id, 2);
  EXPECT_EQ(out[1].id, 4);
  EXPECT_EQ(out[0].ward, "A");
}

TEST(Cleanse, VitalRedrawKeepsLabDuration) {
  Rng rng = make_stream(2, 0);
  std::vector<RawRecord> in{rec(1, "a", Priority::vital, 30 * 60, 1500)};
  auto out = cleanse(in, CleansingRules{}, rng);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_GE(out[0].transport(), 300);
  EXPECT_LE(out[0].transport(), 1320);
  EXPECT_EQ(out[0].validation - out[0].admission, 1500);
  EXPECT_EQ(out[0].registration, 1000);
}

TEST(Cleanse, TopWardsByNonvitalVolume) {
  CleansingRules rules;
  std::vector<RawRecord> in;
  SampleId id = 1;
  // 31 wards; ward W30 has the lowest nonvital volume.
  for (int w = 0; w < 31; ++w)
    for (int k = 0; k < (w == 30 ? 1 : 3 + w); ++k)
      in.push_back(rec(id++, "W" + std::to_string(w), Priority::routine, 600));
  in.push_back(rec(id++, "W30", Priority::vital, 600));
  Rng rng = make_stream(3, 0);
  auto out = cleanse(in, rules, rng);
  int w30_nonvital = 0, w30_vital = 0;
  for (const auto& r : out)
    if (r.ward == "W30") (r.priority == Priority::vital ? w30_vital : w30_nonvital)++;
  EXPECT_EQ(w30_nonvital, 0);
  EXPECT_EQ(w30_vital, 1);
}

TEST(Cleanse, Idempotent) {
  SyntheticConfig cfg;
  cfg.days = 3;
  auto raw = to_raw_records(generate_synthetic(cfg, 5), 900);
  for (std::size_t i = 0; i < raw.size(); i += 7)
    if (raw[i].priority == Priority::vital) raw[i].admission += 3000, raw[i].validation += 3000;
  Rng a = make_stream(4, 0);
  auto once = cleanse(raw, CleansingRules{}, a);
  Rng b = make_stream(4, 0);
  EXPECT_EQ(cleanse(once, CleansingRules{}, b), once);
}

TEST(Estimate, UniformAndPooling) {
  CleansingRules rules;
  std::vector<RawRecord> in;
  SampleId id = 1;
  for (Seconds t : {360, 600, 840}) in.push_back(rec(id++, "A", Priority::vital, t));
  for (Seconds t : {400, 500}) in.push_back(rec(id++, "B", Priority::vital, t));
  for (Seconds t : {700}) in.push_back(rec(id++, "C", Priority::vital, t));
  for (int k = 0; k < 20; ++k) {
    in.push_back(rec(id++, "A", Priority::statim, 300 + 30 * k));
    in.push_back(rec(id++, "A", Priority::routine, 400 + 30 * k));
  }
  auto d = estimate_ward_distributions(in, rules);
  auto a = std::get<UniformTransport>(d.lookup("A", Priority::vital));
  EXPECT_EQ(a.lb, 360);
  EXPECT_EQ(a.ub, 840);
  ASSERT_TRUE(d.pooled_vital);
  EXPECT_EQ(d.pooled_vital->lb, 400);
  EXPECT_EQ(d.pooled_vital->ub, 700);
  EXPECT_EQ(d.pooled_wards, (std::vector<std::string>{"B", "C"}));
  EXPECT_EQ(std::get<UniformTransport>(d.lookup("B", Priority::vital)), *d.pooled_vital);
  EXPECT_TRUE(std::holds_alternative<KdeDensity>(d.lookup("A", Priority::statim)));
}

TEST(Estimate, MissingClassNamesIt) {
  std::vector<RawRecord> in{rec(1, "A", Priority::statim, 300), rec(2, "A", Priority::statim, 400)};
  try {
    std::vector<Priority> optional{Priority::vital};
    estimate_ward_distributions(in, CleansingRules{}, optional);
    FAIL() << "expected EstimationError";
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("ROUTINE"), std::string::npos) << e.what();
  }
}

TEST(Estimate, KdeReproducesSourceEcdf) {
  std::vector<RawRecord> in;
  Rng src = make_stream(6, 0);
  std::lognormal_distribution<double> ln(std::log(900.0), 0.5);
  for (int k = 0; k < 400; ++k)
    in.push_back(rec(k + 1, "A", Priority::statim, std::max<Seconds>(1, std::llround(ln(src)))));
  in.push_back(rec(1000, "A", Priority::routine, 600));
  in.push_back(rec(1001, "A", Priority::routine, 700));
  std::vector<Priority> optional{Priority::vital};
  auto d = estimate_ward_distributions(in, CleansingRules{}, optional);
  auto dist = d.lookup("A", Priority::statim);
  std::vector<double> obs;
  for (const auto& r : in)
    if (r.priority == Priority::statim) obs.push_back(static_cast<double>(r.transport()));
  auto source = ecdf_from_observations(obs);
  Rng rng = make_stream(6, 1);
  std::vector<double> draws;
  for (int i = 0; i < 100000; ++i) draws.push_back(static_cast<double>(sample_transport(dist, rng)));
  EXPECT_LT(kolmogorov_distance(draws, source), 0.05);
}

TEST(Synthesize, Determinism) {
  SyntheticConfig cfg;
  cfg.days = 2;
  auto base = generate_synthetic(cfg, 7);
  Rng rng = make_stream(7, 0);
  auto raw = cleanse(to_raw_records(base, 900), CleansingRules{}, rng);
  auto d = estimate_ward_distributions(raw, CleansingRules{});
  auto samples = to_samples(raw);
  EXPECT_TRUE(synthesize_months(samples, d, 0, 1).empty());
  auto a = synthesize_months(samples, d, 2, 1);
  auto b = synthesize_months(samples, d, 2, 1);
  auto c = synthesize_months(samples, d, 2, 2);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_NE(a[0], a[1]);
  bool differs = false;
  for (std::size_t i = 0; i < a[0].size(); ++i) {
    EXPECT_EQ(a[0][i].registration, c[0][i].registration);
    EXPECT_EQ(a[0][i].ward, c[0][i].ward);
    EXPECT_EQ(a[0][i].priority, c[0][i].priority);
    EXPECT_EQ(a[0][i].processing, c[0][i].processing);
    differs |= a[0][i].transport != c[0][i].transport;
  }
  EXPECT_TRUE(differs);
}

TEST(Synthesize, InsideSupportAndKdeMean) {
  SyntheticConfig cfg;
  cfg.days = 5;
  auto base = generate_synthetic(cfg, 8);
  Rng rng = make_stream(8, 0);
  auto raw = cleanse(to_raw_records(base, 900), CleansingRules{}, rng);
  auto d = estimate_ward_distributions(raw, CleansingRules{});
  auto samples = to_samples(raw);
  auto months = synthesize_months(samples, d, 1, 3);
  for (const auto& s : months[0]) {
    auto dist = d.lookup(s.ward, s.priority);
    if (auto* u = std::get_if<UniformTransport>(&dist)) {
      EXPECT_GE(s.transport, std::floor(u->lb));
      EXPECT_LE(s.transport, std::ceil(u->ub));
    }
    EXPECT_GT(s.transport, 0);
  }
  // Moment check on one ward: mean of 10^4 draws vs KDE mean.
  std::string ward;
  for (const auto& [key, dist] : d.entries)
    if (key.second == Priority::statim) {
      ward = key.first;
      break;
    }
  auto kde = std::get<KdeDensity>(d.lookup(ward, Priority::statim));
  double mean = oracle::positive_kde_mean(kde.observations, kde.bandwidth);
  double var = oracle::positive_kde_variance(kde.observations, kde.bandwidth);
  std::vector<Sample> many;
  for (int i = 0; i < 10000; ++i) many.push_back({i + 1, 0, 1, ward, Priority::statim, 600});
  auto drawn = synthesize_months(many, d, 1, 4)[0];
  double sum = 0;
  for (const auto& s : drawn) sum += static_cast<double>(s.transport);
  // Rounding to whole seconds moves the mean by well under a second.
  EXPECT_NEAR(sum / 10000.0, mean, 3 * std::sqrt(var / 10000.0) + 0.5);
}

TEST(Synthesize, MissingDistribution) {
  WardDistributions d;
  std::vector<Sample> s{{1, 0, 10, "NOWHERE", Priority::statim, 600}};
  EXPECT_THROW(synthesize_months(s, d, 1, 1), EstimationError);
}

TEST(Generate, DailyCountsAndDeterminism) {
  SyntheticConfig cfg;
  cfg.days = 1;
  auto a = generate_synthetic(cfg, 9);
  EXPECT_EQ(a.size(), 330u);
  int v = 0;
  for (const auto& s : a) v += s.priority == Priority::vital;
  EXPECT_EQ(v, 5);
  EXPECT_EQ(generate_synthetic(cfg, 9), a);
  EXPECT_NE(generate_synthetic(cfg, 10), a);
  for (const auto& s : a) {
    EXPECT_NO_THROW(validate(s));
    EXPECT_TRUE(s.processing == 540 || s.processing == 600 || s.processing == 1080 || s.processing == 1620);
  }
  cfg.days = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Generate, FlatProfileIsUniform) {
  // Registration hours of about 10^4 samples under a flat profile: chi-square
  // over 24 bins against the 1% critical value for 23 degrees of freedom.
  SyntheticConfig cfg;
  cfg.days = 31;
  auto s = generate_synthetic(cfg, 11);
  ASSERT_GE(s.size(), 10000u);
  std::vector<double> bins(24, 0.0);
  for (const auto& x : s) bins[static_cast<std::size_t>((x.registration % kSecondsPerDay) / 3600)] += 1;
  double expected = static_cast<double>(s.size()) / 24.0, chi = 0.0;
  for (double b : bins) chi += (b - expected) * (b - expected) / expected;
  EXPECT_LT(chi, 41.64);
}

TEST(Generate, ZeroVitals) {
  SyntheticConfig cfg;
  cfg.days = 1;
  cfg.vital_per_day = 0;
  auto s = generate_synthetic(cfg, 12);
  for (const auto& x : s) EXPECT_NE(x.priority, Priority::vital);
}

TEST(Io, InstanceAndRawRoundTrip) {
  auto dir = scratch("io");
  SyntheticConfig cfg;
  cfg.days = 1;
  auto s = generate_synthetic(cfg, 13);
  write_instance_csv(s, dir / "i.csv");
  EXPECT_EQ(read_instance_csv(dir / "i.csv"), s);
  auto raw = to_raw_records(s, 900);
  write_raw_csv(raw, dir / "r.csv");
  EXPECT_EQ(read_raw_csv(dir / "r.csv"), raw);
  std::ifstream in(dir / "i.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "sample_id,ward,priority,registration_s,transport_s,processing_s");
  fs::remove_all(dir);
}

TEST(Io, BundleRoundTrip) {
  auto dir = scratch("bundle");
  SyntheticConfig cfg;
  cfg.days = 3;
  Rng rng = make_stream(14, 0);
  auto raw = cleanse(to_raw_records(generate_synthetic(cfg, 14), 900), CleansingRules{}, rng);
  auto d = estimate_ward_distributions(raw, CleansingRules{});
  write_distribution_bundle(d, dir);
  auto back = read_distribution_bundle(dir);
  EXPECT_EQ(back.entries, d.entries);
  EXPECT_EQ(back.pooled_vital, d.pooled_vital);
  EXPECT_EQ(back.pooled_wards, d.pooled_wards);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  fs::remove_all(dir);
}
