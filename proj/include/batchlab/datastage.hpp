#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "batchlab/dist.hpp"
#include "batchlab/offline.hpp"
#include "batchlab/stochopt.hpp"

namespace batchlab {

/// One row of a laboratory information system export.
struct RawRecord {
  SampleId id = 0;
  std::string ward;
  Priority priority = Priority::routine;
  Seconds registration = 0;
  Seconds admission = 0;   // arrival at the laboratory
  Seconds validation = 0;  // result released
  Seconds processing = 1;

  Seconds transport() const noexcept { return admission - registration; }
  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

void validate(const RawRecord& r);

struct CleansingRules {
  Seconds max_transport = 12000;
  Seconds max_total = 86400;  // admission to validation
  Seconds vital_transport_cap = 1320;
  UniformTransport vital_redraw{300, 1320};
  std::size_t top_wards = 30;
  std::size_t min_obs_for_fit = 3;
  void validate() const;
};

/// Exclusions, vital transport redraw and ward selection, in that order.
/// Redrawn vitals keep their lab-side duration, so a second pass is a no-op.
std::vector<RawRecord> cleanse(std::span<const RawRecord> records, const CleansingRules& rules,
                               Rng& rng);

/// Fitted transport distributions per (ward, priority).
struct WardDistributions {
  std::map<std::pair<std::string, Priority>, TransportDistribution> entries;
  /// Shared vital distribution of wards with too few vital records.
  std::optional<UniformTransport> pooled_vital;
  std::vector<std::string> pooled_wards;

  /// Throws EstimationError when nothing covers the pair.
  TransportDistribution lookup(const std::string& ward, Priority priority) const;
  VitalCdfTable vital_cdfs() const;
};

/// KDE for statim and routine, uniform for vitals. Throws EstimationError
/// when a priority class has no record at all, unless that class is listed
/// in `optional_classes`.
WardDistributions estimate_ward_distributions(std::span<const RawRecord> records,
                                              const CleansingRules& rules,
                                              std::span<const Priority> optional_classes = {});

/// Bundle layout: manifest.json plus one `x_seconds,F` CSV per entry.
void write_distribution_bundle(const WardDistributions& dists, const std::filesystem::path& dir);
WardDistributions read_distribution_bundle(const std::filesystem::path& dir);

/// Replicas of `base` with transport times redrawn; replica k uses stream k
/// of `seed`.
std::vector<std::vector<Sample>> synthesize_months(std::span<const Sample> base,
                                                   const WardDistributions& dists,
                                                   std::size_t months, std::uint64_t seed);

struct SyntheticConfig {
  int days = 30;
  int routine_per_day = 165;
  int statim_per_day = 160;
  int vital_per_day = 5;
  int wards = 30;
  int vital_wards = 8;
  /// Relative registration intensity per hour of day.
  std::array<double, 24> hourly_weights = filled(1.0);
  std::vector<Seconds> processing_choices{540, 600, 1080, 1620};
  /// Seed of the per-ward transport behaviour, shared by every realization.
  std::uint64_t world_seed = 20240601;

  void validate() const;

private:
  static std::array<double, 24> filled(double v) {
    std::array<double, 24> a{};
    a.fill(v);
    return a;
  }
};

/// A fully synthetic set of samples with realized transport times.
std::vector<Sample> generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

/// Raw records consistent with a sample list: admission at arrival and
/// validation after one cycle plus processing.
std::vector<RawRecord> to_raw_records(std::span<const Sample> samples, Seconds cycle_time);
std::vector<Sample> to_samples(std::span<const RawRecord> records);

/// CSV `sample_id,ward,priority,registration_s,transport_s,processing_s`.
void write_instance_csv(std::span<const Sample> samples, const std::filesystem::path& path);
std::vector<Sample> read_instance_csv(const std::filesystem::path& path);

/// CSV `sample_id,ward,priority,registration_s,admission_s,validation_s,processing_s`.
void write_raw_csv(std::span<const RawRecord> records, const std::filesystem::path& path);
std::vector<RawRecord> read_raw_csv(const std::filesystem::path& path);

}  // namespace batchlab
