#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace batchlab {

/// Integer seconds from the start of the horizon (midnight of day 0).
using Seconds = std::int64_t;
using SampleId = std::int64_t;

inline constexpr Seconds kSecondsPerDay = 24 * 60 * 60;

/// Sample urgency. The numeric order is the importance order.
enum class Priority : std::uint8_t { routine = 0, statim = 1, vital = 2 };

/// Highest priority first, the order in which reports and stages iterate.
inline constexpr std::array<Priority, 3> kPrioritiesByImportance{
    Priority::vital, Priority::statim, Priority::routine};

std::string_view to_string(Priority p);
/// Accepts ROUTINE / STATIM / VITAL in any letter case.
Priority parse_priority(std::string_view text);

/// Uppercases and trims a ward identifier.
std::string normalize_ward(std::string_view ward);

/// One specimen. The transport time is the realization that online policies
/// only learn at arrival.
struct Sample {
  SampleId id = 0;
  Seconds registration = 0;
  Seconds transport = 1;
  std::string ward;
  Priority priority = Priority::routine;
  Seconds processing = 1;

  Seconds arrival() const noexcept { return registration + transport; }

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Throws DomainError unless registration >= 0, transport > 0, processing > 0.
void validate(const Sample& sample);

struct CentrifugeConfig {
  int capacity = 56;
  Seconds cycle_time = 900;

  void validate() const;
  friend bool operator==(const CentrifugeConfig&, const CentrifugeConfig&) = default;
};

struct CompletionRecord {
  SampleId sample_id = 0;
  Seconds batch_start = 0;
  Seconds completion = 0;
  Seconds arrival = 0;
  std::int64_t batch_id = 0;

  friend bool operator==(const CompletionRecord&, const CompletionRecord&) = default;
};

/// C_j - r_j. Throws UsageError if the record does not belong to the sample.
Seconds patient_tat(const CompletionRecord& record, const Sample& sample);
/// C_j - a_j.
Seconds laboratory_tat(const CompletionRecord& record, const Sample& sample);

}  // namespace batchlab
