#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "batchlab/domain.hpp"

namespace batchlab {

enum class TatKind : std::uint8_t { patient, laboratory };
std::string_view to_string(TatKind kind);

/// Nearest-rank quantile: the ceil(q n)-th smallest value (the first for q = 0).
Seconds nearest_rank(std::span<const Seconds> sorted, double q);

struct TatStats {
  std::size_t count = 0;
  double mean = 0.0;
  Seconds median = 0;
  Seconds q95 = 0;
  Seconds max = 0;
  std::vector<Seconds> ecdf;  // every value, ascending

  Seconds quantile(double q) const { return nearest_rank(ecdf, q); }
  friend bool operator==(const TatStats&, const TatStats&) = default;
};

/// Throws UsageError on an empty input.
TatStats tat_stats(std::vector<Seconds> values);

struct TatReport {
  std::string label;
  /// Priorities without samples have no entry.
  std::map<Priority, TatStats> patient;
  std::map<Priority, TatStats> laboratory;

  const std::map<Priority, TatStats>& of(TatKind kind) const {
    return kind == TatKind::patient ? patient : laboratory;
  }
  friend bool operator==(const TatReport&, const TatReport&) = default;
};

/// Every sample needs exactly one record and vice versa.
TatReport compute_report(std::span<const CompletionRecord> records, std::span<const Sample> samples,
                         std::string label = {});

/// Pools the TAT lists of several reports, e.g. one per synthetic month.
TatReport merge_reports(std::span<const TatReport> reports, std::string label = {});

/// One report per registration day, in day order.
std::vector<TatReport> daily_reports(std::span<const CompletionRecord> records,
                                     std::span<const Sample> samples);

struct DailySummary {
  Seconds max = 0;
  Seconds q95 = 0;
  double mean = 0.0;
};

struct HierarchicalStats {
  std::vector<DailySummary> days;
  struct Totals {
    double max = 0.0;
    double mean = 0.0;
  };
  Totals of_max, of_q95, of_mean;
};

/// Daily max / 0.95 quantile / mean, then max and mean over days. Days
/// without the priority are skipped.
HierarchicalStats hierarchical_aggregate(std::span<const TatReport> daily, Priority priority,
                                         TatKind kind = TatKind::patient);

std::string report_to_json(const TatReport& report);
TatReport report_from_json(const std::string& text);
void write_report_json(const TatReport& report, const std::filesystem::path& path);
TatReport read_report_json(const std::filesystem::path& path);

/// Writes `<prefix><kind>_<priority>.csv` files with `tat_seconds,cdf` rows
/// for all kinds and priorities into `dir`.
std::vector<std::filesystem::path> ecdf_export(const TatReport& report,
                                               const std::filesystem::path& dir,
                                               const std::string& prefix = {});
std::vector<Seconds> read_ecdf_csv(const std::filesystem::path& path);

/// One row per run, priority and TAT kind:
/// `run,priority,tat_kind,count,mean_s,median_s,q95_s,max_s`.
void write_compare_csv(std::span<const TatReport> reports, const std::filesystem::path& path);
void write_compare_csv(std::span<const TatReport> reports, std::ostream& out);

}  // namespace batchlab
