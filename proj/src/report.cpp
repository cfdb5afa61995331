#include "batchlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "batchlab/csv.hpp"
#include "batchlab/errors.hpp"

namespace batchlab {

std::string_view to_string(TatKind kind) {
  return kind == TatKind::patient ? "patient" : "laboratory";
}

Seconds nearest_rank(std::span<const Seconds> sorted, double q) {
  if (sorted.empty()) throw UsageError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw UsageError("quantile level outside [0, 1]");
  const double n = static_cast<double>(sorted.size());
  // The small epsilon keeps q n that is integral in exact arithmetic from
  // rounding up (0.95 * 20 is 19.000000000000004 in binary).
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

TatStats tat_stats(std::vector<Seconds> values) {
  if (values.empty()) throw UsageError("statistics of an empty sample");
  std::sort(values.begin(), values.end());
  TatStats s;
  s.count = values.size();
  s.mean = static_cast<double>(std::accumulate(values.begin(), values.end(), Seconds{0})) /
           static_cast<double>(values.size());
  s.median = nearest_rank(values, 0.5);
  s.q95 = nearest_rank(values, 0.95);
  s.max = values.back();
  s.ecdf = std::move(values);
  return s;
}

TatReport compute_report(std::span<const CompletionRecord> records, std::span<const Sample> samples,
                         std::string label) {
  std::unordered_map<SampleId, const CompletionRecord*> by_id;
  for (const auto& r : records)
    if (!by_id.emplace(r.sample_id, &r).second)
      throw UsageError("sample " + std::to_string(r.sample_id) + " completed twice");
  if (records.size() != samples.size())
    throw UsageError(std::to_string(records.size()) + " records for " +
                     std::to_string(samples.size()) + " samples");
  std::map<Priority, std::vector<Seconds>> patient, lab;
  for (const auto& s : samples) {
    auto it = by_id.find(s.id);
    if (it == by_id.end()) throw UsageError("sample " + std::to_string(s.id) + " has no record");
    patient[s.priority].push_back(patient_tat(*it->second, s));
    lab[s.priority].push_back(laboratory_tat(*it->second, s));
  }
  TatReport report;
  report.label = std::move(label);
  for (auto& [p, v] : patient) report.patient.emplace(p, tat_stats(std::move(v)));
  for (auto& [p, v] : lab) report.laboratory.emplace(p, tat_stats(std::move(v)));
  return report;
}

TatReport merge_reports(std::span<const TatReport> reports, std::string label) {
  auto pool = [&](TatKind kind) {
    std::map<Priority, std::vector<Seconds>> all;
    for (const auto& r : reports)
      for (const auto& [p, st] : r.of(kind)) all[p].insert(all[p].end(), st.ecdf.begin(), st.ecdf.end());
    std::map<Priority, TatStats> out;
    for (auto& [p, v] : all) out.emplace(p, tat_stats(std::move(v)));
    return out;
  };
  TatReport merged;
  merged.label = std::move(label);
  merged.patient = pool(TatKind::patient);
  merged.laboratory = pool(TatKind::laboratory);
  return merged;
}

std::vector<TatReport> daily_reports(std::span<const CompletionRecord> records,
                                     std::span<const Sample> samples) {
  std::unordered_map<SampleId, const CompletionRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.sample_id, &r);
  std::map<Seconds, std::pair<std::vector<CompletionRecord>, std::vector<Sample>>> days;
  for (const auto& s : samples) {
    auto it = by_id.find(s.id);
    if (it == by_id.end()) throw UsageError("sample " + std::to_string(s.id) + " has no record");
    auto& day = days[s.registration / kSecondsPerDay];
    day.first.push_back(*it->second);
    day.second.push_back(s);
  }
  std::vector<TatReport> out;
  for (const auto& [day, pair] : days)
    out.push_back(compute_report(pair.first, pair.second, "day " + std::to_string(day)));
  return out;
}

HierarchicalStats hierarchical_aggregate(std::span<const TatReport> daily, Priority priority,
                                         TatKind kind) {
  HierarchicalStats out;
  for (const auto& report : daily) {
    const auto& m = report.of(kind);
    auto it = m.find(priority);
    if (it == m.end()) continue;
    out.days.push_back({it->second.max, it->second.q95, it->second.mean});
  }
  if (out.days.empty()) return out;
  auto totals = [&](auto field) {
    HierarchicalStats::Totals t;
    t.max = -std::numeric_limits<double>::infinity();
    for (const auto& d : out.days) {
      const double v = static_cast<double>(field(d));
      t.max = std::max(t.max, v);
      t.mean += v;
    }
    t.mean /= static_cast<double>(out.days.size());
    return t;
  };
  out.of_max = totals([](const DailySummary& d) { return d.max; });
  out.of_q95 = totals([](const DailySummary& d) { return d.q95; });
  out.of_mean = totals([](const DailySummary& d) { return d.mean; });
  return out;
}

namespace {

nlohmann::ordered_json stats_json(const std::map<Priority, TatStats>& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (Priority p : kPrioritiesByImportance) {
    auto it = m.find(p);
    if (it == m.end()) continue;
    const auto& s = it->second;
    j[std::string(to_string(p))] = {{"count", s.count}, {"mean_s", s.mean},   {"median_s", s.median},
                                    {"q95_s", s.q95},   {"max_s", s.max},     {"ecdf_s", s.ecdf}};
  }
  return j;
}

std::map<Priority, TatStats> stats_from_json(const nlohmann::json& j) {
  std::map<Priority, TatStats> out;
  for (const auto& [key, value] : j.items()) {
    TatStats s;
    s.count = value.at("count").get<std::size_t>();
    s.mean = value.at("mean_s").get<double>();
    s.median = value.at("median_s").get<Seconds>();
    s.q95 = value.at("q95_s").get<Seconds>();
    s.max = value.at("max_s").get<Seconds>();
    s.ecdf = value.at("ecdf_s").get<std::vector<Seconds>>();
    out.emplace(parse_priority(key), std::move(s));
  }
  return out;
}

}  // namespace

std::string report_to_json(const TatReport& report) {
  nlohmann::ordered_json j;
  j["label"] = report.label;
  j["patient"] = stats_json(report.patient);
  j["laboratory"] = stats_json(report.laboratory);
  return j.dump(2);
}

TatReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TatReport r;
    r.label = j.value("label", "");
    r.patient = stats_from_json(j.at("patient"));
    r.laboratory = stats_from_json(j.at("laboratory"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
}

void write_report_json(const TatReport& report, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << report_to_json(report) << '\n';
  if (!f) throw IoError("write failed: " + path.string());
}

TatReport read_report_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return report_from_json(text);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<std::filesystem::path> ecdf_export(const TatReport& report,
                                               const std::filesystem::path& dir,
                                               const std::string& prefix) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (TatKind kind : {TatKind::patient, TatKind::laboratory}) {
    for (Priority p : kPrioritiesByImportance) {
      std::string name = prefix + std::string(to_string(kind)) + "_" + std::string(to_string(p));
      std::transform(name.begin(), name.end(), name.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      const auto path = dir / (name + ".csv");
      std::ofstream f(path);
      if (!f) throw IoError("cannot write " + path.string());
      f << "tat_seconds,cdf\n";
      const auto& m = report.of(kind);
      if (auto it = m.find(p); it != m.end()) {
        const auto& v = it->second.ecdf;
        for (std::size_t k = 0; k < v.size(); ++k)
          f << v[k] << ',' << csv::format_double(static_cast<double>(k + 1) / static_cast<double>(v.size()))
            << '\n';
      }
      if (!f) throw IoError("write failed: " + path.string());
      written.push_back(path);
    }
  }
  return written;
}

std::vector<Seconds> read_ecdf_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  csv::require_header(table, {"tat_seconds", "cdf"}, path);
  std::vector<Seconds> out;
  for (const auto& row : table.rows) out.push_back(csv::to_int(row[0], path));
  return out;
}

void write_compare_csv(std::span<const TatReport> reports, std::ostream& f) {
  f << "run,priority,tat_kind,count,mean_s,median_s,q95_s,max_s\n";
  for (const auto& r : reports) {
    for (Priority p : kPrioritiesByImportance) {
      for (TatKind kind : {TatKind::patient, TatKind::laboratory}) {
        f << r.label << ',' << to_string(p) << ',' << to_string(kind) << ',';
        const auto& m = r.of(kind);
        if (auto it = m.find(p); it != m.end())
          f << it->second.count << ',' << csv::format_double(it->second.mean) << ','
            << it->second.median << ',' << it->second.q95 << ',' << it->second.max << '\n';
        else
          f << "0,,,,\n";
      }
    }
  }
}

void write_compare_csv(std::span<const TatReport> reports, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  write_compare_csv(reports, f);
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace batchlab
