#include "batchlab/datastage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "batchlab/csv.hpp"
#include "batchlab/errors.hpp"

namespace batchlab {

void validate(const RawRecord& r) {
  if (r.registration < 0) throw DomainError("record " + std::to_string(r.id) + ": negative registration");
  if (r.admission < r.registration)
    throw DomainError("record " + std::to_string(r.id) + ": admission before registration");
  if (r.validation < r.admission)
    throw DomainError("record " + std::to_string(r.id) + ": validation before admission");
  if (r.processing <= 0) throw DomainError("record " + std::to_string(r.id) + ": processing <= 0");
}

void CleansingRules::validate() const {
  if (max_transport <= 0 || max_total <= 0 || vital_transport_cap <= 0 || top_wards == 0 ||
      min_obs_for_fit == 0)
    throw ConfigError("cleansing rules must be positive");
  if (!(vital_redraw.lb > 0 && vital_redraw.lb < vital_redraw.ub))
    throw ConfigError("vital redraw needs 0 < lb < ub");
}

std::vector<RawRecord> cleanse(std::span<const RawRecord> records, const CleansingRules& rules,
                               Rng& rng) {
  rules.validate();
  std::vector<RawRecord> kept;
  for (const auto& r : records) {
    validate(r);
    if (r.transport() > rules.max_transport) continue;
    if (r.validation - r.admission > rules.max_total) continue;
    kept.push_back(r);
    kept.back().ward = normalize_ward(r.ward);
  }

  std::uniform_real_distribution<double> redraw(rules.vital_redraw.lb, rules.vital_redraw.ub);
  for (auto& r : kept) {
    if (r.priority != Priority::vital || r.transport() <= rules.vital_transport_cap) continue;
    const Seconds transport = std::max<Seconds>(1, std::llround(redraw(rng)));
    const Seconds shift = r.registration + transport - r.admission;
    r.admission += shift;
    r.validation += shift;
  }

  std::map<std::string, std::size_t> volume;
  for (const auto& r : kept)
    if (r.priority != Priority::vital) ++volume[r.ward];
  std::vector<std::pair<std::string, std::size_t>> ranked(volume.begin(), volume.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::set<std::string> top;
  for (std::size_t i = 0; i < ranked.size() && i < rules.top_wards; ++i) top.insert(ranked[i].first);

  std::vector<RawRecord> out;
  for (auto& r : kept)
    if (r.priority == Priority::vital || top.count(r.ward)) out.push_back(std::move(r));
  return out;
}

TransportDistribution WardDistributions::lookup(const std::string& ward, Priority priority) const {
  if (auto it = entries.find({ward, priority}); it != entries.end()) return it->second;
  if (priority == Priority::vital && pooled_vital) return *pooled_vital;
  throw EstimationError("no transport distribution for ward '" + ward + "' priority " +
                        std::string(to_string(priority)));
}

VitalCdfTable WardDistributions::vital_cdfs() const {
  VitalCdfTable table;
  for (const auto& [key, dist] : entries)
    if (key.second == Priority::vital) table.by_ward.emplace(key.first, transport_cdf(dist));
  if (pooled_vital) table.fallback = to_cdf(*pooled_vital);
  return table;
}

namespace {

std::optional<UniformTransport> try_uniform(const std::vector<double>& obs) {
  if (obs.size() < 2) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(obs.begin(), obs.end());
  if (*lo <= 0 || *lo == *hi) return std::nullopt;
  return uniform_fit(obs);
}

}  // namespace

WardDistributions estimate_ward_distributions(std::span<const RawRecord> records,
                                              const CleansingRules& rules,
                                              std::span<const Priority> optional_classes) {
  rules.validate();
  std::map<std::pair<std::string, Priority>, std::vector<double>> obs;
  std::map<Priority, std::size_t> per_class;
  for (const auto& r : records) {
    validate(r);
    if (r.transport() <= 0) continue;
    obs[{normalize_ward(r.ward), r.priority}].push_back(static_cast<double>(r.transport()));
    ++per_class[r.priority];
  }
  for (Priority p : kPrioritiesByImportance) {
    const bool optional =
        std::find(optional_classes.begin(), optional_classes.end(), p) != optional_classes.end();
    if (!per_class[p] && !optional)
      throw EstimationError("no " + std::string(to_string(p)) + " records to estimate from");
  }

  WardDistributions out;
  std::vector<double> pooled;
  std::vector<double> all_vital;
  for (auto& [key, values] : obs) {
    if (key.second != Priority::vital) {
      out.entries.emplace(key, kde_fit(values));
      continue;
    }
    all_vital.insert(all_vital.end(), values.begin(), values.end());
    std::optional<UniformTransport> fit;
    if (values.size() >= rules.min_obs_for_fit) fit = try_uniform(values);
    if (fit) {
      out.entries.emplace(key, *fit);
    } else {
      out.pooled_wards.push_back(key.first);
      pooled.insert(pooled.end(), values.begin(), values.end());
    }
  }
  if (!out.pooled_wards.empty()) {
    out.pooled_vital = try_uniform(pooled);
    if (!out.pooled_vital) out.pooled_vital = try_uniform(all_vital);
    if (!out.pooled_vital)
      throw EstimationError("vital records too few or identical to fit a pooled distribution");
  }
  return out;
}

namespace {

std::string file_stem(const std::string& ward, Priority p) {
  std::string s;
  for (char c : ward) s += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  s += '_';
  for (char c : to_string(p)) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

void write_distribution_bundle(const WardDistributions& dists, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  nlohmann::ordered_json manifest;
  auto& entries = manifest["entries"] = nlohmann::ordered_json::array();
  std::set<std::string> used;
  for (const auto& [key, dist] : dists.entries) {
    std::string stem = file_stem(key.first, key.second);
    for (int k = 2; !used.insert(stem).second; ++k) stem = file_stem(key.first, key.second) + std::to_string(k);
    const std::string file = stem + ".csv";
    write_cdf_csv(transport_cdf(dist), dir / file);
    nlohmann::ordered_json e;
    e["ward"] = key.first;
    e["priority"] = std::string(to_string(key.second));
    e["file"] = file;
    if (const auto* u = std::get_if<UniformTransport>(&dist)) {
      e["kind"] = "uniform";
      e["lb_s"] = u->lb;
      e["ub_s"] = u->ub;
    } else if (const auto* k = std::get_if<KdeDensity>(&dist)) {
      e["kind"] = "kde";
      e["bandwidth_s"] = k->bandwidth;
      e["observations_s"] = k->observations;
    } else {
      e["kind"] = "cdf";
    }
    entries.push_back(std::move(e));
  }
  if (dists.pooled_vital) {
    write_cdf_csv(to_cdf(*dists.pooled_vital), dir / "pooled_vital.csv");
    manifest["pooled_vital"] = {{"lb_s", dists.pooled_vital->lb},
                                {"ub_s", dists.pooled_vital->ub},
                                {"file", "pooled_vital.csv"},
                                {"wards", dists.pooled_wards}};
  } else {
    manifest["pooled_vital"] = nullptr;
  }
  std::ofstream f(dir / "manifest.json");
  if (!f) throw IoError("cannot write " + (dir / "manifest.json").string());
  f << manifest.dump(2) << '\n';
}

WardDistributions read_distribution_bundle(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  WardDistributions out;
  try {
    for (const auto& e : manifest.at("entries")) {
      const std::string ward = normalize_ward(e.at("ward").get<std::string>());
      const Priority p = parse_priority(e.at("priority").get<std::string>());
      const std::string kind = e.at("kind").get<std::string>();
      TransportDistribution dist;
      if (kind == "uniform") {
        dist = UniformTransport{e.at("lb_s").get<double>(), e.at("ub_s").get<double>()};
      } else if (kind == "kde") {
        dist = KdeDensity{e.at("observations_s").get<std::vector<double>>(),
                          e.at("bandwidth_s").get<double>()};
      } else if (kind == "cdf") {
        dist = read_cdf_csv(dir / e.at("file").get<std::string>());
      } else {
        throw IoError(path.string() + ": unknown distribution kind '" + kind + "'");
      }
      out.entries.emplace(std::pair{ward, p}, std::move(dist));
    }
    const auto& pooled = manifest.at("pooled_vital");
    if (!pooled.is_null()) {
      out.pooled_vital = UniformTransport{pooled.at("lb_s").get<double>(), pooled.at("ub_s").get<double>()};
      out.pooled_wards = pooled.at("wards").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return out;
}

std::vector<std::vector<Sample>> synthesize_months(std::span<const Sample> base,
                                                   const WardDistributions& dists,
                                                   std::size_t months, std::uint64_t seed) {
  std::vector<std::vector<Sample>> out;
  out.reserve(months);
  for (std::size_t m = 0; m < months; ++m) {
    Rng rng = make_stream(seed, m);
    std::vector<Sample> month(base.begin(), base.end());
    for (auto& s : month) s.transport = sample_transport(dists.lookup(s.ward, s.priority), rng);
    out.push_back(std::move(month));
  }
  return out;
}

void SyntheticConfig::validate() const {
  if (days < 1) throw ConfigError("datagen.days must be >= 1");
  if (routine_per_day < 0 || statim_per_day < 0 || vital_per_day < 0)
    throw ConfigError("daily counts must be non-negative");
  if (wards < 1) throw ConfigError("datagen.wards must be >= 1");
  if (vital_wards < 1 || vital_wards > wards)
    throw ConfigError("datagen.vital_wards must lie in [1, wards]");
  double total = 0;
  for (double w : hourly_weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw ConfigError("hourly weights must be non-negative");
    total += w;
  }
  if (total <= 0) throw ConfigError("hourly weights must not all be zero");
  if (processing_choices.empty()) throw ConfigError("processing choices must not be empty");
  for (Seconds p : processing_choices)
    if (p <= 0) throw ConfigError("processing times must be positive");
}

namespace {

/// Hidden transport behaviour of one ward.
struct WardTruth {
  double volume = 1.0;
  double tube_share = 0.6;
  double tube_lo = 360, tube_hi = 1200;
  double courier_lo = 1500, courier_hi = 3600;
  double vital_lo = 300, vital_hi = 1320;
};

std::vector<WardTruth> make_world(const SyntheticConfig& cfg) {
  Rng rng = make_stream(cfg.world_seed, 0);
  auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  std::vector<WardTruth> wards(static_cast<std::size_t>(cfg.wards));
  for (auto& w : wards) {
    w.volume = u(0.5, 1.5);
    w.tube_share = u(0.4, 0.85);
    w.tube_lo = u(6, 9) * 60;
    w.tube_hi = u(12, 20) * 60;
    w.courier_lo = u(25, 35) * 60;
    w.courier_hi = u(45, 60) * 60;
    w.vital_lo = u(5, 9) * 60;
    w.vital_hi = u(12, 22) * 60;
  }
  return wards;
}

std::string ward_name(int index) {
  std::string s = std::to_string(index + 1);
  return "W" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

}  // namespace

std::vector<Sample> generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto world = make_world(cfg);
  Rng world_rng = make_stream(cfg.world_seed, 1);
  std::vector<int> ward_ids(world.size());
  for (std::size_t i = 0; i < ward_ids.size(); ++i) ward_ids[i] = static_cast<int>(i);
  std::shuffle(ward_ids.begin(), ward_ids.end(), world_rng);
  const std::vector<int> vital_wards(ward_ids.begin(), ward_ids.begin() + cfg.vital_wards);

  std::vector<double> volumes;
  for (const auto& w : world) volumes.push_back(w.volume);
  Rng rng = make_stream(seed, 0);
  std::discrete_distribution<int> pick_ward(volumes.begin(), volumes.end());
  std::uniform_int_distribution<std::size_t> pick_vital_ward(0, vital_wards.size() - 1);
  std::discrete_distribution<int> pick_hour(cfg.hourly_weights.begin(), cfg.hourly_weights.end());
  std::uniform_int_distribution<Seconds> pick_second(0, 3599);
  std::uniform_int_distribution<std::size_t> pick_p(0, cfg.processing_choices.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Sample> out;
  for (int day = 0; day < cfg.days; ++day) {
    const std::array<std::pair<Priority, int>, 3> counts{{{Priority::routine, cfg.routine_per_day},
                                                          {Priority::statim, cfg.statim_per_day},
                                                          {Priority::vital, cfg.vital_per_day}}};
    for (const auto& [priority, count] : counts) {
      for (int k = 0; k < count; ++k) {
        Sample s;
        s.priority = priority;
        s.registration = day * kSecondsPerDay + pick_hour(rng) * 3600 + pick_second(rng);
        const int w = priority == Priority::vital ? vital_wards[pick_vital_ward(rng)] : pick_ward(rng);
        const WardTruth& truth = world[static_cast<std::size_t>(w)];
        s.ward = ward_name(w);
        double t;
        if (priority == Priority::vital) {
          t = truth.vital_lo + unit(rng) * (truth.vital_hi - truth.vital_lo);
        } else if (unit(rng) < truth.tube_share) {
          t = truth.tube_lo + unit(rng) * (truth.tube_hi - truth.tube_lo);
        } else {
          t = truth.courier_lo + unit(rng) * (truth.courier_hi - truth.courier_lo);
        }
        s.transport = std::clamp<Seconds>(std::llround(t), 1, 12000);
        s.processing = cfg.processing_choices[pick_p(rng)];
        out.push_back(std::move(s));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Sample& a, const Sample& b) {
    return a.registration < b.registration;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<SampleId>(i + 1);
  return out;
}

std::vector<RawRecord> to_raw_records(std::span<const Sample> samples, Seconds cycle_time) {
  std::vector<RawRecord> out;
  out.reserve(samples.size());
  for (const auto& s : samples)
    out.push_back({s.id, s.ward, s.priority, s.registration, s.arrival(),
                   s.arrival() + cycle_time + s.processing, s.processing});
  return out;
}

std::vector<Sample> to_samples(std::span<const RawRecord> records) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    Sample s{r.id, r.registration, r.transport(), normalize_ward(r.ward), r.priority, r.processing};
    validate(s);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

const std::vector<std::string> kInstanceHeader{"sample_id",      "ward",        "priority",
                                               "registration_s", "transport_s", "processing_s"};
const std::vector<std::string> kRawHeader{"sample_id",   "ward",         "priority",
                                          "registration_s", "admission_s", "validation_s",
                                          "processing_s"};

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += v[i];
  }
  return s;
}

}  // namespace

void write_instance_csv(std::span<const Sample> samples, const std::filesystem::path& path) {
  auto f = open_out(path);
  f << join(kInstanceHeader) << '\n';
  for (const auto& s : samples)
    f << s.id << ',' << s.ward << ',' << to_string(s.priority) << ',' << s.registration << ','
      << s.transport << ',' << s.processing << '\n';
  if (!f) throw IoError("write failed: " + path.string());
}

std::vector<Sample> read_instance_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  csv::require_header(table, kInstanceHeader, path);
  std::vector<Sample> out;
  std::set<SampleId> ids;
  for (const auto& row : table.rows) {
    Sample s{csv::to_int(row[0], path), csv::to_int(row[3], path), csv::to_int(row[4], path),
             normalize_ward(row[1]), parse_priority(row[2]), csv::to_int(row[5], path)};
    validate(s);
    if (!ids.insert(s.id).second) throw IoError(path.string() + ": duplicate sample id " + row[0]);
    out.push_back(std::move(s));
  }
  return out;
}

void write_raw_csv(std::span<const RawRecord> records, const std::filesystem::path& path) {
  auto f = open_out(path);
  f << join(kRawHeader) << '\n';
  for (const auto& r : records)
    f << r.id << ',' << r.ward << ',' << to_string(r.priority) << ',' << r.registration << ','
      << r.admission << ',' << r.validation << ',' << r.processing << '\n';
  if (!f) throw IoError("write failed: " + path.string());
}

std::vector<RawRecord> read_raw_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  csv::require_header(table, kRawHeader, path);
  std::vector<RawRecord> out;
  for (const auto& row : table.rows) {
    RawRecord r{csv::to_int(row[0], path), normalize_ward(row[1]), parse_priority(row[2]),
                csv::to_int(row[3], path), csv::to_int(row[4], path), csv::to_int(row[5], path),
                csv::to_int(row[6], path)};
    validate(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace batchlab
