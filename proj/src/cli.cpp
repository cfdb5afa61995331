#include "batchlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "batchlab/errors.hpp"
#include "batchlab/report.hpp"

namespace batchlab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void check_keys(const json& section, const std::string& name,
                std::initializer_list<std::string_view> allowed) {
  if (!section.is_object()) throw ConfigError("config section '" + name + "' must be an object");
  for (const auto& [key, _] : section.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown config key '" + name + "." + key + "'");
}

template <class T>
void read_key(const json& section, const char* key, T& target, const std::string& where) {
  if (!section.contains(key)) return;
  try {
    target = section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

fs::path ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(std::string_view text, const char* what) {
  std::string t = trim(text);
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
    throw UsageError(std::string("bad ") + what + " '" + std::string(text) + "'");
  return v;
}

Seconds to_seconds(double v, const char* what) {
  if (v != std::floor(v)) throw UsageError(std::string(what) + " must be whole seconds");
  return static_cast<Seconds>(v);
}

VitalCdfTable load_vital_cdfs(const fs::path& dir) {
  return read_distribution_bundle(dir).vital_cdfs();
}

void write_run_outputs(const fs::path& dir, std::span<const CompletionRecord> records,
                       const TatReport& report) {
  ensure_dir(dir);
  write_completions_csv(records, dir / "completions.csv");
  write_report_json(report, dir / "report.json");
  ecdf_export(report, ensure_dir(dir / "ecdf"));
}

void print_summary(std::ostream& out, const TatReport& report) {
  out << "priority  count  median_min  q95_min  max_min\n";
  for (Priority p : kPrioritiesByImportance) {
    auto it = report.patient.find(p);
    if (it == report.patient.end()) continue;
    const auto& s = it->second;
    out << std::left << std::setw(9) << to_string(p) << std::right << std::setw(6) << s.count
        << std::fixed << std::setprecision(1) << std::setw(12) << s.median / 60.0 << std::setw(9)
        << s.q95 / 60.0 << std::setw(9) << s.max / 60.0 << '\n';
  }
  out.unsetf(std::ios::fixed);
}

// Options shared by the run-style subcommands. Flags only override the
// config file when they were given.
struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  Seconds delta = 0;
  CLI::Option* delta_opt = nullptr;
  int capacity = 0;
  CLI::Option* capacity_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    seed_opt = app->add_option("--seed", seed, "root seed (falls back to BATCHLAB_SEED)");
    delta_opt = app->add_option("--delta", delta, "centrifuge cycle time in seconds");
    capacity_opt = app->add_option("--capacity", capacity, "centrifuge capacity");
  }

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_run_config(config);
    if (delta_opt->count()) cfg.centrifuge.cycle_time = delta;
    if (capacity_opt->count()) cfg.centrifuge.capacity = capacity;
    try {
      cfg.centrifuge.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    return cfg;
  }

  std::uint64_t resolved_seed() const {
    return resolve_seed(seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt);
  }
};

struct PolicyFlags {
  std::string policy;
  CLI::Option* policy_opt = nullptr;
  std::string objective;
  CLI::Option* objective_opt = nullptr;
  std::string dists;

  void add(CLI::App* app, bool with_policy) {
    if (with_policy)
      policy_opt = app->add_option("--policy", policy, "fixed|threshold|lookahead|stochastic");
    objective_opt = app->add_option(
        "--objective", objective, "flow | tardiness:B | sq-tardiness:B | num-tardy:B (B in s)");
    app->add_option("--dists", dists, "distribution bundle directory (stochastic policy)");
  }

  void apply(RunConfig& cfg) const {
    if (policy_opt && policy_opt->count()) cfg.policy.kind = parse_policy_kind(policy);
    if (objective_opt->count()) cfg.policy.stochastic.objective = parse_objective_spec(objective);
  }

  std::optional<VitalCdfTable> cdfs(bool needed) const {
    if (dists.empty()) {
      if (needed) throw UsageError("the stochastic policy needs --dists");
      return std::nullopt;
    }
    return load_vital_cdfs(dists);
  }
};

int cmd_datagen(const CommonFlags& common, const std::string& out_dir, const std::string& raw_in,
                std::size_t months_flag, bool months_given, std::ostream& out) {
  RunConfig cfg = common.resolve();
  if (months_given) cfg.months = months_flag;
  const std::uint64_t seed = common.resolved_seed();
  const CleansingRules rules;

  std::vector<RawRecord> raw;
  std::vector<Priority> optional_classes;
  if (!raw_in.empty()) {
    raw = read_raw_csv(raw_in);
  } else {
    raw = to_raw_records(generate_synthetic(cfg.datagen, seed), cfg.centrifuge.cycle_time);
    if (cfg.datagen.vital_per_day == 0) optional_classes.push_back(Priority::vital);
  }
  // Separate stream so cleansing never shares draws with the month replicas.
  Rng rng = make_stream(seed, 1u << 20);
  auto cleansed = cleanse(raw, rules, rng);
  auto dists = estimate_ward_distributions(cleansed, rules, optional_classes);
  auto base = to_samples(cleansed);

  fs::path dir = ensure_dir(out_dir);
  write_raw_csv(cleansed, dir / "raw.csv");
  write_instance_csv(base, dir / "base.csv");
  write_distribution_bundle(dists, dir / "dists");
  auto replicas = synthesize_months(base, dists, cfg.months, seed);
  for (std::size_t m = 0; m < replicas.size(); ++m) {
    std::ostringstream name;
    name << "month_" << std::setw(3) << std::setfill('0') << m << ".csv";
    write_instance_csv(replicas[m], dir / name.str());
  }
  out << "records " << raw.size() << " kept " << cleansed.size() << " months " << replicas.size()
      << " -> " << dir.string() << '\n';
  return 0;
}

int cmd_simulate(const CommonFlags& common, const PolicyFlags& pf, const std::string& instance,
                 const std::string& out_dir, const std::string& label, std::ostream& out) {
  RunConfig cfg = common.resolve();
  pf.apply(cfg);
  cfg.policy.stochastic.validate();
  auto cdfs = pf.cdfs(cfg.policy.kind == PolicyKind::stochastic);
  auto samples = read_instance_csv(instance);
  auto records = simulate_daily(samples, cfg.policy, cdfs ? &*cdfs : nullptr, cfg.centrifuge);
  auto report = compute_report(records, samples,
                               label.empty() ? std::string(to_string(cfg.policy.kind)) : label);
  write_run_outputs(out_dir, records, report);
  print_summary(out, report);
  return 0;
}

int cmd_offline(const CommonFlags& common, const std::string& instance, const std::string& stages,
                const std::string& out_dir, const std::string& label, std::ostream& out) {
  RunConfig cfg = common.resolve();
  StageRoutines routines = stages.empty() ? StageRoutines{} : parse_stage_spec(stages);
  auto samples = read_instance_csv(instance);
  auto records = solve_offline_daily(samples, cfg.centrifuge, routines);
  auto report = compute_report(records, samples, label.empty() ? "offline" : label);
  write_run_outputs(out_dir, records, report);
  print_summary(out, report);
  return 0;
}

struct SweepPoint {
  double value = 0.0;
  PolicyKind policy = PolicyKind::lookahead;
  TatReport report;
};

std::string format_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

int cmd_sweep(const CommonFlags& common, const PolicyFlags& pf, const std::string& param,
              const std::string& values_text, const std::vector<std::string>& instances,
              const std::vector<std::string>& policy_names, const std::string& out_dir,
              unsigned threads, std::ostream& out) {
  RunConfig cfg = common.resolve();
  pf.apply(cfg);
  if (param != "delta" && param != "capacity" && param != "beta")
    throw UsageError("unknown sweep parameter '" + param + "' (choose delta, capacity, beta)");
  auto values = parse_sweep_values(values_text);
  std::vector<PolicyKind> policies;
  if (policy_names.empty()) policies.assign(kAllPolicies.begin(), kAllPolicies.end());
  for (const auto& n : policy_names) policies.push_back(parse_policy_kind(n));
  const bool any_stochastic =
      std::find(policies.begin(), policies.end(), PolicyKind::stochastic) != policies.end();
  auto cdfs = pf.cdfs(any_stochastic);

  std::vector<std::vector<Sample>> months;
  for (const auto& path : instances) months.push_back(read_instance_csv(path));

  std::vector<SweepPoint> points;
  for (double v : values)
    for (PolicyKind k : policies) points.push_back({v, k, {}});

  std::vector<std::function<void()>> jobs;
  for (auto& pt : points) {
    RunConfig local = cfg;
    local.policy.kind = pt.policy;
    if (param == "delta") local.centrifuge.cycle_time = to_seconds(pt.value, "delta");
    if (param == "capacity") local.centrifuge.capacity = static_cast<int>(to_seconds(pt.value, "capacity"));
    if (param == "beta") local.policy.stochastic.objective.beta = to_seconds(pt.value, "beta");
    try {
      local.centrifuge.validate();
      local.policy.stochastic.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    jobs.push_back([&pt, local, &months, &cdfs] {
      std::vector<TatReport> per_month;
      for (const auto& samples : months) {
        auto rec = simulate_daily(samples, local.policy, cdfs ? &*cdfs : nullptr, local.centrifuge);
        per_month.push_back(compute_report(rec, samples));
      }
      pt.report = merge_reports(per_month, std::string(to_string(pt.policy)));
    });
  }
  run_parallel(std::move(jobs), threads);

  fs::path dir = ensure_dir(out_dir);
  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw IoError("cannot write " + (dir / "sweep.csv").string());
  csv << "param,value,policy,priority,tat_kind,count,mean_s,median_s,q95_s,max_s\n";
  for (const auto& pt : points) {
    for (TatKind kind : {TatKind::patient, TatKind::laboratory}) {
      for (Priority p : kPrioritiesByImportance) {
        csv << param << ',' << format_value(pt.value) << ',' << to_string(pt.policy) << ','
            << to_string(p) << ',' << to_string(kind) << ',';
        const auto& m = pt.report.of(kind);
        auto it = m.find(p);
        if (it == m.end()) {
          csv << "0,,,,\n";
          continue;
        }
        const auto& s = it->second;
        csv << s.count << ',' << std::setprecision(17) << s.mean << ',' << s.median << ','
            << s.q95 << ',' << s.max << '\n';
      }
    }
  }
  if (!csv) throw IoError("write failed: " + (dir / "sweep.csv").string());

  out << "param value policy vital_q95_min\n";
  for (const auto& pt : points) {
    auto it = pt.report.patient.find(Priority::vital);
    out << param << ' ' << format_value(pt.value) << ' ' << to_string(pt.policy) << ' ';
    if (it == pt.report.patient.end())
      out << "-\n";
    else
      out << std::fixed << std::setprecision(1) << it->second.q95 / 60.0 << '\n';
    out.unsetf(std::ios::fixed);
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& runs, const std::string& out_path,
                std::ostream& out) {
  std::vector<TatReport> reports;
  for (const auto& run : runs) {
    fs::path p(run);
    fs::path file = fs::is_directory(p) ? p / "report.json" : p;
    TatReport r = read_report_json(file);
    if (r.label.empty()) r.label = fs::is_directory(p) ? p.filename().string() : p.stem().string();
    reports.push_back(std::move(r));
  }
  if (out_path.empty() || out_path == "-") {
    write_compare_csv(reports, out);
  } else {
    if (fs::path(out_path).has_parent_path()) ensure_dir(fs::path(out_path).parent_path());
    write_compare_csv(reports, out_path);
  }
  return 0;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  int code) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  err << j.dump() << '\n';
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "config", {"centrifuge", "policy", "stochastic", "datagen"});
  RunConfig cfg;

  if (root.contains("centrifuge")) {
    const auto& c = root["centrifuge"];
    check_keys(c, "centrifuge", {"capacity", "cycle_time_s"});
    read_key(c, "capacity", cfg.centrifuge.capacity, "centrifuge");
    read_key(c, "cycle_time_s", cfg.centrifuge.cycle_time, "centrifuge");
  }

  if (root.contains("policy")) {
    const auto& p = root["policy"];
    check_keys(p, "policy", {"name", "vital_timeout_s", "nonvital_timeout_s", "window_s"});
    std::string name;
    read_key(p, "name", name, "policy");
    if (!name.empty()) {
      try {
        cfg.policy.kind = parse_policy_kind(name);
      } catch (const UsageError& e) {
        throw ConfigError(e.what());
      }
    }
    ThresholdConfig& t = cfg.policy.threshold;
    read_key(p, "vital_timeout_s", t.vital_timeout, "policy");
    read_key(p, "nonvital_timeout_s", t.nonvital_timeout, "policy");
    cfg.policy.lookahead.thresholds = t;
    if (p.contains("window_s") && !p["window_s"].is_null()) {
      Seconds w = 0;
      read_key(p, "window_s", w, "policy");
      cfg.policy.lookahead.window = w;
    }
  }
  cfg.policy.stochastic.fallback = cfg.policy.lookahead;

  if (root.contains("stochastic")) {
    const auto& s = root["stochastic"];
    check_keys(s, "stochastic", {"D_s", "M", "objective", "beta_s", "trigger"});
    StochasticConfig& st = cfg.policy.stochastic;
    read_key(s, "D_s", st.deadline, "stochastic");
    read_key(s, "M", st.penalty, "stochastic");
    std::string objective;
    read_key(s, "objective", objective, "stochastic");
    // Either "tardiness:900" or "tardiness" with a separate beta_s.
    const bool has_beta = s.contains("beta_s");
    try {
      if (objective.find(':') != std::string::npos || (!objective.empty() && !has_beta))
        st.objective = parse_objective_spec(objective);
      else if (!objective.empty())
        st.objective.kind = parse_objective_kind(objective);
    } catch (const UsageError& e) {
      throw ConfigError(e.what());
    }
    read_key(s, "beta_s", st.objective.beta, "stochastic");
    st.objective.validate();
    std::string trigger;
    read_key(s, "trigger", trigger, "stochastic");
    if (trigger == "available")
      st.require_available_vital = true;
    else if (trigger == "registered")
      st.require_available_vital = false;
    else if (!trigger.empty())
      throw ConfigError("stochastic.trigger must be 'available' or 'registered'");
  }

  if (root.contains("datagen")) {
    const auto& d = root["datagen"];
    check_keys(d, "datagen",
               {"days", "routine_per_day", "statim_per_day", "vital_per_day", "wards",
                "vital_wards", "hourly_weights", "processing_s", "world_seed", "months"});
    SyntheticConfig& g = cfg.datagen;
    read_key(d, "days", g.days, "datagen");
    read_key(d, "routine_per_day", g.routine_per_day, "datagen");
    read_key(d, "statim_per_day", g.statim_per_day, "datagen");
    read_key(d, "vital_per_day", g.vital_per_day, "datagen");
    read_key(d, "wards", g.wards, "datagen");
    read_key(d, "vital_wards", g.vital_wards, "datagen");
    if (d.contains("hourly_weights")) {
      std::vector<double> w;
      read_key(d, "hourly_weights", w, "datagen");
      if (w.size() != 24) throw ConfigError("datagen.hourly_weights needs 24 entries");
      std::copy(w.begin(), w.end(), g.hourly_weights.begin());
    }
    read_key(d, "processing_s", g.processing_choices, "datagen");
    read_key(d, "world_seed", g.world_seed, "datagen");
    read_key(d, "months", cfg.months, "datagen");
  }

  cfg.policy.threshold.validate();
  cfg.policy.lookahead.validate();
  cfg.policy.stochastic.validate();
  cfg.datagen.validate();
  try {
    cfg.centrifuge.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

ObjectiveSpec parse_objective_spec(std::string_view text) {
  ObjectiveSpec spec;
  auto colon = text.find(':');
  spec.kind = parse_objective_kind(trim(text.substr(0, colon)));
  if (colon != std::string_view::npos) {
    if (spec.kind == ObjectiveKind::flow_time) throw UsageError("flow takes no beta");
    spec.beta = to_seconds(parse_number(text.substr(colon + 1), "beta"), "beta");
  } else if (spec.kind != ObjectiveKind::flow_time) {
    throw UsageError("objective '" + std::string(text) + "' needs a beta, e.g. tardiness:600");
  }
  spec.validate();
  return spec;
}

StageRoutines parse_stage_spec(std::string_view text) {
  StageRoutines r;
  std::string s(text);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("stage '" + item + "' is not key=routine");
    std::string key = trim(std::string_view(item).substr(0, eq));
    StageRoutine routine = parse_stage_routine(trim(std::string_view(item).substr(eq + 1)));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (key == "v" || key == "vital")
      r.vital = routine;
    else if (key == "s" || key == "statim")
      r.statim = routine;
    else if (key == "r" || key == "routine")
      r.routine = routine;
    else
      throw UsageError("unknown stage '" + key + "' (use v, s, r)");
  }
  return r;
}

std::vector<double> parse_sweep_values(std::string_view text) {
  std::vector<double> values;
  auto dots = text.find("..");
  if (dots != std::string_view::npos) {
    auto colon = text.find(':', dots);
    if (colon == std::string_view::npos) throw UsageError("range needs a step: lo..hi:step");
    double lo = parse_number(text.substr(0, dots), "range start");
    double hi = parse_number(text.substr(dots + 2, colon - dots - 2), "range end");
    double step = parse_number(text.substr(colon + 1), "range step");
    if (step <= 0 || hi < lo) throw UsageError("empty range '" + std::string(text) + "'");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) values.push_back(lo + static_cast<double>(i) * step);
  } else {
    std::string s(text);
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(parse_number(item, "value"));
  }
  if (values.empty()) throw UsageError("no sweep values");
  return values;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("BATCHLAB_SEED"); env && *env) {
    std::string s = trim(env);
    char* end = nullptr;
    unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || end != s.c_str() + s.size())
      throw ConfigError("BATCHLAB_SEED must be a non-negative integer, got '" + s + "'");
    return v;
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Centrifuge batching experiments for laboratory samples", "batchlab"};
  app.require_subcommand(1);

  CommonFlags dg_common;
  std::string dg_out, dg_raw;
  std::size_t dg_months = 1;
  auto* datagen = app.add_subcommand("datagen", "cleanse data, fit distributions, synthesize months");
  dg_common.add(datagen);
  datagen->add_option("--out", dg_out, "output directory")->required();
  datagen->add_option("--raw", dg_raw, "raw record CSV to start from instead of synthetic data")
      ->check(CLI::ExistingFile);
  auto* dg_months_opt = datagen->add_option("--months", dg_months, "number of synthesized months");

  CommonFlags sim_common;
  PolicyFlags sim_policy;
  std::string sim_instance, sim_out, sim_label;
  auto* simulate = app.add_subcommand("simulate", "run one policy through the simulator");
  sim_common.add(simulate);
  sim_policy.add(simulate, true);
  simulate->add_option("--instance", sim_instance, "instance CSV")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "output directory")->required();
  simulate->add_option("--label", sim_label, "run label in the report");

  CommonFlags off_common;
  std::string off_instance, off_stages, off_out, off_label;
  auto* offline = app.add_subcommand("offline", "hierarchical perfect-knowledge optimization");
  off_common.add(offline);
  offline->add_option("--instance", off_instance, "instance CSV")->required()->check(CLI::ExistingFile);
  offline->add_option("--stages", off_stages, "stage routines, e.g. v=sumtat,s=maxtat,r=maxtat");
  offline->add_option("--out", off_out, "output directory")->required();
  offline->add_option("--label", off_label, "run label in the report");

  CommonFlags sw_common;
  PolicyFlags sw_policy;
  std::string sw_param = "delta", sw_values, sw_out;
  std::vector<std::string> sw_instances, sw_policies;
  unsigned sw_threads = 0;
  auto* sweep = app.add_subcommand("sweep", "policy reports over a parameter grid");
  sw_common.add(sweep);
  sw_policy.add(sweep, false);
  sweep->add_option("--param", sw_param, "delta | capacity | beta");
  sweep->add_option("--values", sw_values, "lo..hi:step or a comma list")->required();
  sweep->add_option("--instance", sw_instances, "instance CSVs, pooled")->required()->check(CLI::ExistingFile);
  sweep->add_option("--policies", sw_policies, "policies to run (default all)")->delimiter(',');
  sweep->add_option("--threads", sw_threads, "worker threads (0 = all cores)");
  sweep->add_option("--out", sw_out, "output directory")->required();

  std::vector<std::string> cmp_runs;
  std::string cmp_out;
  auto* compare = app.add_subcommand("compare", "merge run reports into one table");
  compare->add_option("--runs", cmp_runs, "run directories or report JSON files")->required();
  compare->add_option("--out", cmp_out, "output CSV (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what(), 2);
    return 2;
  }

  try {
    if (datagen->parsed())
      return cmd_datagen(dg_common, dg_out, dg_raw, dg_months, dg_months_opt->count() > 0, out);
    if (simulate->parsed())
      return cmd_simulate(sim_common, sim_policy, sim_instance, sim_out, sim_label, out);
    if (offline->parsed()) return cmd_offline(off_common, off_instance, off_stages, off_out, off_label, out);
    if (sweep->parsed())
      return cmd_sweep(sw_common, sw_policy, sw_param, sw_values, sw_instances, sw_policies, sw_out,
                       sw_threads, out);
    if (compare->parsed()) return cmd_compare(cmp_runs, cmp_out, out);
  } catch (const UsageError& e) {
    report_error(err, e.kind(), e.what(), 2);
    return 2;
  } catch (const ConfigError& e) {
    report_error(err, e.kind(), e.what(), 2);
    return 2;
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what(), 1);
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what(), 1);
    return 1;
  }
  return 2;
}

}  // namespace batchlab
