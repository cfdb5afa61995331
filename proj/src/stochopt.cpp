#include "batchlab/stochopt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "batchlab/errors.hpp"

namespace batchlab {

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::flow_time: return "flow_time";
    case ObjectiveKind::total_tardiness: return "total_tardiness";
    case ObjectiveKind::squared_tardiness: return "squared_tardiness";
    case ObjectiveKind::num_tardy: return "num_tardy";
  }
  return "?";
}

ObjectiveKind parse_objective_kind(std::string_view text) {
  std::string s(text);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::replace(s.begin(), s.end(), '-', '_');
  if (s == "flow_time" || s == "flow") return ObjectiveKind::flow_time;
  if (s == "total_tardiness" || s == "tardiness") return ObjectiveKind::total_tardiness;
  if (s == "squared_tardiness" || s == "sq_tardiness") return ObjectiveKind::squared_tardiness;
  if (s == "num_tardy") return ObjectiveKind::num_tardy;
  throw UsageError("unknown objective '" + std::string(text) + "'");
}

void ObjectiveSpec::validate() const {
  if (beta < 0) throw ConfigError("beta must be non-negative");
}

double ObjectiveSpec::cost(double flow) const noexcept {
  const double late = flow - static_cast<double>(beta);
  switch (kind) {
    case ObjectiveKind::flow_time: return flow;
    case ObjectiveKind::total_tardiness: return std::max(0.0, late);
    case ObjectiveKind::squared_tardiness: return late > 0 ? late * late : 0.0;
    case ObjectiveKind::num_tardy: return late > 0 ? 1.0 : 0.0;
  }
  return flow;
}

void StochInstance::validate() const {
  centrifuge.validate();
  objective.validate();
  if (penalty < 0) throw DomainError("penalty weight must be non-negative");
  if (deadline < 0) throw DomainError("soft deadline must be non-negative");
  for (const auto& a : available) {
    if (a.registration > now) throw DomainError("available vital registered in the future");
    if (a.processing <= 0) throw DomainError("processing time must be positive");
  }
  for (const auto& v : transit) {
    if (v.registration > now) throw DomainError("transiting vital registered in the future");
    if (v.processing <= 0) throw DomainError("processing time must be positive");
  }
}

Seconds StochInstance::earliest_start() const noexcept {
  return last_start ? std::max(now, *last_start + centrifuge.cycle_time) : now;
}

std::vector<SampleId> StochSolution::first_batch_ids(const StochInstance& inst) const {
  std::vector<SampleId> ids;
  for (std::size_t i = 0; i < inst.available.size(); ++i)
    if (first_batch[i]) ids.push_back(inst.available[i].id);
  return ids;
}

double first_run_probability(const TransitVital& j, double s1, bool forced_second) noexcept {
  if (forced_second) return 0.0;
  return std::clamp(j.cdf.eval(s1 - static_cast<double>(j.registration)), 0.0, 1.0);
}

namespace {

constexpr double kFeasTol = 1e-9;

struct Parts {
  double cost = 0.0;
  double penalty = 0.0;
  double load = 0.0;  // left-hand side of the expected capacity constraint
};

Parts evaluate(const StochInstance& inst, double s1, double s2, const std::vector<bool>& first,
               const std::vector<bool>& forced) {
  const auto& obj = inst.objective;
  const double d = static_cast<double>(inst.deadline);
  const double delta = static_cast<double>(inst.centrifuge.cycle_time);
  Parts out;
  for (std::size_t i = 0; i < inst.available.size(); ++i) {
    const auto& a = inst.available[i];
    const double start = first[i] ? s1 : s2;
    const double flow = start + delta + static_cast<double>(a.processing - a.registration);
    out.cost += obj.cost(flow);
    out.penalty += std::max(0.0, flow - d);
    if (first[i]) out.load += 1.0;
  }
  for (std::size_t i = 0; i < inst.transit.size(); ++i) {
    const auto& v = inst.transit[i];
    const double q = first_run_probability(v, s1, forced[i]);
    const double base = delta + static_cast<double>(v.processing - v.registration);
    const double f1 = s1 + base;
    const double f2 = s2 + base;
    out.cost += q * obj.cost(f1) + (1.0 - q) * obj.cost(f2);
    out.penalty += std::max(0.0, q * f1 + (1.0 - q) * f2 - d);
    out.load += q;
  }
  return out;
}

// Cubic in a local variable u = s1 - origin.
using Poly = std::array<double, 4>;

Poly operator+(Poly a, const Poly& b) {
  for (int i = 0; i < 4; ++i) a[i] += b[i];
  return a;
}
Poly operator*(double k, Poly a) {
  for (auto& c : a) c *= k;
  return a;
}
Poly mul(const Poly& a, const Poly& b) {
  Poly r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j) r[i + j] += a[i] * b[j];
  return r;
}
Poly linear(double c0, double c1) { return {c0, c1, 0, 0}; }

/// Cost of a flow time u + c on a piece where its branch is known from `mid`.
Poly cost_poly(const ObjectiveSpec& obj, double c, double mid) {
  const double late0 = c - static_cast<double>(obj.beta);
  switch (obj.kind) {
    case ObjectiveKind::flow_time: return linear(c, 1);
    case ObjectiveKind::total_tardiness: return mid + late0 > 0 ? linear(late0, 1) : Poly{};
    case ObjectiveKind::squared_tardiness:
      return mid + late0 > 0 ? Poly{late0 * late0, 2 * late0, 1, 0} : Poly{};
    case ObjectiveKind::num_tardy: return mid + late0 > 0 ? linear(1, 0) : Poly{};
  }
  return {};
}

/// First-run probability of a transiting vital as a polynomial in u on the
/// piece containing s1 = origin + mid.
Poly probability_poly(const TransitVital& v, bool forced, double origin, double mid) {
  if (forced) return {};
  const double x = origin + mid - static_cast<double>(v.registration);
  const auto pts = v.cdf.points();
  if (x <= pts.front().x) return {};
  if (x >= pts.back().x) return linear(1, 0);
  auto hi = std::upper_bound(pts.begin(), pts.end(), x,
                             [](double value, const CdfPoint& p) { return value < p.x; });
  auto lo = hi - 1;
  const double slope = (hi->F - lo->F) / (hi->x - lo->x);
  // F(s1 - r) = F_lo + slope * (origin + u - r - x_lo)
  const double at0 = lo->F + slope * (origin - static_cast<double>(v.registration) - lo->x);
  return linear(at0, slope);
}

/// Objective as a polynomial on the open piece (origin, origin + width).
Poly piece_poly(const StochInstance& inst, const std::vector<bool>& first,
                const std::vector<bool>& forced, double origin, double width) {
  const double mid = 0.5 * width;
  const double delta = static_cast<double>(inst.centrifuge.cycle_time);
  const double d = static_cast<double>(inst.deadline);
  Poly total{};
  for (std::size_t i = 0; i < inst.available.size(); ++i) {
    const auto& a = inst.available[i];
    const double c =
        origin + (first[i] ? delta : 2 * delta) + static_cast<double>(a.processing - a.registration);
    total = total + cost_poly(inst.objective, c, mid);
    if (mid + c - d > 0) total = total + inst.penalty * linear(c - d, 1);
  }
  for (std::size_t i = 0; i < inst.transit.size(); ++i) {
    const auto& v = inst.transit[i];
    const double base = static_cast<double>(v.processing - v.registration);
    const double c1 = origin + delta + base;
    const double c2 = origin + 2 * delta + base;
    const Poly q = probability_poly(v, forced[i], origin, mid);
    const Poly g1 = cost_poly(inst.objective, c1, mid);
    const Poly g2 = cost_poly(inst.objective, c2, mid);
    // q * g1 + (1 - q) * g2
    total = total + g2 + mul(q, g1 + (-1.0) * g2);
    // expected flow u + c2 - delta * q
    const Poly expected = linear(c2 - d, 1) + (-delta) * q;
    const double at_mid = expected[0] + expected[1] * mid;
    if (at_mid > 0) total = total + inst.penalty * expected;
  }
  return total;
}

std::vector<double> stationary_points(const Poly& p) {
  const double a = 3 * p[3], b = 2 * p[2], c = p[1];
  std::vector<double> roots;
  if (a == 0.0) {
    if (b != 0.0) roots.push_back(-c / b);
    return roots;
  }
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return roots;
  const double sq = std::sqrt(disc);
  // Numerically stable pair.
  const double qv = -0.5 * (b + std::copysign(sq, b));
  if (qv != 0.0) {
    roots.push_back(qv / a);
    roots.push_back(c / qv);
  } else {
    roots.push_back(-b / (2 * a));
  }
  return roots;
}

/// Every point where some term of the objective may change its formula.
std::vector<double> breakpoints(const StochInstance& inst, const std::vector<bool>& first,
                                const std::vector<bool>& forced) {
  const double delta = static_cast<double>(inst.centrifuge.cycle_time);
  const double d = static_cast<double>(inst.deadline);
  const double beta = static_cast<double>(inst.objective.beta);
  const bool kinked = inst.objective.kind != ObjectiveKind::flow_time;
  std::vector<double> out;
  for (std::size_t i = 0; i < inst.available.size(); ++i) {
    const auto& a = inst.available[i];
    const double c =
        (first[i] ? delta : 2 * delta) + static_cast<double>(a.processing - a.registration);
    out.push_back(d - c);
    if (kinked) out.push_back(beta - c);
  }
  for (std::size_t i = 0; i < inst.transit.size(); ++i) {
    const auto& v = inst.transit[i];
    const double r = static_cast<double>(v.registration);
    const double base = static_cast<double>(v.processing) - r;
    const double c1 = delta + base;
    const double c2 = 2 * delta + base;
    if (kinked) {
      out.push_back(beta - c1);
      out.push_back(beta - c2);
    }
    out.push_back(d - c2);
    if (forced[i]) continue;
    out.push_back(d - c1);
    const auto pts = v.cdf.points();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      out.push_back(r + pts[k].x);
      if (k + 1 == pts.size()) break;
      // Root of the expected-flow deadline term inside this CDF segment.
      const double slope = (pts[k + 1].F - pts[k].F) / (pts[k + 1].x - pts[k].x);
      const double lead = 1.0 - delta * slope;
      if (lead == 0.0) continue;
      const double root = (d - c2 + delta * pts[k].F - delta * slope * (r + pts[k].x)) / lead;
      if (root >= r + pts[k].x && root <= r + pts[k + 1].x) out.push_back(root);
    }
  }
  return out;
}

double load_at(const StochInstance& inst, const std::vector<bool>& first,
               const std::vector<bool>& forced, double s1) {
  double load = 0.0;
  for (bool b : first) load += b ? 1.0 : 0.0;
  for (std::size_t i = 0; i < inst.transit.size(); ++i)
    load += first_run_probability(inst.transit[i], s1, forced[i]);
  return load;
}

struct AssignmentBest {
  bool feasible = false;
  Seconds s1 = 0;
  double objective = std::numeric_limits<double>::infinity();
  std::size_t pieces = 0;
};

bool strictly_less(double a, double b) {
  if (std::isinf(b)) return a < b;
  return a < b - 1e-9 * (1.0 + std::abs(b));
}

AssignmentBest optimize_assignment(const StochInstance& inst, const std::vector<bool>& first,
                                   const std::vector<bool>& forced, Seconds lo, Seconds hi) {
  AssignmentBest best;
  const double cap = static_cast<double>(inst.centrifuge.capacity) + kFeasTol;
  if (load_at(inst, first, forced, static_cast<double>(lo)) > cap) return best;
  // The load only grows with s1, so the feasible starts form [lo, top].
  Seconds top = hi;
  if (load_at(inst, first, forced, static_cast<double>(hi)) > cap) {
    Seconds a = lo, b = hi;  // load(a) ok, load(b) too high
    while (b - a > 1) {
      const Seconds m = a + (b - a) / 2;
      (load_at(inst, first, forced, static_cast<double>(m)) > cap ? b : a) = m;
    }
    top = a;
  }
  best.feasible = true;

  std::vector<double> cuts{static_cast<double>(lo), static_cast<double>(top)};
  for (double b : breakpoints(inst, first, forced))
    if (b > lo && b < top) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Seconds> candidates;
  auto add = [&](double x) {
    for (double v : {std::floor(x) - 1, std::floor(x), std::ceil(x), std::ceil(x) + 1}) {
      if (v < lo || v > top) continue;
      candidates.push_back(static_cast<Seconds>(v));
    }
  };
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    add(a);
    add(b);
    if (b - a <= 64) {
      for (double v = std::ceil(a); v <= b; v += 1) candidates.push_back(static_cast<Seconds>(v));
      continue;
    }
    const Poly p = piece_poly(inst, first, forced, a, b - a);
    for (double u : stationary_points(p))
      if (u > 0 && u < b - a) add(a + u);
  }
  if (cuts.size() == 1) add(cuts.front());
  best.pieces = cuts.size() > 1 ? cuts.size() - 1 : 1;

  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  const double delta = static_cast<double>(inst.centrifuge.cycle_time);
  for (Seconds s : candidates) {
    const double x = static_cast<double>(s);
    const Parts parts = evaluate(inst, x, x + delta, first, forced);
    const double value = parts.cost + inst.penalty * parts.penalty;
    if (strictly_less(value, best.objective)) {
      best.objective = value;
      best.s1 = s;
    }
  }
  return best;
}

nlohmann::json instance_json(const StochInstance& inst) {
  nlohmann::json j;
  j["now"] = inst.now;
  j["last_start"] = inst.last_start ? nlohmann::json(*inst.last_start) : nlohmann::json(nullptr);
  j["capacity"] = inst.centrifuge.capacity;
  j["cycle_time"] = inst.centrifuge.cycle_time;
  j["deadline"] = inst.deadline;
  j["penalty"] = inst.penalty;
  j["objective"] = std::string(to_string(inst.objective.kind));
  j["beta"] = inst.objective.beta;
  auto& av = j["available"] = nlohmann::json::array();
  for (const auto& a : inst.available)
    av.push_back({{"id", a.id}, {"registration", a.registration}, {"processing", a.processing}});
  auto& tr = j["transit"] = nlohmann::json::array();
  for (const auto& v : inst.transit) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : v.cdf.points()) pts.push_back({p.x, p.F});
    tr.push_back({{"id", v.id},
                  {"registration", v.registration},
                  {"processing", v.processing},
                  {"cdf", pts}});
  }
  return j;
}

}  // namespace

double objective_value(const StochInstance& inst, const StochCandidate& cand) {
  if (cand.first_batch.size() != inst.available.size() ||
      cand.second_forced.size() != inst.transit.size())
    throw DomainError("candidate does not match the instance");
  if (cand.s1 < static_cast<double>(inst.earliest_start()) - kFeasTol)
    throw DomainError("first start precedes max(now, last start + cycle)");
  if (cand.s2 < cand.s1 + static_cast<double>(inst.centrifuge.cycle_time) - kFeasTol)
    throw DomainError("second start precedes first start + cycle");
  const Parts parts = evaluate(inst, cand.s1, cand.s2, cand.first_batch, cand.second_forced);
  if (parts.load > static_cast<double>(inst.centrifuge.capacity) + kFeasTol)
    throw DomainError("expected first-run load exceeds capacity");
  return parts.cost + inst.penalty * parts.penalty;
}

StochSolution solve(const StochInstance& inst, const SolveOptions& options) {
  inst.validate();
  if (inst.available.empty() && inst.transit.empty())
    throw UsageError("stochastic model needs at least one vital sample");
  const std::size_t na = inst.available.size();
  const std::size_t nt = inst.transit.size();
  const std::size_t bits = na + nt;
  if (bits >= 63 || (std::size_t{1} << bits) > options.max_assignments)
    throw InstanceTooLarge(std::to_string(bits) + " vital samples give too many assignments");

  const Seconds lo = inst.earliest_start();
  Seconds hi = lo;
  for (const auto& v : inst.transit)
    hi = std::max(hi, v.registration + static_cast<Seconds>(std::ceil(v.cdf.upper())));
  hi += inst.centrifuge.cycle_time;

  nlohmann::json trace = nlohmann::json::array();
  StochSolution sol;
  bool found = false;
  std::vector<bool> first(na), forced(nt);
  const std::size_t total = std::size_t{1} << bits;
  // Mask order is lexicographic in (batch index of each available vital,
  // forced flag of each transiting vital), most significant first.
  for (std::size_t mask = 0; mask < total; ++mask) {
    for (std::size_t i = 0; i < na; ++i) first[i] = !((mask >> (bits - 1 - i)) & 1U);
    for (std::size_t i = 0; i < nt; ++i) forced[i] = (mask >> (nt - 1 - i)) & 1U;
    const auto count = static_cast<std::size_t>(std::count(first.begin(), first.end(), true));
    AssignmentBest best;
    if (count <= static_cast<std::size_t>(inst.centrifuge.capacity))
      best = optimize_assignment(inst, first, forced, lo, hi);
    ++sol.assignments_explored;
    if (options.debug_json) {
      trace.push_back({{"first_batch", first},
                       {"second_forced", forced},
                       {"feasible", best.feasible},
                       {"s1", best.feasible ? nlohmann::json(best.s1) : nlohmann::json(nullptr)},
                       {"objective", best.feasible ? nlohmann::json(best.objective)
                                                   : nlohmann::json(nullptr)},
                       {"pieces", best.pieces}});
    }
    if (!best.feasible) continue;
    const bool better = !found || strictly_less(best.objective, sol.objective) ||
                        (!strictly_less(sol.objective, best.objective) && best.s1 < sol.s1);
    if (better) {
      found = true;
      sol.s1 = best.s1;
      sol.objective = best.objective;
      sol.first_batch = first;
      sol.second_forced = forced;
    }
  }
  if (!found) throw InfeasibleError("no assignment satisfies the capacity constraint");
  sol.s2 = sol.s1 + inst.centrifuge.cycle_time;

  if (options.debug_json) {
    nlohmann::json doc;
    doc["instance"] = instance_json(inst);
    doc["search"] = {{"lo", lo}, {"hi", hi}};
    doc["assignments"] = std::move(trace);
    doc["solution"] = {{"s1", sol.s1},
                       {"s2", sol.s2},
                       {"first_batch", sol.first_batch},
                       {"second_forced", sol.second_forced},
                       {"objective", sol.objective}};
    *options.debug_json = doc.dump();
  }
  return sol;
}

const PiecewiseLinearCdf& VitalCdfTable::lookup(const std::string& ward) const {
  if (auto it = by_ward.find(ward); it != by_ward.end()) return it->second;
  if (fallback) return *fallback;
  throw EstimationError("no vital transport distribution for ward '" + ward + "'");
}

void StochasticConfig::validate() const {
  objective.validate();
  fallback.validate();
  if (deadline < 0) throw ConfigError("soft deadline must be non-negative");
  if (penalty < 0) throw ConfigError("penalty weight must be non-negative");
}

StochasticPolicy::StochasticPolicy(VitalCdfTable cdfs, StochasticConfig config)
    : cdfs_(std::move(cdfs)), config_(std::move(config)) {
  config_.validate();
}

BatchDecision StochasticPolicy::decide(const SimEvent& event, const ObservableState& view) {
  wakeups_.on_event(event);
  if (view.busy()) return BatchDecision::idle();

  StochInstance inst;
  inst.now = view.now();
  inst.last_start = view.last_start();
  inst.centrifuge = view.config();
  inst.deadline = config_.deadline;
  inst.penalty = config_.penalty;
  inst.objective = config_.objective;
  for (const auto& s : view.buffer())
    if (s.priority == Priority::vital) inst.available.push_back({s.id, s.registration, s.processing});
  const bool any_transit = std::any_of(view.in_transit().begin(), view.in_transit().end(),
                                       [](const auto& s) { return s.priority == Priority::vital; });

  const bool model_active = !inst.available.empty() || (!config_.require_available_vital && any_transit);
  if (!model_active) return wakeups_.filter(lookahead_decide(event, view, config_.fallback));
  if (view.buffer().empty()) return BatchDecision::idle();
  // CDFs are only needed once the model is built.
  for (const auto& s : view.in_transit())
    if (s.priority == Priority::vital)
      inst.transit.push_back({s.id, s.registration, s.processing, cdfs_.lookup(s.ward)});

  const StochSolution sol = solve(inst);
  ++solves_;
  if (sol.s1 > view.now()) return wakeups_.filter(BatchDecision::wake_at(sol.s1));
  auto batch = priority_fifo_fill(view.buffer(), sol.first_batch_ids(inst), view.config().capacity);
  if (batch.empty()) return BatchDecision::idle();
  return BatchDecision::run_now(std::move(batch));
}

}  // namespace batchlab
