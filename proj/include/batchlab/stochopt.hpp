#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "batchlab/des.hpp"
#include "batchlab/dist.hpp"
#include "batchlab/policies.hpp"

namespace batchlab {

enum class ObjectiveKind : std::uint8_t { flow_time, total_tardiness, squared_tardiness, num_tardy };

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind parse_objective_kind(std::string_view text);

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::flow_time;
  Seconds beta = 0;  // allowed lateness, ignored for flow time
  void validate() const;
  /// Per-sample cost of a flow time x.
  double cost(double flow) const noexcept;
};

struct AvailableVital {
  SampleId id = 0;
  Seconds registration = 0;
  Seconds processing = 1;
};

struct TransitVital {
  SampleId id = 0;
  Seconds registration = 0;
  Seconds processing = 1;
  PiecewiseLinearCdf cdf;
};

struct StochInstance {
  Seconds now = 0;
  std::optional<Seconds> last_start;  // S_0, absent before the first run
  CentrifugeConfig centrifuge;
  std::vector<AvailableVital> available;
  std::vector<TransitVital> transit;
  Seconds deadline = 2700;
  double penalty = 1000.0;
  ObjectiveSpec objective;

  void validate() const;
  /// Lower bound on the first start: max(now, S_0 + cycle).
  Seconds earliest_start() const noexcept;
};

/// One point of the decision space.
struct StochCandidate {
  double s1 = 0.0;
  double s2 = 0.0;
  std::vector<bool> first_batch;     // y_{j,1} for each available vital
  std::vector<bool> second_forced;   // ybar_{j,2} for each transiting vital
};

struct StochSolution {
  Seconds s1 = 0;
  Seconds s2 = 0;
  std::vector<bool> first_batch;
  std::vector<bool> second_forced;
  double objective = 0.0;
  std::size_t assignments_explored = 0;

  /// Available vital ids assigned to the first run.
  std::vector<SampleId> first_batch_ids(const StochInstance& inst) const;
};

/// Probability that transiting vital j is in the first run.
double first_run_probability(const TransitVital& j, double s1, bool forced_second) noexcept;

/// Expected cost of a candidate including the soft-deadline penalty. Throws
/// DomainError if the candidate breaks a hard constraint.
double objective_value(const StochInstance& inst, const StochCandidate& cand);

struct SolveOptions {
  std::size_t max_assignments = std::size_t{1} << 20;
  /// When set, receives a JSON document describing the solve.
  std::string* debug_json = nullptr;
};

/// Globally optimal integer first start and assignment. The second run is
/// always placed one cycle after the first.
StochSolution solve(const StochInstance& inst, const SolveOptions& options = {});

/// Transport CDF of vital samples per ward, with an optional catch-all.
struct VitalCdfTable {
  std::map<std::string, PiecewiseLinearCdf> by_ward;
  std::optional<PiecewiseLinearCdf> fallback;

  const PiecewiseLinearCdf& lookup(const std::string& ward) const;
};

struct StochasticConfig {
  ObjectiveSpec objective;
  Seconds deadline = 2700;
  double penalty = 1000.0;
  /// Only build the model once a vital has arrived. When false, a registered
  /// vital still on its way is enough.
  bool require_available_vital = true;
  LookaheadConfig fallback;
  void validate() const;
};

class StochasticPolicy final : public Policy {
public:
  StochasticPolicy(VitalCdfTable cdfs, StochasticConfig config = {});
  BatchDecision decide(const SimEvent& event, const ObservableState& view) override;
  std::string name() const override { return "stochastic"; }

  std::size_t solves() const noexcept { return solves_; }

private:
  VitalCdfTable cdfs_;
  StochasticConfig config_;
  WakeupBook wakeups_;
  std::size_t solves_ = 0;
};

}  // namespace batchlab
