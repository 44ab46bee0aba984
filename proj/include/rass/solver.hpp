#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rass/moo.hpp"

namespace rass {

// ---------------------------------------------------------------------------
// Optimality

/// Scaled weighted distance to the utopia point and its reciprocal.
/// `utopia` marks an exact utopia hit or a fully degenerate space; opt is
/// +infinity in that case.
struct OptimalityScore {
  double d = 0.0;
  double d_s = 0.0;
  double opt = 1.0;
  bool utopia = false;
};

/// Per-column statistics over X' that define the distance.
struct ColumnStats {
  double utopia = 0.0;
  double variance = 0.0;
  double min = 0.0;
  double max = 0.0;
};

std::vector<ColumnStats> column_stats(const ObjectiveMatrix& m);

/// OpenMP kernel: column statistics in parallel over columns, distances in
/// parallel over rows.
std::vector<OptimalityScore> compute_optimality(const ObjectiveMatrix& m);
/// Serial reference, same arithmetic in the same order.
std::vector<OptimalityScore> compute_optimality_serial(const ObjectiveMatrix& m);

/// Significant bits of opt used for ranking. Scores that agree to about
/// 1.5e-11 relative are ties, so rounding noise between mathematically equal
/// scores cannot reorder them and the lexicographic tie-break applies.
inline constexpr int kRankingBits = 36;
double ranking_key(double opt);

/// Higher-is-better comparison: utopia first, then opt descending.
bool better_than(const OptimalityScore& a, const OptimalityScore& b);
/// opt(a) / opt(b) with the utopia sentinel treated as +infinity
/// (inf/inf = 1). Tied scores give exactly 1.
double optimality_ratio(const OptimalityScore& a, const OptimalityScore& b);

// ---------------------------------------------------------------------------
// Sorting and mapping classes

/// Row positions (into the constrained space / matrix) ordered by optimality.
struct SortedSpace {
  std::vector<std::size_t> order;
};

/// Descending opt; ties keep the space's lexicographic order.
SortedSpace sort_space(const std::vector<OptimalityScore>& scores);

struct MappingClass {
  std::vector<std::string> signature;
  std::vector<std::size_t> members;  // row positions, best first
};

/// All engine signatures in rank order (rank = best member). With `limit`,
/// only the first `limit` classes are kept.
std::vector<MappingClass> partition_mappings(
    const SortedSpace& sorted, const ConstrainedSpace& space,
    const MOOProblem& problem,
    std::size_t limit = std::numeric_limits<std::size_t>::max());

// ---------------------------------------------------------------------------
// Designs

enum class DesignLabel { D0, D1, D2, DM, DW, DWM };
std::string_view to_string(DesignLabel l);
DesignLabel design_label_from_string(std::string_view s);
DesignLabel ranked_label(std::size_t i);

/// Metrics of one task as the runtime manager would observe them.
struct TaskRuntime {
  std::string engine;
  double avg_latency_ms = 0.0;
  double latency_std_ms = 0.0;
  double accuracy = 0.0;
  double memory_mb = 0.0;
  double workload = 0.0;
  int batch = 1;

  bool operator==(const TaskRuntime&) const = default;
};

struct Design {
  DesignLabel label = DesignLabel::D0;
  DecisionVariable x;
  OptimalityScore score;
  std::size_t row = 0;  // position in the constrained space
  std::vector<std::pair<std::string, double>> metrics;  // objectives + MF + W
  std::vector<TaskRuntime> runtime;

  double metric(std::string_view name) const;
};

struct DesignSet {
  std::vector<Design> ranked;  // d_0 .. d_{T-1}
  Design dm;
  Design dw;
  DesignLabel dwm_source = DesignLabel::DW;  // DM or DW
  std::vector<std::string> engine_set;      // device engines
  std::vector<std::string> tasks;

  const Design& get(DesignLabel l) const;
  const Design& dwm() const { return get(dwm_source); }
  /// Number of distinct decision variables across all labels.
  std::size_t distinct_count() const;
};

/// Context shared by design selection and baselines.
struct ScoredSpace {
  ConstrainedSpace space;
  ObjectiveMatrix matrix;
  std::vector<OptimalityScore> scores;
  SortedSpace sorted;
};

ScoredSpace score_space(const MOOProblem& problem);

/// Cost used to pick d_wm: min-max normalised MF plus min-max normalised W,
/// both over X'.
double memory_workload_cost(double mf, double w, double mf_min, double mf_max,
                            double w_min, double w_max);

DesignSet select_designs(const std::vector<MappingClass>& classes,
                         const ScoredSpace& scored, const MOOProblem& problem);

/// Fills the objective snapshot and per-task runtime metrics of a design.
Design make_design(DesignLabel label, std::size_t row,
                   const ScoredSpace& scored, const MOOProblem& problem);

// ---------------------------------------------------------------------------
// Switching policy

enum class Tri { Any, True, False };

struct PolicyRule {
  std::map<std::string, Tri> engines;  // engines not listed are wildcards
  Tri memory = Tri::Any;
  DesignLabel target = DesignLabel::D0;
};

struct EnvState {
  std::map<std::string, bool> engine_flags;
  bool memory_flag = false;

  static EnvState clear(const std::vector<std::string>& engines);
  bool operator==(const EnvState&) const = default;
};

struct RuleMatch {
  DesignLabel target = DesignLabel::D0;
  std::size_t rule_index = 0;
  std::size_t rules_evaluated = 0;
};

struct SwitchingPolicy {
  std::vector<std::string> engine_order;  // trigger engine of d_0 .. d_{T-1}
  std::vector<std::string> engine_set;
  std::vector<PolicyRule> rules;

  bool matches(const PolicyRule& rule, const EnvState& state) const;
  /// First matching rule; nullopt only for a non-total policy.
  std::optional<RuleMatch> match(const EnvState& state) const;
};

/// Emits T + 3 ordered rules and verifies totality by enumerating every
/// engine/memory flag combination of the device.
SwitchingPolicy generate_switching_policy(const DesignSet& designs);

/// Throws PolicyIncompleteError if any state is unmatched.
void verify_policy_total(const SwitchingPolicy& policy);

// ---------------------------------------------------------------------------

struct Solution {
  DesignSet designs;
  SwitchingPolicy policy;
};

/// Constraints, scoring, sorting, partitioning, selection and policy
/// generation in one pass. Throws InfeasibleError.
Solution solve(const MOOProblem& problem);

/// Design set and policy as a byte-stable JSON document.
std::string write_solution(const Solution& s);
Solution parse_solution(std::string_view text);

}  // namespace rass
