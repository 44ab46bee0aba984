#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rass/profile.hpp"

namespace rass {

enum class Metric { S, W, A, L, TP, E, MF, NTT, STP, F };
enum class Statistic { Value, Min, Max, Avg, Std, Percentile };
enum class Direction { Minimize, Maximize };

std::string_view to_string(Metric m);
std::string_view to_string(Direction d);
Metric metric_from_string(std::string_view s);

/// Natural optimisation direction of a metric (A is handled per model).
Direction natural_direction(Metric m);

/// Which task a metric refers to.
///  - Unscoped: per-task metric with no index; expands to one per task when
///    compiled against a multi-task space, or aggregates (NTT).
///  - Single: one task by 0-based index.
///  - All: summed across tasks (S, W, E, MF only).
struct TaskScope {
  enum class Kind { Unscoped, Single, All };
  Kind kind = Kind::Unscoped;
  std::size_t index = 0;

  static TaskScope unscoped() { return {}; }
  static TaskScope single(std::size_t i) { return {Kind::Single, i}; }
  static TaskScope all() { return {Kind::All, 0}; }

  bool operator==(const TaskScope&) const = default;
};

struct MetricId {
  Metric metric = Metric::A;
  Statistic statistic = Statistic::Value;
  int percentile = 0;  // only for Statistic::Percentile
  TaskScope task;

  /// Short human label, e.g. "max L[0]" or "p95 L" or "MF[all]".
  std::string label() const;

  bool operator==(const MetricId&) const = default;
};

struct Objective {
  MetricId id;
  Direction direction = Direction::Minimize;
  double weight = 1.0;
};

/// g(x) = sign * (h(x) - bound) <= 0. A ">=" bound is stored with sign -1.
struct Constraint {
  MetricId id;
  double bound = 0.0;
  bool at_least = false;

  std::string label() const;
  double slack(double value) const {
    return at_least ? bound - value : value - bound;
  }
};

struct SLOSpec {
  std::vector<Objective> objectives;
  std::vector<Constraint> constraints;
  std::vector<std::string> tasks;  // optional; may be supplied at compile time
};

/// Broad SLOs become objectives, narrow SLOs become constraints. If only
/// constraints are given, their inner metrics are promoted to objectives.
SLOSpec parse_slo_spec(std::string_view text);
SLOSpec load_slo_spec(const std::filesystem::path& path);
std::string write_slo_spec(const SLOSpec& slo);

// ---------------------------------------------------------------------------
// Decision space

struct ExecutionConfig {
  std::string model_id;
  HardwareConfig hw;

  bool operator==(const ExecutionConfig&) const = default;
};

/// One execution config per task; size 1 means single-DNN.
struct DecisionVariable {
  std::vector<ExecutionConfig> configs;

  std::vector<std::string> signature() const;  // engine per task
  std::string describe() const;

  bool operator==(const DecisionVariable&) const = default;
};

struct DecisionSpace {
  std::vector<std::string> tasks;
  std::vector<DecisionVariable> variables;
};

/// Cartesian product of per-task execution configs. Per-task configs are
/// ordered by (model_id, canonical hw encoding); the product varies the last
/// task fastest, so the whole space is in lexicographic order.
DecisionSpace build_decision_space(const ProfileDB& db,
                                   const std::vector<std::string>& tasks);

// ---------------------------------------------------------------------------
// Problem

struct ContentionParams {
  double alpha = 1.0;
  bool enabled = true;
};

class MOOProblem {
 public:
  /// Compiles an SLO spec against a profile. Per-task metrics are expanded,
  /// directions resolved, and every referenced metric checked for
  /// evaluability. `tasks` overrides slo.tasks when non-empty.
  static MOOProblem compile(std::shared_ptr<const ProfileDB> db, SLOSpec slo,
                            std::vector<std::string> tasks = {},
                            ContentionParams contention = {});

  const ProfileDB& profile() const { return *db_; }
  std::shared_ptr<const ProfileDB> profile_ptr() const { return db_; }
  const DecisionSpace& space() const { return space_; }
  const SLOSpec& slo() const { return slo_; }
  const ContentionParams& contention() const { return contention_; }
  std::size_t task_count() const { return space_.tasks.size(); }

  /// Compiled (expanded) objectives and constraints.
  const std::vector<Objective>& objectives() const { return objectives_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  const ModelVariant& model(std::string_view id) const;
  const MeasurementRecord& record(const ExecutionConfig& e) const;
  const JointMeasurementRecord* joint_record(const DecisionVariable& x) const;

  /// Replaces objective weights (compiled order). Size must match.
  void set_weights(const std::vector<double>& weights);

 private:
  std::shared_ptr<const ProfileDB> db_;
  SLOSpec slo_;
  ContentionParams contention_;
  DecisionSpace space_;
  std::vector<Objective> objectives_;
  std::vector<Constraint> constraints_;
  std::unordered_map<std::string, std::size_t> model_index_;
  std::unordered_map<std::string, std::size_t> record_index_;
  std::unordered_map<std::string, std::size_t> joint_index_;
};

/// Latency samples of task `task` for x. Single-DNN and single-mode requests
/// return the profiled samples; multi-mode uses the matching joint record,
/// else the contention model L^M = L^S * (1 + alpha * (k - 1)).
std::vector<double> task_latency_samples(const DecisionVariable& x,
                                         std::size_t task,
                                         const MOOProblem& problem,
                                         bool multi_mode);

double evaluate_metric(const DecisionVariable& x, const MetricId& id,
                       const MOOProblem& problem);

/// Multi-DNN summaries used by the metric evaluator and the property suites.
struct MultiDnnMetrics {
  std::vector<double> ntt;
  double stp = 0.0;
  double fairness = 0.0;
};
MultiDnnMetrics multi_dnn_metrics(const std::vector<double>& single_avg_ms,
                                  const std::vector<double>& multi_avg_ms);

// ---------------------------------------------------------------------------
// Constraints and the objective matrix

struct ConstrainedSpace {
  std::vector<std::size_t> indices;  // into problem.space().variables
  std::vector<std::size_t> rejections;  // per compiled constraint
  std::size_t size() const { return indices.size(); }
};

ConstrainedSpace apply_constraints(const MOOProblem& problem);

/// Row-major matrix of objective values, one row per feasible variable.
struct ObjectiveMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<Direction> directions;
  std::vector<double> weights;
  std::vector<std::string> labels;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// OpenMP row-parallel evaluation. Output does not depend on scheduling;
/// if several rows throw, the error of the lowest row index is rethrown.
ObjectiveMatrix build_objective_matrix(const ConstrainedSpace& space,
                                       const MOOProblem& problem);
/// Serial reference kept for testing and benchmarking.
ObjectiveMatrix build_objective_matrix_serial(const ConstrainedSpace& space,
                                              const MOOProblem& problem);

/// Objective matrix over an explicit list of space indices.
ObjectiveMatrix build_objective_matrix(const std::vector<std::size_t>& indices,
                                       const MOOProblem& problem);

/// Summed memory footprint and workload of x across tasks.
double total_memory_mb(const DecisionVariable& x, const MOOProblem& problem);
double total_workload(const DecisionVariable& x, const MOOProblem& problem);

}  // namespace rass
