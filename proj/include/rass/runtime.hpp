#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rass/solver.hpp"

namespace rass {

struct RuntimeEvent {
  enum class Kind { EngineOverload, EngineRecover, MemoryPressure, MemoryRecover };
  double t = 0.0;  // simulated seconds
  Kind kind = Kind::EngineOverload;
  std::string engine;  // only for engine events

  bool operator==(const RuntimeEvent&) const = default;
};

std::string_view to_string(RuntimeEvent::Kind k);

/// One JSON object per line: {"t": 5, "kind": "engine_overload", "engine": "CPU"}.
/// Blank lines and lines starting with '#' are skipped.
std::vector<RuntimeEvent> parse_trace(std::string_view text);
std::string write_trace(const std::vector<RuntimeEvent>& trace);

/// Runtime manager step: the first matching rule's design. Depends only on
/// the state and the policy.
DesignLabel rm_step(const EnvState& state, const SwitchingPolicy& policy);

enum class SwitchKind { None, CM, CP, CB };
std::string_view to_string(SwitchKind k);

/// CM: models differ on the same engines. CP: same models, engines differ.
/// CB: both differ. Same models and engines with different engine options
/// count as CP.
SwitchKind classify_switch(const Design& from, const Design& to);

struct Segment {
  double t_start = 0.0;
  double t_end = 0.0;
  DesignLabel design = DesignLabel::D0;
  double avg_latency_ms = 0.0;
  double latency_std_ms = 0.0;
  double accuracy = 0.0;
  double memory_mb = 0.0;
  double throughput = 0.0;
};

struct Timeline {
  std::vector<Segment> segments;
  std::size_t switch_count = 0;
  std::map<SwitchKind, std::size_t> switch_kinds;
  std::size_t max_rules_evaluated = 0;
};

struct SimConfig {
  /// Latency multiplier for tasks whose engine is flagged.
  double degradation_factor = 2.0;
  /// End of the simulated horizon; defaults to last event time + 10 s.
  std::optional<double> horizon_s;
  /// Task reported in the latency/accuracy/throughput columns; defaults to
  /// the task with the heaviest workload in d_0.
  std::optional<std::size_t> focus_task;
};

/// Event-driven replay. Events sharing a timestamp are applied together
/// before the policy is consulted, so no zero-length segments are produced.
Timeline simulate(const std::vector<RuntimeEvent>& trace, const DesignSet& designs,
                  const SwitchingPolicy& policy, const SimConfig& config = {});

/// CSV with header t_start,t_end,design,avg_latency_ms,latency_std_ms,
/// accuracy,memory_mb,throughput.
std::string write_timeline_csv(const Timeline& timeline);

struct Observation {
  std::string engine;
  double latency_ms = 0.0;
  double memory_mb = 0.0;
};

struct DetectionThresholds {
  double latency_ratio = 1.5;
  double memory_budget_mb = 0.0;
};

/// Statistics-driven front end: an engine is flagged when its windowed mean
/// latency exceeds latency_ratio times its profiled mean; memory is flagged
/// when any observation exceeds the budget.
EnvState detect_flags(const std::vector<Observation>& window,
                      const std::map<std::string, double>& profiled_avg_ms,
                      const DetectionThresholds& thresholds,
                      const std::vector<std::string>& engine_set);

}  // namespace rass
