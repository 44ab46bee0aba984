#include "rass/runtime.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rass/errors.hpp"

namespace rass {

std::string_view to_string(RuntimeEvent::Kind k) {
  switch (k) {
    case RuntimeEvent::Kind::EngineOverload: return "engine_overload";
    case RuntimeEvent::Kind::EngineRecover: return "engine_recover";
    case RuntimeEvent::Kind::MemoryPressure: return "memory_pressure";
    case RuntimeEvent::Kind::MemoryRecover: return "memory_recover";
  }
  return "?";
}

std::string_view to_string(SwitchKind k) {
  switch (k) {
    case SwitchKind::None: return "NONE";
    case SwitchKind::CM: return "CM";
    case SwitchKind::CP: return "CP";
    case SwitchKind::CB: return "CB";
  }
  return "?";
}

namespace {

bool is_engine_event(RuntimeEvent::Kind k) {
  return k == RuntimeEvent::Kind::EngineOverload || k == RuntimeEvent::Kind::EngineRecover;
}

RuntimeEvent::Kind kind_from_string(const std::string& s, std::size_t line) {
  for (auto k : {RuntimeEvent::Kind::EngineOverload, RuntimeEvent::Kind::EngineRecover,
                 RuntimeEvent::Kind::MemoryPressure, RuntimeEvent::Kind::MemoryRecover})
    if (to_string(k) == s) return k;
  throw SchemaError("trace line " + std::to_string(line) + ": unknown event kind '" + s + "'");
}

}  // namespace

std::vector<RuntimeEvent> parse_trace(std::string_view text) {
  std::vector<RuntimeEvent> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("t") || !j["t"].is_number() || !j.contains("kind") ||
        !j["kind"].is_string())
      throw SchemaError("trace line " + std::to_string(lineno) + ": needs numeric t and kind");
    RuntimeEvent ev;
    ev.t = j["t"].get<double>();
    ev.kind = kind_from_string(j["kind"].get<std::string>(), lineno);
    const bool has_engine = j.contains("engine") && !j["engine"].is_null();
    if (has_engine != is_engine_event(ev.kind))
      throw SchemaError("trace line " + std::to_string(lineno) +
                        ": engine is required for engine events and forbidden otherwise");
    if (has_engine) {
      if (!j["engine"].is_string())
        throw SchemaError("trace line " + std::to_string(lineno) + ": engine must be a string");
      ev.engine = j["engine"].get<std::string>();
    }
    if (!out.empty() && ev.t < out.back().t)
      throw SchemaError("trace line " + std::to_string(lineno) + ": time goes backwards");
    out.push_back(std::move(ev));
  }
  return out;
}

std::string write_trace(const std::vector<RuntimeEvent>& trace) {
  std::string out;
  for (const auto& ev : trace) {
    nlohmann::ordered_json j;
    j["t"] = ev.t;
    j["kind"] = std::string(to_string(ev.kind));
    if (is_engine_event(ev.kind)) j["engine"] = ev.engine;
    out += j.dump() + "\n";
  }
  return out;
}

DesignLabel rm_step(const EnvState& state, const SwitchingPolicy& policy) {
  const auto m = policy.match(state);
  if (!m) throw PolicyIncompleteError("no rule matches the environment state");
  return m->target;
}

SwitchKind classify_switch(const Design& from, const Design& to) {
  if (from.x.configs.size() != to.x.configs.size()) return SwitchKind::CB;
  bool models_differ = false;
  bool engines_differ = false;
  bool options_differ = false;
  for (std::size_t i = 0; i < from.x.configs.size(); ++i) {
    const auto& a = from.x.configs[i];
    const auto& b = to.x.configs[i];
    models_differ = models_differ || a.model_id != b.model_id;
    engines_differ = engines_differ || a.hw.engine != b.hw.engine;
    options_differ = options_differ || a.hw.options != b.hw.options;
  }
  if (models_differ && engines_differ) return SwitchKind::CB;
  if (models_differ) return SwitchKind::CM;
  if (engines_differ || options_differ) return SwitchKind::CP;
  return SwitchKind::None;
}

namespace {

struct ActiveState {
  DesignLabel label;
  std::vector<bool> throttled;  // per task

  bool operator==(const ActiveState&) const = default;
};

Segment open_segment(double t, const ActiveState& active, const DesignSet& designs,
                     std::size_t focus, double degradation) {
  const Design& d = designs.get(active.label);
  Segment s;
  s.t_start = t;
  s.design = active.label;
  const std::size_t f = std::min(focus, d.runtime.size() - 1);
  const double factor = active.throttled[f] ? degradation : 1.0;
  s.avg_latency_ms = d.runtime[f].avg_latency_ms * factor;
  s.latency_std_ms = d.runtime[f].latency_std_ms * factor;
  s.accuracy = d.runtime[f].accuracy;
  for (const auto& t : d.runtime) s.memory_mb += t.memory_mb;
  s.throughput = static_cast<double>(d.runtime[f].batch) / (s.avg_latency_ms / 1000.0);
  return s;
}

}  // namespace

Timeline simulate(const std::vector<RuntimeEvent>& trace, const DesignSet& designs,
                  const SwitchingPolicy& policy, const SimConfig& config) {
  const std::set<std::string> engines(designs.engine_set.begin(), designs.engine_set.end());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& ev = trace[i];
    if (is_engine_event(ev.kind) && !engines.count(ev.engine))
      throw UnknownEngineError("event at t=" + std::to_string(ev.t) + " names engine '" +
                               ev.engine + "' outside the device engine set");
    if (i > 0 && ev.t < trace[i - 1].t) throw ValueError("trace is not time-ordered");
    if (ev.t < 0) throw ValueError("trace times must be non-negative");
  }
  const double horizon =
      config.horizon_s.value_or(trace.empty() ? 10.0 : trace.back().t + 10.0);
  if (!trace.empty() && horizon < trace.back().t)
    throw ValueError("horizon ends before the last event");
  if (!(config.degradation_factor >= 1.0)) throw ValueError("degradation factor must be >= 1");

  std::size_t focus = 0;
  if (config.focus_task) {
    focus = *config.focus_task;
  } else {
    const auto& rt = designs.ranked.front().runtime;
    for (std::size_t t = 1; t < rt.size(); ++t)
      if (rt[t].workload > rt[focus].workload) focus = t;
  }

  EnvState state = EnvState::clear(designs.engine_set);
  Timeline tl;
  auto evaluate = [&]() {
    const auto m = policy.match(state);
    if (!m) throw PolicyIncompleteError("no rule matches the environment state");
    tl.max_rules_evaluated = std::max(tl.max_rules_evaluated, m->rules_evaluated);
    ActiveState a{m->target, {}};
    for (const auto& cfg : designs.get(m->target).x.configs)
      a.throttled.push_back(state.engine_flags.at(cfg.hw.engine));
    return a;
  };
  auto apply = [&](const RuntimeEvent& ev) {
    switch (ev.kind) {
      case RuntimeEvent::Kind::EngineOverload: state.engine_flags[ev.engine] = true; break;
      case RuntimeEvent::Kind::EngineRecover: state.engine_flags[ev.engine] = false; break;
      case RuntimeEvent::Kind::MemoryPressure: state.memory_flag = true; break;
      case RuntimeEvent::Kind::MemoryRecover: state.memory_flag = false; break;
    }
  };

  std::size_t i = 0;
  while (i < trace.size() && trace[i].t <= 0.0) apply(trace[i++]);
  ActiveState active = evaluate();
  Segment current = open_segment(0.0, active, designs, focus, config.degradation_factor);

  while (i < trace.size()) {
    const double t = trace[i].t;
    while (i < trace.size() && trace[i].t == t) apply(trace[i++]);
    const ActiveState next = evaluate();
    if (next == active) continue;
    if (next.label != active.label) {
      ++tl.switch_count;
      ++tl.switch_kinds[classify_switch(designs.get(active.label), designs.get(next.label))];
    }
    current.t_end = t;
    tl.segments.push_back(current);
    active = next;
    current = open_segment(t, active, designs, focus, config.degradation_factor);
  }
  current.t_end = horizon;
  tl.segments.push_back(current);
  return tl;
}

std::string write_timeline_csv(const Timeline& timeline) {
  std::string out =
      "t_start,t_end,design,avg_latency_ms,latency_std_ms,accuracy,memory_mb,throughput\n";
  char buf[256];
  for (const auto& s : timeline.segments) {
    std::snprintf(buf, sizeof buf, "%.3f,%.3f,%s,%.4f,%.4f,%.4f,%.4f,%.4f\n", s.t_start, s.t_end,
                  std::string(to_string(s.design)).c_str(), s.avg_latency_ms, s.latency_std_ms,
                  s.accuracy, s.memory_mb, s.throughput);
    out += buf;
  }
  return out;
}

EnvState detect_flags(const std::vector<Observation>& window,
                      const std::map<std::string, double>& profiled_avg_ms,
                      const DetectionThresholds& thresholds,
                      const std::vector<std::string>& engine_set) {
  if (window.empty()) throw ValueError("flag detection needs a non-empty window");
  EnvState state = EnvState::clear(engine_set);
  for (const auto& engine : engine_set) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& o : window) {
      if (o.engine != engine) continue;
      sum += o.latency_ms;
      ++n;
    }
    auto it = profiled_avg_ms.find(engine);
    if (n == 0 || it == profiled_avg_ms.end()) continue;
    state.engine_flags[engine] = sum / static_cast<double>(n) > thresholds.latency_ratio * it->second;
  }
  if (thresholds.memory_budget_mb > 0) {
    for (const auto& o : window)
      state.memory_flag = state.memory_flag || o.memory_mb > thresholds.memory_budget_mb;
  }
  return state;
}

}  // namespace rass
