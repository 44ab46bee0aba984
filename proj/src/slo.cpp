#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rass/errors.hpp"
#include "rass/moo.hpp"

namespace rass {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::S: return "S";
    case Metric::W: return "W";
    case Metric::A: return "A";
    case Metric::L: return "L";
    case Metric::TP: return "TP";
    case Metric::E: return "E";
    case Metric::MF: return "MF";
    case Metric::NTT: return "NTT";
    case Metric::STP: return "STP";
    case Metric::F: return "F";
  }
  return "?";
}

std::string_view to_string(Direction d) { return d == Direction::Maximize ? "max" : "min"; }

Metric metric_from_string(std::string_view s) {
  for (Metric m : {Metric::S, Metric::W, Metric::A, Metric::L, Metric::TP, Metric::E,
                   Metric::MF, Metric::NTT, Metric::STP, Metric::F})
    if (to_string(m) == s) return m;
  throw SemanticError("unknown metric '" + std::string(s) + "'");
}

Direction natural_direction(Metric m) {
  switch (m) {
    case Metric::A:
    case Metric::TP:
    case Metric::STP:
    case Metric::F:
      return Direction::Maximize;
    default:
      return Direction::Minimize;
  }
}

namespace {

std::string statistic_text(Statistic s, int n) {
  switch (s) {
    case Statistic::Value: return "value";
    case Statistic::Min: return "min";
    case Statistic::Max: return "max";
    case Statistic::Avg: return "avg";
    case Statistic::Std: return "std";
    case Statistic::Percentile: return "p" + std::to_string(n);
  }
  return "?";
}

void parse_statistic(std::string_view s, MetricId& id) {
  if (s == "value") id.statistic = Statistic::Value;
  else if (s == "min") id.statistic = Statistic::Min;
  else if (s == "max") id.statistic = Statistic::Max;
  else if (s == "avg") id.statistic = Statistic::Avg;
  else if (s == "std") id.statistic = Statistic::Std;
  else if (s.size() > 1 && s[0] == 'p') {
    int n = 0;
    auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), n);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw SemanticError("malformed percentile '" + std::string(s) + "'");
    if (n < 1 || n > 99)
      throw SemanticError("percentile p" + std::to_string(n) + " outside [1, 99]");
    id.statistic = Statistic::Percentile;
    id.percentile = n;
  } else {
    throw SemanticError("unknown statistic '" + std::string(s) + "'");
  }
}

// Applies the metric's default statistic and rejects unsupported pairings.
void normalise_statistic(MetricId& id, bool explicit_statistic) {
  const std::string name(to_string(id.metric));
  switch (id.metric) {
    case Metric::L:
      if (!explicit_statistic) id.statistic = Statistic::Avg;
      if (id.statistic == Statistic::Value)
        throw SemanticError("L needs a statistic (min, max, avg, std or pN)");
      break;
    case Metric::E:
    case Metric::TP:
      // Energy is a per-record scalar; throughput is derived from avg latency.
      if (!explicit_statistic || id.statistic == Statistic::Avg)
        id.statistic = Statistic::Value;
      if (id.statistic != Statistic::Value)
        throw SemanticError(name + " supports only the avg statistic");
      break;
    case Metric::NTT:
      if (!explicit_statistic) id.statistic = Statistic::Avg;
      if (id.statistic != Statistic::Avg && id.statistic != Statistic::Max &&
          id.statistic != Statistic::Value)
        throw SemanticError("NTT supports avg or max across tasks");
      if (id.task.kind == TaskScope::Kind::Single) id.statistic = Statistic::Value;
      if (id.task.kind == TaskScope::Kind::Unscoped && id.statistic == Statistic::Value)
        id.statistic = Statistic::Avg;
      break;
    default:
      if (explicit_statistic && id.statistic != Statistic::Value)
        throw SemanticError(name + " is a static scalar; no statistic allowed");
      id.statistic = Statistic::Value;
  }
  if (id.task.kind == TaskScope::Kind::All &&
      !(id.metric == Metric::S || id.metric == Metric::W || id.metric == Metric::E ||
        id.metric == Metric::MF))
    throw SemanticError(name + " cannot be aggregated across all tasks");
  if ((id.metric == Metric::STP || id.metric == Metric::F) &&
      id.task.kind != TaskScope::Kind::Unscoped)
    throw SemanticError(name + " is a system metric and takes no task index");
}

MetricId parse_metric_id(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto m = obj.find("metric");
  if (m == obj.end() || !m->is_string()) throw ParseError(where + ": missing 'metric'");
  MetricId id;
  id.metric = metric_from_string(m->get<std::string>());
  if (auto t = obj.find("task"); t != obj.end()) {
    if (t->is_string() && t->get<std::string>() == "all") {
      id.task = TaskScope::all();
    } else if (t->is_number_integer() && t->get<long long>() >= 0) {
      id.task = TaskScope::single(t->get<std::size_t>());
    } else {
      throw SemanticError(where + ": task must be a non-negative index or \"all\"");
    }
  }
  bool explicit_statistic = false;
  if (auto s = obj.find("statistic"); s != obj.end()) {
    if (!s->is_string()) throw ParseError(where + ": statistic must be a string");
    parse_statistic(s->get<std::string>(), id);
    explicit_statistic = true;
  }
  normalise_statistic(id, explicit_statistic);
  return id;
}

bool is_multi_metric(Metric m) {
  return m == Metric::NTT || m == Metric::STP || m == Metric::F;
}

ordered_json metric_json(const MetricId& id) {
  ordered_json o;
  o["metric"] = std::string(to_string(id.metric));
  o["statistic"] = statistic_text(id.statistic, id.percentile);
  if (id.task.kind == TaskScope::Kind::Single) o["task"] = id.task.index;
  if (id.task.kind == TaskScope::Kind::All) o["task"] = "all";
  return o;
}

}  // namespace

std::string MetricId::label() const {
  std::string out;
  if (statistic != Statistic::Value) out = statistic_text(statistic, percentile) + " ";
  out += to_string(metric);
  if (task.kind == TaskScope::Kind::Single) out += "[" + std::to_string(task.index) + "]";
  if (task.kind == TaskScope::Kind::All) out += "[all]";
  return out;
}

std::string Constraint::label() const {
  std::ostringstream out;
  out << id.label() << (at_least ? " >= " : " <= ") << bound;
  return out.str();
}

SLOSpec parse_slo_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("SLO document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("SLO document must be an object");

  SLOSpec slo;
  if (auto t = doc.find("tasks"); t != doc.end()) {
    if (!t->is_array()) throw ParseError("tasks must be an array of strings");
    for (const auto& name : *t) {
      if (!name.is_string()) throw ParseError("tasks must be an array of strings");
      slo.tasks.push_back(name.get<std::string>());
    }
  }

  if (auto objs = doc.find("objectives"); objs != doc.end()) {
    if (!objs->is_array()) throw ParseError("objectives must be an array");
    for (std::size_t i = 0; i < objs->size(); ++i) {
      const json& o = (*objs)[i];
      const std::string where = "objectives[" + std::to_string(i) + "]";
      Objective obj;
      obj.id = parse_metric_id(o, where);
      obj.direction = natural_direction(obj.id.metric);
      if (auto d = o.find("direction"); d != o.end()) {
        const std::string dir = d->is_string() ? d->get<std::string>() : "";
        if (dir == "min") obj.direction = Direction::Minimize;
        else if (dir == "max") obj.direction = Direction::Maximize;
        else throw ParseError(where + ": direction must be \"min\" or \"max\"");
      }
      if (auto w = o.find("weight"); w != o.end()) {
        if (!w->is_number()) throw ParseError(where + ": weight must be a number");
        obj.weight = w->get<double>();
        if (!(obj.weight > 0)) throw SemanticError(where + ": weight must be positive");
      }
      slo.objectives.push_back(obj);
    }
  }

  if (auto cons = doc.find("constraints"); cons != doc.end()) {
    if (!cons->is_array()) throw ParseError("constraints must be an array");
    for (std::size_t i = 0; i < cons->size(); ++i) {
      const json& c = (*cons)[i];
      const std::string where = "constraints[" + std::to_string(i) + "]";
      Constraint con;
      con.id = parse_metric_id(c, where);
      auto b = c.find("bound");
      if (b == c.end() || !b->is_number()) throw ParseError(where + ": missing numeric 'bound'");
      con.bound = b->get<double>();
      if (auto s = c.find("sense"); s != c.end()) {
        const std::string sense = s->is_string() ? s->get<std::string>() : "";
        if (sense == ">=") con.at_least = true;
        else if (sense != "<=") throw ParseError(where + ": sense must be \"<=\" or \">=\"");
      }
      slo.constraints.push_back(con);
    }
  }

  if (slo.objectives.empty()) {
    // Constraint-only specs optimise their inner functions.
    for (const auto& c : slo.constraints) {
      bool seen = false;
      for (const auto& o : slo.objectives) seen = seen || o.id == c.id;
      if (!seen) slo.objectives.push_back({c.id, natural_direction(c.id.metric), 1.0});
    }
  }
  if (slo.objectives.empty()) throw SemanticError("SLO spec has neither objectives nor constraints");

  if (!slo.tasks.empty()) {
    const std::size_t m = slo.tasks.size();
    auto check = [&](const MetricId& id) {
      if (is_multi_metric(id.metric) && m < 2)
        throw SemanticError(std::string(to_string(id.metric)) +
                            " requires at least two concurrent tasks");
      if (id.task.kind == TaskScope::Kind::Single && id.task.index >= m)
        throw SemanticError("task index " + std::to_string(id.task.index) + " out of range");
    };
    for (const auto& o : slo.objectives) check(o.id);
    for (const auto& c : slo.constraints) check(c.id);
  }
  return slo;
}

SLOSpec load_slo_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_slo_spec(ss.str());
}

std::string write_slo_spec(const SLOSpec& slo) {
  ordered_json doc;
  if (!slo.tasks.empty()) doc["tasks"] = slo.tasks;
  ordered_json objs = ordered_json::array();
  for (const auto& o : slo.objectives) {
    ordered_json j = metric_json(o.id);
    j["direction"] = std::string(to_string(o.direction));
    j["weight"] = o.weight;
    objs.push_back(std::move(j));
  }
  doc["objectives"] = std::move(objs);
  ordered_json cons = ordered_json::array();
  for (const auto& c : slo.constraints) {
    ordered_json j = metric_json(c.id);
    j["bound"] = c.bound;
    j["sense"] = c.at_least ? ">=" : "<=";
    cons.push_back(std::move(j));
  }
  doc["constraints"] = std::move(cons);
  return doc.dump(2) + "\n";
}

}  // namespace rass
