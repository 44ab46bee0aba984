#include <cmath>

#include <json.hpp>

#include "rass/errors.hpp"
#include "rass/solver.hpp"

namespace rass {

using ordered_json = nlohmann::ordered_json;

namespace {

char tri_char(Tri t) {
  switch (t) {
    case Tri::True: return 'T';
    case Tri::False: return 'F';
    case Tri::Any: return '-';
  }
  return '?';
}

Tri tri_from(const std::string& s) {
  if (s == "T") return Tri::True;
  if (s == "F") return Tri::False;
  if (s == "-") return Tri::Any;
  throw SchemaError("policy cell must be T, F or -");
}

ordered_json design_json(const Design& d) {
  ordered_json o;
  o["label"] = std::string(to_string(d.label));
  o["row"] = d.row;
  ordered_json configs = ordered_json::array();
  for (const auto& c : d.x.configs) {
    ordered_json cj;
    cj["model"] = c.model_id;
    cj["engine"] = c.hw.engine;
    ordered_json opts = ordered_json::object();
    for (const auto& [k, v] : c.hw.options) opts[k] = v;
    cj["options"] = std::move(opts);
    configs.push_back(std::move(cj));
  }
  o["configs"] = std::move(configs);
  ordered_json score;
  score["d"] = d.score.d;
  score["d_s"] = d.score.d_s;
  if (d.score.utopia) score["opt"] = "utopia";
  else score["opt"] = d.score.opt;
  o["score"] = std::move(score);
  ordered_json metrics = ordered_json::object();
  for (const auto& [k, v] : d.metrics) metrics[k] = v;
  o["metrics"] = std::move(metrics);
  ordered_json runtime = ordered_json::array();
  for (const auto& t : d.runtime) {
    ordered_json tj;
    tj["engine"] = t.engine;
    tj["avg_latency_ms"] = t.avg_latency_ms;
    tj["latency_std_ms"] = t.latency_std_ms;
    tj["accuracy"] = t.accuracy;
    tj["memory_mb"] = t.memory_mb;
    tj["workload"] = t.workload;
    tj["batch"] = t.batch;
    runtime.push_back(std::move(tj));
  }
  o["runtime"] = std::move(runtime);
  return o;
}

template <typename T>
T get(const ordered_json& o, const char* key) {
  auto it = o.find(key);
  if (it == o.end()) throw SchemaError(std::string("design document: missing '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string("design document: bad type for '") + key + "'");
  }
}

Design parse_design(const ordered_json& o) {
  Design d;
  d.label = design_label_from_string(get<std::string>(o, "label"));
  d.row = get<std::size_t>(o, "row");
  for (const auto& cj : o.at("configs")) {
    ExecutionConfig c;
    c.model_id = get<std::string>(cj, "model");
    c.hw.engine = get<std::string>(cj, "engine");
    for (const auto& [k, v] : cj.at("options").items()) c.hw.options[k] = v.get<std::string>();
    d.x.configs.push_back(std::move(c));
  }
  const auto& score = o.at("score");
  d.score.d = get<double>(score, "d");
  d.score.d_s = get<double>(score, "d_s");
  if (score.at("opt").is_string()) {
    d.score.utopia = true;
    d.score.opt = std::numeric_limits<double>::infinity();
  } else {
    d.score.opt = get<double>(score, "opt");
  }
  for (const auto& [k, v] : o.at("metrics").items()) d.metrics.emplace_back(k, v.get<double>());
  for (const auto& tj : o.at("runtime")) {
    TaskRuntime t;
    t.engine = get<std::string>(tj, "engine");
    t.avg_latency_ms = get<double>(tj, "avg_latency_ms");
    t.latency_std_ms = get<double>(tj, "latency_std_ms");
    t.accuracy = get<double>(tj, "accuracy");
    t.memory_mb = get<double>(tj, "memory_mb");
    t.workload = get<double>(tj, "workload");
    t.batch = get<int>(tj, "batch");
    d.runtime.push_back(t);
  }
  return d;
}

}  // namespace

std::string write_solution(const Solution& s) {
  const DesignSet& ds = s.designs;
  ordered_json doc;
  doc["engines"] = ds.engine_set;
  doc["tasks"] = ds.tasks;
  ordered_json designs = ordered_json::array();
  for (const auto& d : ds.ranked) designs.push_back(design_json(d));
  designs.push_back(design_json(ds.dm));
  designs.push_back(design_json(ds.dw));
  ordered_json dwm;
  dwm["label"] = "dwm";
  dwm["same_as"] = std::string(to_string(ds.dwm_source));
  designs.push_back(std::move(dwm));
  doc["designs"] = std::move(designs);

  ordered_json policy;
  policy["engine_order"] = s.policy.engine_order;
  std::vector<std::string> columns = s.policy.engine_order;
  columns.push_back("m");
  policy["columns"] = columns;
  ordered_json rules = ordered_json::array();
  for (const auto& r : s.policy.rules) {
    std::vector<std::string> cells;
    for (const auto& e : s.policy.engine_order) {
      auto it = r.engines.find(e);
      cells.emplace_back(1, tri_char(it == r.engines.end() ? Tri::Any : it->second));
    }
    cells.emplace_back(1, tri_char(r.memory));
    ordered_json rj;
    rj["when"] = cells;
    rj["design"] = std::string(to_string(r.target));
    rules.push_back(std::move(rj));
  }
  policy["rules"] = std::move(rules);
  doc["policy"] = std::move(policy);
  return doc.dump(2) + "\n";
}

Solution parse_solution(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("design document: ") + e.what());
  }
  try {
    Solution s;
    s.designs.engine_set = get<std::vector<std::string>>(doc, "engines");
    s.designs.tasks = get<std::vector<std::string>>(doc, "tasks");
    bool have_dm = false, have_dw = false;
    for (const auto& dj : doc.at("designs")) {
      const auto label = design_label_from_string(get<std::string>(dj, "label"));
      if (label == DesignLabel::DWM) {
        s.designs.dwm_source = design_label_from_string(get<std::string>(dj, "same_as"));
        continue;
      }
      Design d = parse_design(dj);
      if (label == DesignLabel::DM) {
        s.designs.dm = std::move(d);
        have_dm = true;
      } else if (label == DesignLabel::DW) {
        s.designs.dw = std::move(d);
        have_dw = true;
      } else {
        s.designs.ranked.push_back(std::move(d));
      }
    }
    if (!have_dm || !have_dw || s.designs.ranked.empty())
      throw SchemaError("design document must contain d0, dm and dw");

    const auto& pj = doc.at("policy");
    s.policy.engine_set = s.designs.engine_set;
    s.policy.engine_order = get<std::vector<std::string>>(pj, "engine_order");
    for (const auto& rj : pj.at("rules")) {
      const auto cells = get<std::vector<std::string>>(rj, "when");
      if (cells.size() != s.policy.engine_order.size() + 1)
        throw SchemaError("policy rule width does not match engine_order");
      PolicyRule r;
      for (std::size_t i = 0; i < s.policy.engine_order.size(); ++i) {
        const Tri t = tri_from(cells[i]);
        if (t != Tri::Any) r.engines[s.policy.engine_order[i]] = t;
      }
      r.memory = tri_from(cells.back());
      r.target = design_label_from_string(get<std::string>(rj, "design"));
      s.policy.rules.push_back(std::move(r));
    }
    verify_policy_total(s.policy);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("design document: ") + e.what());
  }
}

}  // namespace rass
