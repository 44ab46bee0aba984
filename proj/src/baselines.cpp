#include "rass/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "rass/errors.hpp"

namespace rass {

std::string BaselineKind::name() const {
  switch (kind) {
    case Kind::BestAccuracy: return "b-a";
    case Kind::BestSize: return "b-s";
    case Kind::Transferred: return "t-" + (source ? source->device_name : std::string("?"));
    case Kind::MultiUnaware: return "multi-unaware";
    case Kind::WeightedSum: return "oodin";
  }
  return "?";
}

namespace {

using Signature = std::vector<std::string>;

bool on_signature(const DecisionVariable& x, const std::optional<Signature>& sig) {
  return !sig || x.signature() == *sig;
}

std::string join_signature(const Signature& sig) {
  std::string out;
  for (std::size_t i = 0; i < sig.size(); ++i) out += (i ? "+" : "") + sig[i];
  return out;
}

/// Space index -> row in X' for a scored problem.
std::vector<std::optional<std::size_t>> row_lookup(const MOOProblem& p, const ScoredSpace& s) {
  std::vector<std::optional<std::size_t>> rows(p.space().variables.size());
  for (std::size_t r = 0; r < s.space.size(); ++r) rows[s.space.indices[r]] = r;
  return rows;
}

std::optional<std::size_t> find_in_space(const MOOProblem& p, const DecisionVariable& x) {
  const auto& vars = p.space().variables;
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i] == x) return i;
  return std::nullopt;
}

/// Label of the constraint rejecting the most of `candidates`.
std::string worst_constraint(const MOOProblem& p, const std::vector<std::size_t>& candidates) {
  const auto& cons = p.constraints();
  std::vector<std::size_t> counts(cons.size(), 0);
  for (std::size_t idx : candidates)
    for (std::size_t j = 0; j < cons.size(); ++j)
      if (cons[j].slack(evaluate_metric(p.space().variables[idx], cons[j].id, p)) > 0) ++counts[j];
  if (cons.empty()) return "";
  const auto it = std::max_element(counts.begin(), counts.end());
  return cons[static_cast<std::size_t>(it - counts.begin())].label();
}

BaselineOutcome not_applicable(std::string reason) {
  BaselineOutcome o;
  o.not_applicable = true;
  o.reason = std::move(reason);
  return o;
}

/// Places a chosen variable on the target problem and checks feasibility.
BaselineOutcome place(const MOOProblem& target, const DecisionVariable& x,
                      const std::vector<std::optional<std::size_t>>& rows) {
  BaselineOutcome o;
  o.x = x;
  const auto idx = find_in_space(target, x);
  if (!idx) {
    o.not_applicable = true;
    o.reason = "configuration unavailable on " + target.profile().device_name;
    return o;
  }
  o.space_index = idx;
  if (!rows[*idx]) {
    o.violated = worst_constraint(target, {*idx});
    o.reason = "violates " + o.violated;
    return o;
  }
  o.feasible = true;
  return o;
}

// ---------------------------------------------------------------------------
// Single-architecture baselines

std::string pick_architecture(const MOOProblem& p, const std::string& task, bool by_accuracy) {
  std::map<std::string, double> best;  // architecture -> score (lower wins)
  for (const auto& m : p.profile().models) {
    if (m.task_id != task) continue;
    double key;
    if (by_accuracy)
      key = m.accuracy_direction == AccuracyDirection::HigherBetter ? -m.accuracy : m.accuracy;
    else
      key = m.params;
    auto [it, inserted] = best.emplace(m.architecture, key);
    if (!inserted) it->second = std::min(it->second, key);
  }
  auto it = std::min_element(best.begin(), best.end(),
                             [](const auto& a, const auto& b) { return a.second < b.second; });
  return it->first;
}

BaselineOutcome single_architecture(const MOOProblem& p, bool by_accuracy,
                                    const std::optional<Signature>& sig) {
  std::vector<std::string> archs;
  for (const auto& task : p.space().tasks) archs.push_back(pick_architecture(p, task, by_accuracy));

  std::vector<std::size_t> pool;
  const auto& vars = p.space().variables;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    bool ok = on_signature(vars[i], sig);
    for (std::size_t t = 0; ok && t < archs.size(); ++t)
      ok = p.model(vars[i].configs[t].model_id).architecture == archs[t];
    if (ok) pool.push_back(i);
  }
  if (pool.empty()) return not_applicable("architecture not deployable on this mapping");

  ScoredSpace s;
  try {
    s = score_space(p);
  } catch (const InfeasibleError& e) {
    BaselineOutcome o;
    o.violated = e.constraint();
    o.reason = "violates " + o.violated;
    return o;
  }
  const auto rows = row_lookup(p, s);
  std::vector<char> in_pool(vars.size(), 0);
  for (std::size_t i : pool) in_pool[i] = 1;
  for (std::size_t row : s.sorted.order) {
    const std::size_t idx = s.space.indices[row];
    if (in_pool[idx]) return place(p, vars[idx], rows);
  }
  BaselineOutcome o;
  o.violated = worst_constraint(p, pool);
  o.reason = "every variant violates " + o.violated;
  return o;
}

// ---------------------------------------------------------------------------
// Per-task decomposition (multi-DNN-unaware and weighted sum)

/// Single-task problem for task t: objectives/constraints of that task only,
/// multi-DNN metrics dropped.
MOOProblem task_subproblem(const MOOProblem& p, std::size_t t) {
  SLOSpec slo;
  auto localise = [&](MetricId id) -> std::optional<MetricId> {
    if (id.metric == Metric::NTT || id.metric == Metric::STP || id.metric == Metric::F)
      return std::nullopt;
    if (id.task.kind == TaskScope::Kind::Single && id.task.index != t) return std::nullopt;
    id.task = TaskScope::single(0);
    return id;
  };
  for (const auto& o : p.objectives())
    if (auto id = localise(o.id)) {
      Objective copy = o;
      copy.id = *id;
      // Compiled accuracy directions already account for the metric's
      // orientation; recompilation must not flip them again.
      if (copy.id.metric == Metric::A &&
          p.model(p.space().variables.front().configs[t].model_id).accuracy_direction ==
              AccuracyDirection::LowerBetter)
        copy.direction = copy.direction == Direction::Maximize ? Direction::Minimize
                                                               : Direction::Maximize;
      slo.objectives.push_back(copy);
    }
  for (const auto& c : p.constraints())
    if (auto id = localise(c.id)) {
      Constraint copy = c;
      copy.id = *id;
      slo.constraints.push_back(copy);
    }
  if (slo.objectives.empty()) {
    MetricId a;
    a.metric = Metric::A;
    a.task = TaskScope::single(0);
    slo.objectives.push_back({a, Direction::Maximize, 1.0});
  }
  return MOOProblem::compile(p.profile_ptr(), slo, {p.space().tasks[t]}, p.contention());
}

std::optional<std::size_t> weighted_sum_choice(const MOOProblem& p, const ScoredSpace& s,
                                               const std::optional<std::string>& engine) {
  std::vector<std::size_t> all(p.space().variables.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const ObjectiveMatrix full = build_objective_matrix(all, p);
  const auto scores = weighted_sum_scores(s.matrix, full);
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < s.space.size(); ++r) {
    const auto& x = p.space().variables[s.space.indices[r]];
    if (engine && x.configs.front().hw.engine != *engine) continue;
    if (!best || scores[r] > scores[*best]) best = r;
  }
  return best;
}

BaselineOutcome weighted_sum_single(const MOOProblem& p, const std::optional<Signature>& sig) {
  ScoredSpace s;
  try {
    s = score_space(p);
  } catch (const InfeasibleError& e) {
    BaselineOutcome o;
    o.violated = e.constraint();
    o.reason = "violates " + o.violated;
    return o;
  }
  std::vector<std::size_t> all(p.space().variables.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const ObjectiveMatrix full = build_objective_matrix(all, p);
  const auto scores = weighted_sum_scores(s.matrix, full);
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < s.space.size(); ++r) {
    if (!on_signature(p.space().variables[s.space.indices[r]], sig)) continue;
    if (!best || scores[r] > scores[*best]) best = r;
  }
  if (!best) return not_applicable("no feasible configuration on this mapping");
  return place(p, p.space().variables[s.space.indices[*best]], row_lookup(p, s));
}

BaselineOutcome decomposed(const MOOProblem& p, bool weighted,
                           const std::optional<Signature>& sig) {
  DecisionVariable x;
  for (std::size_t t = 0; t < p.task_count(); ++t) {
    std::optional<std::string> engine;
    if (sig) engine = (*sig)[t];
    MOOProblem sub = task_subproblem(p, t);
    ScoredSpace s;
    try {
      s = score_space(sub);
    } catch (const InfeasibleError& e) {
      BaselineOutcome o;
      o.violated = e.constraint();
      o.reason = "task " + std::to_string(t) + " infeasible: " + o.violated;
      return o;
    }
    std::optional<std::size_t> row;
    if (weighted) {
      row = weighted_sum_choice(sub, s, engine);
    } else {
      for (std::size_t r : s.sorted.order) {
        if (!engine || sub.space().variables[s.space.indices[r]].configs.front().hw.engine ==
                           *engine) {
          row = r;
          break;
        }
      }
    }
    if (!row) return not_applicable("task " + std::to_string(t) + " has no feasible config on " +
                                    *engine);
    x.configs.push_back(sub.space().variables[s.space.indices[*row]].configs.front());
  }
  ScoredSpace target;
  try {
    target = score_space(p);
  } catch (const InfeasibleError& e) {
    BaselineOutcome o;
    o.x = x;
    o.space_index = find_in_space(p, x);
    o.violated = e.constraint();
    o.reason = "violates " + o.violated;
    return o;
  }
  return place(p, x, row_lookup(p, target));
}

// ---------------------------------------------------------------------------
// Transferred baseline

BaselineOutcome transferred(const MOOProblem& p, const std::shared_ptr<const ProfileDB>& source,
                            const std::optional<Signature>& sig) {
  if (!source) throw ValueError("transferred baseline needs a source profile");
  std::optional<DecisionVariable> chosen;
  try {
    MOOProblem src = MOOProblem::compile(source, p.slo(), p.space().tasks, p.contention());
    std::vector<double> weights;
    for (const auto& o : p.objectives()) weights.push_back(o.weight);
    src.set_weights(weights);
    const ScoredSpace s = score_space(src);
    for (std::size_t r : s.sorted.order) {
      const auto& x = src.space().variables[s.space.indices[r]];
      if (on_signature(x, sig)) {
        chosen = x;
        break;
      }
    }
  } catch (const InfeasibleError& e) {
    BaselineOutcome o;
    o.violated = e.constraint();
    o.reason = "infeasible on " + source->device_name + ": " + o.violated;
    return o;
  } catch (const EmptySpaceError&) {
    return not_applicable("source device lacks a task");
  }
  if (!chosen)
    return not_applicable(source->device_name + " has no design on this mapping");

  // Only now is the target consulted.
  ScoredSpace target;
  try {
    target = score_space(p);
  } catch (const InfeasibleError& e) {
    BaselineOutcome o;
    o.x = chosen;
    o.violated = e.constraint();
    o.reason = "violates " + o.violated;
    return o;
  }
  return place(p, *chosen, row_lookup(p, target));
}

}  // namespace

std::vector<double> weighted_sum_scores(const ObjectiveMatrix& candidates,
                                        const ObjectiveMatrix& normalisation) {
  if (candidates.cols != normalisation.cols)
    throw ValueError("weighted sum: column mismatch");
  std::vector<double> lo(candidates.cols), hi(candidates.cols);
  for (std::size_t c = 0; c < candidates.cols; ++c) {
    lo[c] = hi[c] = normalisation.at(0, c);
    for (std::size_t r = 0; r < normalisation.rows; ++r) {
      lo[c] = std::min(lo[c], normalisation.at(r, c));
      hi[c] = std::max(hi[c], normalisation.at(r, c));
    }
  }
  std::vector<double> out(candidates.rows, 0.0);
  for (std::size_t r = 0; r < candidates.rows; ++r) {
    for (std::size_t c = 0; c < candidates.cols; ++c) {
      double n = hi[c] > lo[c] ? (candidates.at(r, c) - lo[c]) / (hi[c] - lo[c]) : 1.0;
      if (candidates.directions[c] == Direction::Minimize) n = 1.0 - n;
      out[r] += candidates.weights[c] * n;
    }
  }
  return out;
}

BaselineOutcome run_baseline(const BaselineKind& kind, const MOOProblem& problem,
                             const std::optional<std::vector<std::string>>& signature) {
  BaselineOutcome o;
  switch (kind.kind) {
    case BaselineKind::Kind::BestAccuracy: o = single_architecture(problem, true, signature); break;
    case BaselineKind::Kind::BestSize: o = single_architecture(problem, false, signature); break;
    case BaselineKind::Kind::Transferred: o = transferred(problem, kind.source, signature); break;
    case BaselineKind::Kind::MultiUnaware: o = decomposed(problem, false, signature); break;
    case BaselineKind::Kind::WeightedSum:
      o = problem.task_count() == 1 ? weighted_sum_single(problem, signature)
                                    : decomposed(problem, true, signature);
      break;
  }
  return o;
}

// ---------------------------------------------------------------------------
// Comparison report

ComparisonReport compare(const MOOProblem& problem, const Solution& solution,
                         const std::vector<BaselineKind>& kinds, bool per_state) {
  const ScoredSpace scored = score_space(problem);
  const auto rows = row_lookup(problem, scored);
  const auto classes = partition_mappings(scored.sorted, scored.space, problem);
  const auto& vars = problem.space().variables;

  ComparisonReport report;
  auto add_row = [&](const BaselineKind& kind, const std::string& state,
                     const OptimalityScore& ref_score, const DecisionVariable& ref_x,
                     const BaselineOutcome& out) {
    ComparisonRow row;
    row.baseline = kind.name();
    row.state = state;
    row.reference = ref_x.describe();
    row.reference_opt = ref_score.opt;
    row.reason = out.reason;
    if (out.x) row.chosen = out.x->describe();
    if (out.feasible) {
      const OptimalityScore& b = scored.scores[*rows[*out.space_index]];
      row.feasible = true;
      row.baseline_opt = b.opt;
      row.ratio = optimality_ratio(ref_score, b);
    } else {
      row.marker = out.not_applicable ? "N/A" : "!";
    }
    report.rows.push_back(std::move(row));
  };

  const Design& d0 = solution.designs.ranked.front();
  for (const auto& kind : kinds) {
    add_row(kind, "*", scored.scores[scored.sorted.order.front()], d0.x,
            run_baseline(kind, problem));
    if (!per_state) continue;
    for (const auto& cls : classes) {
      const std::size_t head = cls.members.front();
      add_row(kind, join_signature(cls.signature), scored.scores[head],
              vars[scored.space.indices[head]], run_baseline(kind, problem, cls.signature));
    }
  }
  return report;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string opt_text(double v) {
  if (std::isinf(v)) return "utopia";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string write_report_csv(const ComparisonReport& report) {
  std::string out =
      "baseline,state,feasible,marker,chosen,reference,baseline_opt,reference_opt,ratio,reason\n";
  for (const auto& r : report.rows) {
    out += csv_field(r.baseline) + "," + csv_field(r.state) + "," +
           (r.feasible ? "true" : "false") + "," + r.marker + "," + csv_field(r.chosen) + "," +
           csv_field(r.reference) + "," + (r.feasible ? opt_text(r.baseline_opt) : "") + "," +
           opt_text(r.reference_opt) + "," + (r.feasible ? opt_text(r.ratio) : "") + "," +
           csv_field(r.reason) + "\n";
  }
  return out;
}

}  // namespace rass
