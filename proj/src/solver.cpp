#include "rass/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "parallel.hpp"
#include "rass/errors.hpp"
#include "rass/stats.hpp"

namespace rass {

// ---------------------------------------------------------------------------
// Optimality

namespace {

ColumnStats stats_for_column(const ObjectiveMatrix& m, std::size_t c) {
  ColumnStats s;
  double sum = 0.0;
  s.min = s.max = m.at(0, c);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double v = m.at(r, c);
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  const double mu = sum / static_cast<double>(m.rows);
  double acc = 0.0;
  for (std::size_t r = 0; r < m.rows; ++r) acc += (m.at(r, c) - mu) * (m.at(r, c) - mu);
  s.variance = acc / static_cast<double>(m.rows);
  s.utopia = m.directions[c] == Direction::Maximize ? s.max : s.min;
  return s;
}

// w^2 * diff^2 / s^2, with a zero difference contributing nothing (this also
// covers zero-variance columns, whose differences are all zero).
double weighted_term(double weight, double diff, double variance) {
  if (diff == 0.0 || variance == 0.0) return 0.0;
  return weight * weight * diff * diff / variance;
}

double max_distance(const ObjectiveMatrix& m, const std::vector<ColumnStats>& cs) {
  double acc = 0.0;
  for (std::size_t c = 0; c < m.cols; ++c)
    acc += weighted_term(m.weights[c], cs[c].max - cs[c].min, cs[c].variance);
  return std::sqrt(acc);
}

OptimalityScore score_row(const ObjectiveMatrix& m, const std::vector<ColumnStats>& cs,
                          double d_max, std::size_t r) {
  OptimalityScore s;
  double acc = 0.0;
  for (std::size_t c = 0; c < m.cols; ++c)
    acc += weighted_term(m.weights[c], m.at(r, c) - cs[c].utopia, cs[c].variance);
  s.d = std::sqrt(acc);
  if (d_max == 0.0 || s.d == 0.0) {
    s.d_s = 0.0;
    s.opt = std::numeric_limits<double>::infinity();
    s.utopia = true;
    return s;
  }
  s.d_s = s.d / d_max;
  s.opt = 1.0 / s.d_s;
  return s;
}

void require_rows(const ObjectiveMatrix& m) {
  if (m.rows == 0) throw ValueError("optimality of an empty matrix");
  if (m.cols == 0) throw ValueError("optimality needs at least one objective");
}

}  // namespace

std::vector<ColumnStats> column_stats(const ObjectiveMatrix& m) {
  require_rows(m);
  std::vector<ColumnStats> cs(m.cols);
  for (std::size_t c = 0; c < m.cols; ++c) cs[c] = stats_for_column(m, c);
  return cs;
}

std::vector<OptimalityScore> compute_optimality(const ObjectiveMatrix& m) {
  require_rows(m);
  std::vector<ColumnStats> cs(m.cols);
  detail::parallel_for(m.cols, [&](std::size_t c) { cs[c] = stats_for_column(m, c); });
  const double d_max = max_distance(m, cs);
  std::vector<OptimalityScore> scores(m.rows);
  detail::parallel_for(m.rows, [&](std::size_t r) { scores[r] = score_row(m, cs, d_max, r); });
  return scores;
}

std::vector<OptimalityScore> compute_optimality_serial(const ObjectiveMatrix& m) {
  const std::vector<ColumnStats> cs = column_stats(m);
  const double d_max = max_distance(m, cs);
  std::vector<OptimalityScore> scores;
  scores.reserve(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) scores.push_back(score_row(m, cs, d_max, r));
  return scores;
}

double ranking_key(double opt) {
  if (!std::isfinite(opt) || opt == 0.0) return opt;
  int e = 0;
  const double m = std::frexp(opt, &e);
  return std::ldexp(std::round(std::ldexp(m, kRankingBits)), e - kRankingBits);
}

bool better_than(const OptimalityScore& a, const OptimalityScore& b) {
  if (a.utopia != b.utopia) return a.utopia;
  if (a.utopia) return false;
  return ranking_key(a.opt) > ranking_key(b.opt);
}

double optimality_ratio(const OptimalityScore& a, const OptimalityScore& b) {
  if (a.utopia && b.utopia) return 1.0;
  if (a.utopia) return std::numeric_limits<double>::infinity();
  if (b.utopia) return 0.0;
  if (ranking_key(a.opt) == ranking_key(b.opt)) return 1.0;
  return a.opt / b.opt;
}

// ---------------------------------------------------------------------------
// Sorting and partitioning

SortedSpace sort_space(const std::vector<OptimalityScore>& scores) {
  SortedSpace s;
  s.order.resize(scores.size());
  std::iota(s.order.begin(), s.order.end(), std::size_t{0});
  // Rows arrive in the space's lexicographic order, so a stable sort breaks
  // ties on (model_id, hw encoding).
  std::stable_sort(s.order.begin(), s.order.end(), [&](std::size_t a, std::size_t b) {
    return better_than(scores[a], scores[b]);
  });
  return s;
}

std::vector<MappingClass> partition_mappings(const SortedSpace& sorted,
                                             const ConstrainedSpace& space,
                                             const MOOProblem& problem, std::size_t limit) {
  if (sorted.order.empty()) throw ValueError("cannot partition an empty space");
  std::vector<MappingClass> classes;
  const auto& vars = problem.space().variables;
  for (std::size_t row : sorted.order) {
    auto sig = vars[space.indices[row]].signature();
    auto it = std::find_if(classes.begin(), classes.end(),
                           [&](const MappingClass& c) { return c.signature == sig; });
    if (it == classes.end()) {
      classes.push_back({std::move(sig), {row}});
    } else {
      it->members.push_back(row);
    }
  }
  if (classes.size() > limit) classes.resize(limit);
  return classes;
}

// ---------------------------------------------------------------------------
// Designs

std::string_view to_string(DesignLabel l) {
  switch (l) {
    case DesignLabel::D0: return "d0";
    case DesignLabel::D1: return "d1";
    case DesignLabel::D2: return "d2";
    case DesignLabel::DM: return "dm";
    case DesignLabel::DW: return "dw";
    case DesignLabel::DWM: return "dwm";
  }
  return "?";
}

DesignLabel design_label_from_string(std::string_view s) {
  for (DesignLabel l : {DesignLabel::D0, DesignLabel::D1, DesignLabel::D2, DesignLabel::DM,
                        DesignLabel::DW, DesignLabel::DWM})
    if (to_string(l) == s) return l;
  throw SchemaError("unknown design label '" + std::string(s) + "'");
}

DesignLabel ranked_label(std::size_t i) {
  switch (i) {
    case 0: return DesignLabel::D0;
    case 1: return DesignLabel::D1;
    case 2: return DesignLabel::D2;
    default: throw ValueError("at most three ranked designs");
  }
}

double Design::metric(std::string_view name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  throw ValueError("design has no metric '" + std::string(name) + "'");
}

const Design& DesignSet::get(DesignLabel l) const {
  switch (l) {
    case DesignLabel::D0:
    case DesignLabel::D1:
    case DesignLabel::D2: {
      const auto i = static_cast<std::size_t>(l) - static_cast<std::size_t>(DesignLabel::D0);
      if (i >= ranked.size())
        throw ValueError("design set has no " + std::string(to_string(l)));
      return ranked[i];
    }
    case DesignLabel::DM: return dm;
    case DesignLabel::DW: return dw;
    case DesignLabel::DWM: return get(dwm_source);
  }
  throw ValueError("bad design label");
}

std::size_t DesignSet::distinct_count() const {
  std::vector<const DecisionVariable*> seen;
  auto add = [&](const DecisionVariable& x) {
    for (const auto* s : seen)
      if (*s == x) return;
    seen.push_back(&x);
  };
  for (const auto& d : ranked) add(d.x);
  add(dm.x);
  add(dw.x);
  return seen.size();
}

ScoredSpace score_space(const MOOProblem& problem) {
  ScoredSpace s;
  s.space = apply_constraints(problem);
  s.matrix = build_objective_matrix(s.space, problem);
  s.scores = compute_optimality(s.matrix);
  s.sorted = sort_space(s.scores);
  return s;
}

Design make_design(DesignLabel label, std::size_t row, const ScoredSpace& scored,
                   const MOOProblem& problem) {
  Design d;
  d.label = label;
  d.row = row;
  d.x = problem.space().variables[scored.space.indices[row]];
  d.score = scored.scores[row];
  for (std::size_t c = 0; c < scored.matrix.cols; ++c)
    d.metrics.emplace_back(scored.matrix.labels[c], scored.matrix.at(row, c));
  d.metrics.emplace_back("MF", total_memory_mb(d.x, problem));
  d.metrics.emplace_back("W", total_workload(d.x, problem));
  const bool multi = d.x.configs.size() > 1;
  for (std::size_t t = 0; t < d.x.configs.size(); ++t) {
    const auto& cfg = d.x.configs[t];
    const auto& rec = problem.record(cfg);
    const auto& model = problem.model(cfg.model_id);
    const auto samples = task_latency_samples(d.x, t, problem, multi);
    d.runtime.push_back({cfg.hw.engine, stats::mean(samples), stats::stddev(samples),
                         model.accuracy, rec.memory_mb, model.flops, rec.batch});
  }
  return d;
}

double memory_workload_cost(double mf, double w, double mf_min, double mf_max, double w_min,
                            double w_max) {
  auto norm = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };
  return norm(mf, mf_min, mf_max) + norm(w, w_min, w_max);
}

DesignSet select_designs(const std::vector<MappingClass>& classes, const ScoredSpace& scored,
                         const MOOProblem& problem) {
  if (classes.empty()) throw ValueError("design selection needs at least one mapping class");
  if (classes.size() > 3) throw ValueError("at most three mapping classes are retained");
  DesignSet set;
  set.engine_set = problem.profile().engine_set;
  set.tasks = problem.space().tasks;
  for (std::size_t i = 0; i < classes.size(); ++i)
    set.ranked.push_back(make_design(ranked_label(i), classes[i].members.front(), scored, problem));

  // Candidate pool: members of the retained classes, visited best-first so
  // equal MF or W resolve to the higher-optimality member.
  std::vector<char> retained(scored.space.size(), 0);
  for (const auto& c : classes)
    for (std::size_t row : c.members) retained[row] = 1;

  const auto& vars = problem.space().variables;
  std::vector<double> mf(scored.space.size()), w(scored.space.size());
  for (std::size_t row = 0; row < scored.space.size(); ++row) {
    mf[row] = total_memory_mb(vars[scored.space.indices[row]], problem);
    w[row] = total_workload(vars[scored.space.indices[row]], problem);
  }
  std::optional<std::size_t> best_mf, best_w;
  for (std::size_t row : scored.sorted.order) {
    if (!retained[row]) continue;
    if (!best_mf || mf[row] < mf[*best_mf]) best_mf = row;
    if (!best_w || w[row] < w[*best_w]) best_w = row;
  }
  set.dm = make_design(DesignLabel::DM, *best_mf, scored, problem);
  set.dw = make_design(DesignLabel::DW, *best_w, scored, problem);

  const auto [mf_lo, mf_hi] = std::minmax_element(mf.begin(), mf.end());
  const auto [w_lo, w_hi] = std::minmax_element(w.begin(), w.end());
  const double cost_w = memory_workload_cost(mf[*best_w], w[*best_w], *mf_lo, *mf_hi, *w_lo, *w_hi);
  const double cost_m =
      memory_workload_cost(mf[*best_mf], w[*best_mf], *mf_lo, *mf_hi, *w_lo, *w_hi);
  set.dwm_source = cost_w <= cost_m ? DesignLabel::DW : DesignLabel::DM;
  return set;
}

// ---------------------------------------------------------------------------
// Switching policy

EnvState EnvState::clear(const std::vector<std::string>& engines) {
  EnvState s;
  for (const auto& e : engines) s.engine_flags[e] = false;
  return s;
}

bool SwitchingPolicy::matches(const PolicyRule& rule, const EnvState& state) const {
  auto ok = [](Tri want, bool have) {
    return want == Tri::Any || (want == Tri::True) == have;
  };
  if (!ok(rule.memory, state.memory_flag)) return false;
  for (const auto& [engine, want] : rule.engines) {
    auto it = state.engine_flags.find(engine);
    if (!ok(want, it != state.engine_flags.end() && it->second)) return false;
  }
  return true;
}

std::optional<RuleMatch> SwitchingPolicy::match(const EnvState& state) const {
  for (std::size_t i = 0; i < rules.size(); ++i)
    if (matches(rules[i], state)) return RuleMatch{rules[i].target, i, i + 1};
  return std::nullopt;
}

namespace {

// The engine whose overload should trigger a move away from design d: the
// engine of its heaviest task, skipping engines already claimed by
// higher-ranked designs when another task's engine is free.
std::string trigger_engine(const Design& d, const std::vector<std::string>& claimed) {
  std::vector<std::size_t> tasks(d.runtime.size());
  std::iota(tasks.begin(), tasks.end(), std::size_t{0});
  std::stable_sort(tasks.begin(), tasks.end(), [&](std::size_t a, std::size_t b) {
    return d.runtime[a].workload > d.runtime[b].workload;
  });
  for (std::size_t t : tasks) {
    const auto& e = d.x.configs[t].hw.engine;
    if (std::find(claimed.begin(), claimed.end(), e) == claimed.end()) return e;
  }
  return d.x.configs[tasks.front()].hw.engine;
}

}  // namespace

void verify_policy_total(const SwitchingPolicy& policy) {
  const std::size_t n = policy.engine_set.size();
  if (n > 20) throw PolicyIncompleteError("too many engines to enumerate");
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << (n + 1)); ++bits) {
    EnvState s;
    for (std::size_t e = 0; e < n; ++e) s.engine_flags[policy.engine_set[e]] = (bits >> e) & 1;
    s.memory_flag = (bits >> n) & 1;
    if (!policy.match(s)) throw PolicyIncompleteError("policy leaves an environment state unmatched");
  }
}

SwitchingPolicy generate_switching_policy(const DesignSet& designs) {
  SwitchingPolicy p;
  p.engine_set = designs.engine_set;
  for (const auto& d : designs.ranked) p.engine_order.push_back(trigger_engine(d, p.engine_order));

  for (std::size_t i = 0; i < designs.ranked.size(); ++i) {
    PolicyRule r;
    for (std::size_t k = 0; k < i; ++k) r.engines[p.engine_order[k]] = Tri::True;
    r.engines[p.engine_order[i]] = Tri::False;
    r.memory = Tri::False;
    r.target = ranked_label(i);
    p.rules.push_back(std::move(r));
  }
  PolicyRule all_flagged;
  for (const auto& e : p.engine_order) all_flagged.engines[e] = Tri::True;
  all_flagged.memory = Tri::False;
  all_flagged.target = DesignLabel::DW;
  p.rules.push_back(all_flagged);
  all_flagged.memory = Tri::True;
  all_flagged.target = DesignLabel::DWM;
  p.rules.push_back(all_flagged);
  PolicyRule memory;
  memory.memory = Tri::True;
  memory.target = DesignLabel::DM;
  p.rules.push_back(memory);

  verify_policy_total(p);
  return p;
}

Solution solve(const MOOProblem& problem) {
  const ScoredSpace scored = score_space(problem);
  const auto classes = partition_mappings(scored.sorted, scored.space, problem, 3);
  Solution s;
  s.designs = select_designs(classes, scored, problem);
  s.policy = generate_switching_policy(s.designs);
  return s;
}

}  // namespace rass
