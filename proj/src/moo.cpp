#include "rass/moo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "parallel.hpp"
#include "rass/errors.hpp"
#include "rass/stats.hpp"

namespace rass {

namespace {

std::string record_key(const std::string& model_id, const HardwareConfig& hw) {
  return model_id + '\n' + hw.encode();
}

std::string joint_key(const std::vector<std::pair<std::string, HardwareConfig>>& entries) {
  std::string key;
  for (const auto& [id, hw] : entries) key += record_key(id, hw) + '\x1f';
  return key;
}

bool is_multi_metric(Metric m) {
  return m == Metric::NTT || m == Metric::STP || m == Metric::F;
}

bool is_per_task(Metric m) { return !is_multi_metric(m); }

}  // namespace

// ---------------------------------------------------------------------------
// Decision space

std::vector<std::string> DecisionVariable::signature() const {
  std::vector<std::string> out;
  out.reserve(configs.size());
  for (const auto& c : configs) out.push_back(c.hw.engine);
  return out;
}

std::string DecisionVariable::describe() const {
  std::string out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (i) out += " | ";
    out += configs[i].model_id + " @ " + configs[i].hw.encode();
  }
  return out;
}

DecisionSpace build_decision_space(const ProfileDB& db, const std::vector<std::string>& tasks) {
  if (tasks.empty()) throw EmptySpaceError("no tasks given");
  std::vector<std::vector<ExecutionConfig>> per_task;
  for (const auto& task : tasks) {
    std::vector<ExecutionConfig> configs;
    for (const auto& r : db.single_records) {
      const ModelVariant* m = db.find_model(r.model_id);
      if (m && m->task_id == task) configs.push_back({r.model_id, r.hw});
    }
    if (configs.empty())
      throw EmptySpaceError("task '" + task + "' has no execution configurations");
    std::sort(configs.begin(), configs.end(), [](const auto& a, const auto& b) {
      if (a.model_id != b.model_id) return a.model_id < b.model_id;
      return a.hw.encode() < b.hw.encode();
    });
    per_task.push_back(std::move(configs));
  }

  DecisionSpace space;
  space.tasks = tasks;
  std::size_t total = 1;
  for (const auto& c : per_task) total *= c.size();
  space.variables.reserve(total);

  std::vector<std::size_t> digits(per_task.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    DecisionVariable x;
    for (std::size_t t = 0; t < per_task.size(); ++t) x.configs.push_back(per_task[t][digits[t]]);
    space.variables.push_back(std::move(x));
    for (std::size_t t = per_task.size(); t-- > 0;) {
      if (++digits[t] < per_task[t].size()) break;
      digits[t] = 0;
    }
  }
  return space;
}

// ---------------------------------------------------------------------------
// Problem compilation

namespace {

void expand(const MetricId& id, std::size_t m, const std::function<void(MetricId)>& emit) {
  if (id.task.kind == TaskScope::Kind::Unscoped && is_per_task(id.metric)) {
    for (std::size_t t = 0; t < m; ++t) {
      MetricId copy = id;
      copy.task = TaskScope::single(t);
      emit(copy);
    }
  } else {
    emit(id);
  }
}

}  // namespace

MOOProblem MOOProblem::compile(std::shared_ptr<const ProfileDB> db, SLOSpec slo,
                               std::vector<std::string> tasks, ContentionParams contention) {
  if (!db) throw SchemaError("no profile database");
  if (!(contention.alpha >= 0)) throw ValueError("contention alpha must be >= 0");
  MOOProblem p;
  p.db_ = std::move(db);
  if (tasks.empty()) tasks = slo.tasks;
  if (tasks.empty()) {
    // Single task inferred from the profile when unambiguous.
    std::set<std::string> ids;
    for (const auto& m : p.db_->models) ids.insert(m.task_id);
    if (ids.size() != 1)
      throw SemanticError("SLO spec names no tasks and the profile has several");
    tasks.push_back(*ids.begin());
  }
  slo.tasks = tasks;
  p.slo_ = std::move(slo);
  p.contention_ = contention;

  for (std::size_t i = 0; i < p.db_->models.size(); ++i)
    p.model_index_.emplace(p.db_->models[i].id, i);
  for (std::size_t i = 0; i < p.db_->single_records.size(); ++i) {
    const auto& r = p.db_->single_records[i];
    p.record_index_.emplace(record_key(r.model_id, r.hw), i);
  }
  for (std::size_t i = 0; i < p.db_->joint_records.size(); ++i)
    p.joint_index_.emplace(joint_key(p.db_->joint_records[i].entries), i);

  p.space_ = build_decision_space(*p.db_, tasks);
  const std::size_t m = tasks.size();

  auto check = [&](const MetricId& id) {
    if (is_multi_metric(id.metric) && m < 2)
      throw SemanticError(std::string(to_string(id.metric)) +
                          " requires at least two concurrent tasks");
    if (id.task.kind == TaskScope::Kind::Single && id.task.index >= m)
      throw SemanticError("task index " + std::to_string(id.task.index) + " out of range");
  };

  // Accuracy direction comes from model metadata; all variants of a task
  // must agree.
  std::vector<AccuracyDirection> acc_dir(m);
  for (std::size_t t = 0; t < m; ++t) {
    bool first = true;
    for (const auto& model : p.db_->models) {
      if (model.task_id != tasks[t]) continue;
      if (first) acc_dir[t] = model.accuracy_direction;
      else if (acc_dir[t] != model.accuracy_direction)
        throw SemanticError("task '" + tasks[t] + "' mixes accuracy directions");
      first = false;
    }
  }

  bool uses_energy = false;
  for (const auto& o : p.slo_.objectives) {
    check(o.id);
    expand(o.id, m, [&](MetricId id) {
      Objective c{id, o.direction, o.weight};
      if (id.metric == Metric::A && acc_dir[id.task.index] == AccuracyDirection::LowerBetter)
        c.direction = o.direction == Direction::Maximize ? Direction::Minimize
                                                         : Direction::Maximize;
      uses_energy = uses_energy || id.metric == Metric::E;
      p.objectives_.push_back(c);
    });
  }
  for (const auto& con : p.slo_.constraints) {
    check(con.id);
    expand(con.id, m, [&](MetricId id) {
      Constraint c = con;
      c.id = id;
      uses_energy = uses_energy || id.metric == Metric::E;
      p.constraints_.push_back(c);
    });
  }
  if (p.objectives_.empty()) throw SemanticError("problem has no objectives");

  if (uses_energy) {
    for (const auto& r : p.db_->single_records) {
      const ModelVariant* model = p.db_->find_model(r.model_id);
      if (std::find(tasks.begin(), tasks.end(), model->task_id) != tasks.end() && !r.energy_j)
        throw EnergyUnavailable("energy referenced but '" + r.model_id + "' on " +
                                r.hw.encode() + " has no energy measurement");
    }
  }
  return p;
}

const ModelVariant& MOOProblem::model(std::string_view id) const {
  auto it = model_index_.find(std::string(id));
  if (it == model_index_.end()) throw SchemaError("unknown model '" + std::string(id) + "'");
  return db_->models[it->second];
}

const MeasurementRecord& MOOProblem::record(const ExecutionConfig& e) const {
  auto it = record_index_.find(record_key(e.model_id, e.hw));
  if (it == record_index_.end())
    throw SchemaError("no measurement for '" + e.model_id + "' on " + e.hw.encode());
  return db_->single_records[it->second];
}

const JointMeasurementRecord* MOOProblem::joint_record(const DecisionVariable& x) const {
  if (joint_index_.empty()) return nullptr;
  std::vector<std::pair<std::string, HardwareConfig>> entries;
  for (const auto& c : x.configs) entries.emplace_back(c.model_id, c.hw);
  auto it = joint_index_.find(joint_key(entries));
  return it == joint_index_.end() ? nullptr : &db_->joint_records[it->second];
}

void MOOProblem::set_weights(const std::vector<double>& weights) {
  if (weights.size() != objectives_.size())
    throw ValueError("expected " + std::to_string(objectives_.size()) + " weights, got " +
                     std::to_string(weights.size()));
  for (double w : weights)
    if (!(w > 0)) throw ValueError("weights must be positive");
  for (std::size_t i = 0; i < weights.size(); ++i) objectives_[i].weight = weights[i];
}

// ---------------------------------------------------------------------------
// Metric evaluation

std::vector<double> task_latency_samples(const DecisionVariable& x, std::size_t task,
                                         const MOOProblem& problem, bool multi_mode) {
  const MeasurementRecord& rec = problem.record(x.configs.at(task));
  if (!multi_mode || x.configs.size() < 2) return rec.latency_samples;
  if (const JointMeasurementRecord* joint = problem.joint_record(x))
    return joint->joint_latency_samples[task];
  if (!problem.contention().enabled)
    throw MissingDataError("no joint measurement for " + x.describe() +
                           " and the contention model is disabled");
  std::size_t sharing = 0;
  for (const auto& c : x.configs) sharing += c.hw.engine == x.configs[task].hw.engine;
  const double factor = 1.0 + problem.contention().alpha * static_cast<double>(sharing - 1);
  std::vector<double> out = rec.latency_samples;
  for (double& v : out) v *= factor;
  return out;
}

MultiDnnMetrics multi_dnn_metrics(const std::vector<double>& single_avg_ms,
                                  const std::vector<double>& multi_avg_ms) {
  if (single_avg_ms.size() != multi_avg_ms.size() || single_avg_ms.empty())
    throw ValueError("multi-DNN metrics need one single/multi latency pair per task");
  MultiDnnMetrics out;
  double np_min = std::numeric_limits<double>::infinity();
  double np_max = 0.0;
  for (std::size_t i = 0; i < single_avg_ms.size(); ++i) {
    const double ntt = multi_avg_ms[i] / single_avg_ms[i];
    const double np = 1.0 / ntt;
    out.ntt.push_back(ntt);
    out.stp += np;
    np_min = std::min(np_min, np);
    np_max = std::max(np_max, np);
  }
  // min over ordered pairs of NP_i / NP_j
  out.fairness = np_min / np_max;
  return out;
}

namespace {

double latency_statistic(const std::vector<double>& xs, const MetricId& id) {
  switch (id.statistic) {
    case Statistic::Min: return stats::min(xs);
    case Statistic::Max: return stats::max(xs);
    case Statistic::Avg: return stats::mean(xs);
    case Statistic::Std: return stats::stddev(xs);
    case Statistic::Percentile: return stats::percentile(xs, id.percentile);
    case Statistic::Value: break;
  }
  throw SemanticError("latency requires a statistic");
}

template <typename Fn>
double over_tasks(const DecisionVariable& x, const MetricId& id, Fn&& per_task) {
  if (id.task.kind == TaskScope::Kind::All) {
    double sum = 0.0;
    for (std::size_t t = 0; t < x.configs.size(); ++t) sum += per_task(t);
    return sum;
  }
  return per_task(id.task.kind == TaskScope::Kind::Single ? id.task.index : 0);
}

MultiDnnMetrics multi_for(const DecisionVariable& x, const MOOProblem& problem) {
  std::vector<double> single, multi;
  for (std::size_t t = 0; t < x.configs.size(); ++t) {
    single.push_back(stats::mean(task_latency_samples(x, t, problem, false)));
    multi.push_back(stats::mean(task_latency_samples(x, t, problem, true)));
  }
  return multi_dnn_metrics(single, multi);
}

}  // namespace

double evaluate_metric(const DecisionVariable& x, const MetricId& id, const MOOProblem& problem) {
  const bool multi_mode = x.configs.size() > 1;
  switch (id.metric) {
    case Metric::S:
      return over_tasks(x, id, [&](std::size_t t) {
        return problem.model(x.configs.at(t).model_id).size_mb;
      });
    case Metric::W:
      return over_tasks(x, id, [&](std::size_t t) {
        return problem.model(x.configs.at(t).model_id).flops;
      });
    case Metric::A:
      return over_tasks(x, id, [&](std::size_t t) {
        return problem.model(x.configs.at(t).model_id).accuracy;
      });
    case Metric::MF:
      return over_tasks(x, id, [&](std::size_t t) {
        return problem.record(x.configs.at(t)).memory_mb;
      });
    case Metric::E:
      return over_tasks(x, id, [&](std::size_t t) {
        const auto& rec = problem.record(x.configs.at(t));
        if (!rec.energy_j)
          throw EnergyUnavailable("no energy measurement for '" + rec.model_id + "' on " +
                                  rec.hw.encode());
        return *rec.energy_j;
      });
    case Metric::L:
      return over_tasks(x, id, [&](std::size_t t) {
        return latency_statistic(task_latency_samples(x, t, problem, multi_mode), id);
      });
    case Metric::TP:
      return over_tasks(x, id, [&](std::size_t t) {
        const auto& rec = problem.record(x.configs.at(t));
        const double avg_ms = stats::mean(task_latency_samples(x, t, problem, multi_mode));
        return static_cast<double>(rec.batch) / (avg_ms / 1000.0);
      });
    case Metric::NTT: {
      const MultiDnnMetrics mm = multi_for(x, problem);
      if (id.task.kind == TaskScope::Kind::Single) return mm.ntt.at(id.task.index);
      if (id.statistic == Statistic::Max) return *std::max_element(mm.ntt.begin(), mm.ntt.end());
      return stats::mean(mm.ntt);
    }
    case Metric::STP:
      return multi_for(x, problem).stp;
    case Metric::F:
      return multi_for(x, problem).fairness;
  }
  throw SemanticError("unknown metric");
}

double total_memory_mb(const DecisionVariable& x, const MOOProblem& problem) {
  double sum = 0.0;
  for (const auto& c : x.configs) sum += problem.record(c).memory_mb;
  return sum;
}

double total_workload(const DecisionVariable& x, const MOOProblem& problem) {
  double sum = 0.0;
  for (const auto& c : x.configs) sum += problem.model(c.model_id).flops;
  return sum;
}

// ---------------------------------------------------------------------------
// Constraints

ConstrainedSpace apply_constraints(const MOOProblem& problem) {
  const auto& vars = problem.space().variables;
  const auto& cons = problem.constraints();
  ConstrainedSpace out;
  out.rejections.assign(cons.size(), 0);
  if (cons.empty()) {
    out.indices.resize(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) out.indices[i] = i;
    return out;
  }

  std::vector<std::vector<char>> violated(vars.size(), std::vector<char>(cons.size(), 0));
  detail::parallel_for(vars.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < cons.size(); ++j)
      violated[i][j] = cons[j].slack(evaluate_metric(vars[i], cons[j].id, problem)) > 0.0;
  });
  for (std::size_t i = 0; i < vars.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < cons.size(); ++j) {
      if (violated[i][j]) {
        ++out.rejections[j];
        ok = false;
      }
    }
    if (ok) out.indices.push_back(i);
  }
  if (out.indices.empty()) {
    const auto worst = std::max_element(out.rejections.begin(), out.rejections.end());
    const Constraint& c = cons[static_cast<std::size_t>(worst - out.rejections.begin())];
    throw InfeasibleError(c.label(), "no decision variable satisfies every constraint; '" +
                                         c.label() + "' rejects " + std::to_string(*worst) +
                                         " of " + std::to_string(vars.size()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Objective matrix

namespace {

ObjectiveMatrix empty_matrix(std::size_t rows, const MOOProblem& problem) {
  ObjectiveMatrix m;
  m.rows = rows;
  m.cols = problem.objectives().size();
  m.values.assign(m.rows * m.cols, 0.0);
  for (const auto& o : problem.objectives()) {
    m.directions.push_back(o.direction);
    m.weights.push_back(o.weight);
    m.labels.push_back(o.id.label());
  }
  return m;
}

void fill_row(ObjectiveMatrix& m, std::size_t r, const DecisionVariable& x,
              const MOOProblem& problem) {
  for (std::size_t c = 0; c < m.cols; ++c) {
    const double v = evaluate_metric(x, problem.objectives()[c].id, problem);
    if (!std::isfinite(v))
      throw ValueError("non-finite objective '" + m.labels[c] + "' for " + x.describe());
    m.at(r, c) = v;
  }
}

}  // namespace

ObjectiveMatrix build_objective_matrix(const std::vector<std::size_t>& indices,
                                       const MOOProblem& problem) {
  ObjectiveMatrix m = empty_matrix(indices.size(), problem);
  const auto& vars = problem.space().variables;
  detail::parallel_for(indices.size(),
                       [&](std::size_t r) { fill_row(m, r, vars[indices[r]], problem); });
  return m;
}

ObjectiveMatrix build_objective_matrix(const ConstrainedSpace& space, const MOOProblem& problem) {
  return build_objective_matrix(space.indices, problem);
}

ObjectiveMatrix build_objective_matrix_serial(const ConstrainedSpace& space,
                                              const MOOProblem& problem) {
  ObjectiveMatrix m = empty_matrix(space.size(), problem);
  const auto& vars = problem.space().variables;
  for (std::size_t r = 0; r < space.size(); ++r) fill_row(m, r, vars[space.indices[r]], problem);
  return m;
}

}  // namespace rass
