#pragma once

// Seeded random problems over synthetic profiles: 1 or 2 tasks, 1-5
// objectives, optional constraint, |X| <= 200.

#include <algorithm>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "rass/moo.hpp"
#include "rass/profile.hpp"

namespace corpus {

struct Case {
  std::uint64_t seed = 0;
  std::shared_ptr<const rass::ProfileDB> db;
  rass::SLOSpec slo;
};

inline rass::MetricId id(rass::Metric m, rass::Statistic s = rass::Statistic::Value, int pct = 0) {
  rass::MetricId x;
  x.metric = m;
  x.statistic = s;
  x.percentile = pct;
  return x;
}

inline Case make_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 17);
  auto pick = [&rng](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  rass::SynthSpec spec;
  spec.device_name = "dev" + std::to_string(seed);
  const int tasks = pick(0, 3) == 0 ? 2 : 1;
  spec.task_count = tasks;

  std::vector<std::string> pool = {"CPU", "GPU", "NPU", "DSP"};
  std::shuffle(pool.begin(), pool.end(), rng);
  const int engines = pick(1, 3);
  int hw_count = 0;
  for (int e = 0; e < engines; ++e) {
    rass::SynthEngine eng;
    eng.name = pool[static_cast<std::size_t>(e)];
    if (eng.name == "CPU") {
      const int opts = pick(1, 3);
      for (int t = 0; t < opts; ++t) eng.option_sets.push_back({{"threads", std::to_string(1 << t)}});
    }
    hw_count += eng.option_sets.empty() ? 1 : static_cast<int>(eng.option_sets.size());
    spec.engines.push_back(std::move(eng));
  }
  // Per-task configs = models_per_task * hw_count; keep the product <= 200.
  int per_task = pick(1, 5);
  auto space_size = [&] {
    const int c = per_task * hw_count;
    return tasks == 1 ? c : c * c;
  };
  while (per_task > 1 && space_size() > 200) --per_task;
  spec.model_count = per_task * tasks;
  spec.samples_per_record = pick(1, 12);
  spec.latency_cv = 0.2 * unit();

  Case c;
  c.seed = seed;
  c.db = std::make_shared<const rass::ProfileDB>(rass::synth_profiles(seed, spec));

  using M = rass::Metric;
  using S = rass::Statistic;
  std::vector<rass::MetricId> metrics = {
      id(M::A),          id(M::L, S::Avg), id(M::L, S::Std), id(M::L, S::Max),
      id(M::L, S::Percentile, pick(1, 99)), id(M::TP, S::Avg), id(M::E, S::Avg),
      id(M::MF),         id(M::S),         id(M::W)};
  if (tasks == 2) {
    metrics.push_back(id(M::NTT, S::Avg));
    metrics.push_back(id(M::STP));
    metrics.push_back(id(M::F));
    c.slo.tasks = {"task0", "task1"};
  }
  std::shuffle(metrics.begin(), metrics.end(), rng);
  const int k = pick(1, 5);
  for (int i = 0; i < k; ++i) {
    rass::Objective o;
    o.id = metrics[static_cast<std::size_t>(i)];
    o.direction = rass::natural_direction(o.id.metric);
    o.weight = pick(0, 1) ? 1.0 : 0.25 + 2.0 * unit();
    c.slo.objectives.push_back(o);
  }
  if (pick(0, 1)) {
    rass::Constraint con;
    if (pick(0, 1)) {
      con.id = id(M::L, S::Max);
      con.bound = 40.0 + 120.0 * unit();
    } else {
      con.id = id(M::MF);
      con.bound = 60.0 + 200.0 * unit();
    }
    c.slo.constraints.push_back(con);
  }
  return c;
}

inline rass::MOOProblem compile(const Case& c) { return rass::MOOProblem::compile(c.db, c.slo); }

}  // namespace corpus
