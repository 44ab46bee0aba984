#include <doctest.h>

#include <algorithm>

#include "rass/baselines.hpp"
#include "rass/errors.hpp"
#include "rass/fixtures.hpp"
#include "support/builders.hpp"

using namespace rass;
using build::metric;

namespace {

MOOProblem uc(const ProfileDB& db, const SLOSpec& slo) {
  return MOOProblem::compile(std::make_shared<const ProfileDB>(db), slo);
}

// Two tasks, each with one model that is fastest on the CPU.
ProfileDB four_config_db() {
  ProfileDB db;
  db.device_name = "four";
  db.engine_set = {"CPU", "GPU"};
  db.models = {build::model("u", "tu", 70), build::model("v", "tv", 60)};
  db.single_records = {build::record("u", build::hw("CPU"), {10}), build::record("u", build::hw("GPU"), {15}),
                       build::record("v", build::hw("CPU"), {20}), build::record("v", build::hw("GPU"), {26})};
  return db;
}

}  // namespace

TEST_CASE("best-accuracy pool on UC1") {
  const ProfileDB db = fixtures::uc1_s20();
  const auto top = std::max_element(db.models.begin(), db.models.end(),
                                    [](const auto& a, const auto& b) { return a.accuracy < b.accuracy; });
  CHECK(top->architecture == "EfficientNet Lite4");
  CHECK(top->accuracy == doctest::Approx(80.81));

  // Without the latency bound the choice comes from the Lite4 pool.
  SLOSpec open = fixtures::uc1_slo();
  open.constraints.clear();
  const MOOProblem free = uc(db, open);
  const BaselineOutcome o = run_baseline(BaselineKind::best_accuracy(), free);
  REQUIRE(o.feasible);
  CHECK(free.model(o.x->configs[0].model_id).architecture == "EfficientNet Lite4");

  // With it, every Lite4 variant is too slow.
  const BaselineOutcome bounded = run_baseline(BaselineKind::best_accuracy(), uc(db, fixtures::uc1_slo()));
  CHECK_FALSE(bounded.feasible);
  CHECK_FALSE(bounded.not_applicable);
  CHECK(bounded.violated == "max L[0] <= 41.67");
}

TEST_CASE("best-size picks the smallest architecture") {
  const MOOProblem p = uc(fixtures::uc1_s20(), fixtures::uc1_slo());
  const BaselineOutcome o = run_baseline(BaselineKind::best_size(), p);
  REQUIRE(o.x.has_value());
  double smallest = 1e300;
  for (const auto& m : p.profile().models) smallest = std::min(smallest, m.params);
  CHECK(p.model(o.x->configs[0].model_id).params == smallest);
}

TEST_CASE("transferred design needs the source mapping") {
  const MOOProblem target = uc(fixtures::uc3_a71(), fixtures::uc3_slo());
  const auto source = std::make_shared<const ProfileDB>(fixtures::uc3_p7());
  const BaselineKind kind = BaselineKind::transferred(source);
  CHECK(kind.name() == "t-" + source->device_name);

  const BaselineOutcome dsp = run_baseline(kind, target, std::vector<std::string>{"CPU", "DSP"});
  CHECK(dsp.not_applicable);
  CHECK_FALSE(dsp.feasible);

  const BaselineOutcome any = run_baseline(kind, target);
  CHECK(any.x.has_value());
  CHECK((any.feasible || any.not_applicable || !any.violated.empty()));

  CHECK_THROWS_AS(run_baseline(BaselineKind::transferred(nullptr), target), ValueError);
}

TEST_CASE("multi-DNN-unaware decomposition ignores contention") {
  SLOSpec slo;
  slo.objectives = {build::minimize(metric(Metric::L, Statistic::Avg))};
  const MOOProblem p = build::compile(four_config_db(), slo, {"tu", "tv"});
  const BaselineOutcome o = run_baseline(BaselineKind::multi_unaware(), p);
  REQUIRE(o.feasible);
  // Enumeration oracle: each task alone is fastest on the CPU.
  CHECK(o.x->configs[0].hw.engine == "CPU");
  CHECK(o.x->configs[1].hw.engine == "CPU");
  CHECK(evaluate_metric(*o.x, metric(Metric::NTT, Statistic::Avg), p) > 1.0);

  // Contention-aware solving separates the tasks.
  const Solution sol = solve(p);
  const auto sig = sol.designs.ranked[0].x.signature();
  CHECK(sig[0] != sig[1]);
}

TEST_CASE("weighted sum on the three-config example") {
  const MOOProblem p = build::compile(build::three_config_db(), build::accuracy_latency_slo());
  const ScoredSpace s = score_space(p);
  // Normalised A = (0, 0.5, 1); normalised L, reversed = (1, 2/3, 0).
  const auto ws = weighted_sum_scores(s.matrix, s.matrix);
  CHECK(ws[0] == doctest::Approx(1.0));
  CHECK(ws[1] == doctest::Approx(1.0 + 1.0 / 6.0));
  CHECK(ws[2] == doctest::Approx(1.0));

  const BaselineOutcome o = run_baseline(BaselineKind::weighted_sum(), p);
  REQUIRE(o.feasible);
  CHECK(o.x->configs[0].model_id == "x2");

  const Solution sol = solve(p);
  const ComparisonReport r = compare(p, sol, {BaselineKind::weighted_sum()});
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].chosen == r.rows[0].reference);
  CHECK(r.rows[0].ratio == 1.0);
}

TEST_CASE("weighted sum and RASS agree on one objective") {
  SLOSpec slo;
  slo.objectives = {build::minimize(metric(Metric::L, Statistic::Avg))};
  const MOOProblem p = build::compile(build::three_config_db(), slo);
  const BaselineOutcome o = run_baseline(BaselineKind::weighted_sum(), p);
  REQUIRE(o.feasible);
  CHECK(*o.x == solve(p).designs.ranked[0].x);
}

TEST_CASE("comparison report on UC1") {
  const auto db = fixtures::uc1_s20();
  const MOOProblem p = uc(db, fixtures::uc1_slo());
  const Solution sol = solve(p);
  const std::vector<BaselineKind> kinds = {
      BaselineKind::best_accuracy(), BaselineKind::best_size(), BaselineKind::weighted_sum(),
      BaselineKind::transferred(std::make_shared<const ProfileDB>(fixtures::uc1_p7()))};
  const ComparisonReport summary = compare(p, sol, kinds);
  CHECK(summary.rows.size() == kinds.size());
  for (const auto& row : summary.rows) {
    CHECK(row.state == "*");
    if (row.feasible) {
      CHECK(row.marker.empty());
      CHECK(row.ratio >= 1.0);
    } else {
      CHECK((row.marker == "!" || row.marker == "N/A"));
      CHECK(row.ratio == 0.0);
      CHECK_FALSE(row.reason.empty());
    }
  }
  CHECK(summary.rows[0].marker == "!");

  const ComparisonReport states = compare(p, sol, kinds, true);
  CHECK(states.rows.size() > summary.rows.size());
  for (const auto& row : states.rows)
    if (row.feasible) CHECK(row.ratio >= 1.0);

  const std::string csv = write_report_csv(summary);
  CHECK(csv.rfind("baseline,state,feasible,marker,chosen,reference,baseline_opt,reference_opt,ratio,reason\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(kinds.size() + 1));
}
