// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.
//
//   acceptance [--cli <path to rass>] [--data <data dir>] [--work <scratch dir>]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rass/baselines.hpp"
#include "rass/errors.hpp"
#include "rass/fixtures.hpp"
#include "rass/runtime.hpp"
#include "rass/solver.hpp"
#include "support/corpus.hpp"
#include "support/oracle.hpp"

using namespace rass;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kCorpusSize = 1000;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

struct Args {
  std::string cli;
  fs::path data;
  fs::path work = fs::temp_directory_path() / "rass_acceptance";
};

/// Compiled corpus problem; infeasible cases keep no score.
struct Prepared {
  corpus::Case c;
  std::optional<MOOProblem> problem;
  std::optional<ScoredSpace> scored;
  bool infeasible = false;
};

std::vector<Prepared> prepare_corpus() {
  std::vector<Prepared> out;
  out.reserve(kCorpusSize);
  for (std::uint64_t seed = 0; seed < kCorpusSize; ++seed) {
    Prepared p;
    p.c = corpus::make_case(seed);
    p.problem.emplace(corpus::compile(p.c));
    try {
      p.scored.emplace(score_space(*p.problem));
    } catch (const InfeasibleError&) {
      p.infeasible = true;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<MOOProblem> fixture_problems() {
  auto make = [](ProfileDB db, SLOSpec slo) {
    return MOOProblem::compile(std::make_shared<const ProfileDB>(std::move(db)), std::move(slo));
  };
  std::vector<MOOProblem> out;
  out.push_back(make(fixtures::uc1_s20(), fixtures::uc1_slo()));
  out.push_back(make(fixtures::uc2_s20(), fixtures::uc2_slo()));
  out.push_back(make(fixtures::uc3_a71(), fixtures::uc3_slo()));
  out.push_back(make(fixtures::uc4_s20(), fixtures::uc4_slo()));
  return out;
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence(const std::vector<Prepared>& cases) {
  Outcome o;
  std::size_t scored = 0, rows = 0;
  for (const auto& p : cases) {
    if (!p.scored) continue;
    ++scored;
    const auto& s = *p.scored;
    if (s.matrix.rows > 200) o.fail("seed " + std::to_string(p.c.seed) + ": |X'| > 200");
    const auto ref = oracle::optimality(s.matrix);
    for (std::size_t r = 0; r < ref.size(); ++r, ++rows) {
      const auto& got = s.scores[r];
      const bool ok = got.utopia == ref[r].utopia && oracle::close(got.d, ref[r].d) &&
                      (got.utopia || (oracle::close(got.d_s, ref[r].d_s) &&
                                      oracle::close(got.opt, ref[r].opt)));
      if (!ok) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "seed %llu row %zu: opt %.17g vs %.17Lg",
                      static_cast<unsigned long long>(p.c.seed), r, got.opt, ref[r].opt);
        o.fail(buf);
      }
    }
  }
  if (o.pass)
    o.detail = std::to_string(scored) + " problems, " + std::to_string(rows) + " rows within 1e-9";
  return o;
}

Outcome affine_invariance(const std::vector<Prepared>& cases) {
  Outcome o;
  std::mt19937_64 rng(2024);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::size_t checked = 0;
  for (const auto& p : cases) {
    if (!p.scored) continue;
    ObjectiveMatrix m = p.scored->matrix;
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double a = 10.0 * (1.0 - unit());  // (0, 10]
      const double b = -100.0 + 200.0 * unit();
      for (std::size_t r = 0; r < m.rows; ++r) m.at(r, c) = a * m.at(r, c) + b;
    }
    const SortedSpace moved = sort_space(compute_optimality(m));
    if (moved.order != p.scored->sorted.order)
      o.fail("ordering changed for seed " + std::to_string(p.c.seed));
    ++checked;
  }
  if (o.pass) o.detail = std::to_string(checked) + " problems, orderings identical";
  return o;
}

void check_designs(const MOOProblem& problem, const ScoredSpace& s, const Solution& sol,
                   const std::string& name, Outcome& o) {
  const DesignSet& d = sol.designs;
  if (d.ranked.empty() || d.ranked.size() > 3) o.fail(name + ": T out of range");
  if (d.distinct_count() > 5) o.fail(name + ": more than five designs");
  std::vector<const Design*> all = {&d.dm, &d.dw, &d.dwm()};
  for (const auto& r : d.ranked) all.push_back(&r);
  for (const Design* x : all)
    for (const auto& c : problem.constraints())
      if (c.slack(evaluate_metric(x->x, c.id, problem)) > 0)
        o.fail(name + ": design violates " + c.label());
  for (const auto& score : s.scores)
    if (better_than(score, d.ranked.front().score)) o.fail(name + ": d0 is not the global max");
}

Outcome design_bounds(const std::vector<Prepared>& cases, const std::vector<MOOProblem>& uc) {
  Outcome o;
  std::size_t solved = 0;
  for (const auto& p : cases) {
    if (!p.scored) continue;
    check_designs(*p.problem, *p.scored, solve(*p.problem), "seed " + std::to_string(p.c.seed), o);
    ++solved;
  }
  for (std::size_t i = 0; i < uc.size(); ++i) {
    check_designs(uc[i], score_space(uc[i]), solve(uc[i]), "UC" + std::to_string(i + 1), o);
    ++solved;
  }
  if (o.pass) o.detail = std::to_string(solved) + " solves (corpus + UC1-UC4)";
  return o;
}

void check_total(const SwitchingPolicy& sp, const std::string& name, Outcome& o) {
  const std::size_t n = sp.engine_set.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << (n + 1)); ++mask) {
    EnvState s = EnvState::clear(sp.engine_set);
    for (std::size_t e = 0; e < n; ++e) s.engine_flags[sp.engine_set[e]] = (mask >> e) & 1;
    s.memory_flag = (mask >> n) & 1;
    const auto m = sp.match(s);
    if (!m) {
      o.fail(name + ": unmatched state " + std::to_string(mask));
      return;
    }
    if (mask == 0 && m->target != DesignLabel::D0) o.fail(name + ": clear state is not d0");
  }
}

Outcome policy_totality(const std::vector<Prepared>& cases, const std::vector<MOOProblem>& uc) {
  Outcome o;
  std::size_t n = 0;
  for (const auto& p : cases) {
    if (!p.scored) continue;
    check_total(solve(*p.problem).policy, "seed " + std::to_string(p.c.seed), o);
    ++n;
  }
  for (std::size_t i = 0; i < uc.size(); ++i, ++n)
    check_total(solve(uc[i]).policy, "UC" + std::to_string(i + 1), o);

  const SwitchingPolicy sp = solve(uc[0]).policy;
  using T = Tri;
  const std::vector<std::pair<std::vector<Tri>, DesignLabel>> table = {
      {{T::False, T::Any, T::Any, T::False}, DesignLabel::D0},
      {{T::True, T::False, T::Any, T::False}, DesignLabel::D1},
      {{T::True, T::True, T::False, T::False}, DesignLabel::D2},
      {{T::True, T::True, T::True, T::False}, DesignLabel::DW},
      {{T::True, T::True, T::True, T::True}, DesignLabel::DWM},
      {{T::Any, T::Any, T::Any, T::True}, DesignLabel::DM}};
  if (sp.rules.size() != table.size() || sp.engine_order.size() != 3) {
    o.fail("UC1 policy does not have six rules over three engines");
  } else {
    for (std::size_t i = 0; i < table.size(); ++i) {
      const PolicyRule& r = sp.rules[i];
      bool same = r.target == table[i].second && r.memory == table[i].first[3];
      for (std::size_t e = 0; e < 3; ++e) {
        const auto it = r.engines.find(sp.engine_order[e]);
        same = same && (it == r.engines.end() ? Tri::Any : it->second) == table[i].first[e];
      }
      if (!same) o.fail("UC1 rule " + std::to_string(i) + " differs from the six-rule layout");
    }
  }
  if (o.pass) o.detail = std::to_string(n) + " policies total; UC1 has the 6-row layout";
  return o;
}

std::vector<DesignLabel> labels_of(const Timeline& tl) {
  std::vector<DesignLabel> out;
  for (const auto& s : tl.segments) out.push_back(s.design);
  return out;
}

std::string join(const std::vector<DesignLabel>& ls) {
  std::string out;
  for (auto l : ls) out += (out.empty() ? "" : ">") + std::string(to_string(l));
  return out;
}

Outcome runtime_replay(const std::vector<MOOProblem>& uc) {
  Outcome o;
  const Solution s1 = solve(uc[0]);
  const Timeline t1 = simulate(fixtures::uc1_trace(), s1.designs, s1.policy);
  const auto l1 = labels_of(t1);
  if (l1 != std::vector<DesignLabel>{DesignLabel::D0, DesignLabel::D1, DesignLabel::DM})
    o.fail("UC1 sequence " + join(l1));
  if (t1.max_rules_evaluated > s1.designs.ranked.size() + 3) o.fail("UC1 rule evaluations > T+3");

  const Solution s3 = solve(uc[2]);
  const Timeline t3 = simulate(fixtures::uc3_trace(), s3.designs, s3.policy);
  const auto l3 = labels_of(t3);
  if (l3 != std::vector<DesignLabel>{DesignLabel::D1, DesignLabel::DM, DesignLabel::D0, DesignLabel::D2})
    o.fail("UC3 sequence " + join(l3));
  for (const auto& seg : t3.segments)
    if (seg.t_start >= 8.0)
      for (const auto& c : s3.designs.get(seg.design).x.configs)
        if (c.hw.engine == "GPU") o.fail("UC3 returns to the GPU after its overload");
  if (t3.max_rules_evaluated > s3.designs.ranked.size() + 3) o.fail("UC3 rule evaluations > T+3");

  if (write_timeline_csv(simulate(fixtures::uc1_trace(), s1.designs, s1.policy)) != write_timeline_csv(t1) ||
      write_timeline_csv(simulate(fixtures::uc3_trace(), s3.designs, s3.policy)) != write_timeline_csv(t3))
    o.fail("replay is not deterministic");
  if (o.pass) o.detail = "UC1 " + join(l1) + ", UC3 " + join(l3) + ", max rules " +
                         std::to_string(std::max(t1.max_rules_evaluated, t3.max_rules_evaluated));
  return o;
}

Outcome baseline_dominance(const std::vector<Prepared>& cases) {
  Outcome o;
  std::size_t feasible = 0, infeasible = 0;
  for (const auto& p : cases) {
    if (!p.scored) continue;
    const Solution sol = solve(*p.problem);
    // Source device: the next corpus case, with this case's tasks.
    const auto& src = cases[(p.c.seed + 1) % cases.size()].c.db;
    std::vector<BaselineKind> kinds = {BaselineKind::best_accuracy(), BaselineKind::best_size(),
                                       BaselineKind::weighted_sum(), BaselineKind::transferred(src)};
    if (p.problem->task_count() > 1) kinds.push_back(BaselineKind::multi_unaware());
    try {
      const ComparisonReport r = compare(*p.problem, sol, kinds, true);
      for (const auto& row : r.rows) {
        if (!row.feasible) {
          ++infeasible;
          if (row.marker != "!" && row.marker != "N/A") o.fail("unmarked infeasible row");
          continue;
        }
        ++feasible;
        if (!(row.ratio >= 1.0))
          o.fail("seed " + std::to_string(p.c.seed) + " " + row.baseline + " ratio " +
                 std::to_string(row.ratio));
      }
    } catch (const std::exception& e) {
      o.fail("seed " + std::to_string(p.c.seed) + " threw: " + e.what());
    }
  }
  if (o.pass)
    o.detail = std::to_string(feasible) + " feasible rows >= 1.0, " + std::to_string(infeasible) +
               " infeasible rows reported";
  return o;
}

Outcome multi_dnn_identities(const std::vector<Prepared>& cases) {
  Outcome o;
  std::mt19937_64 rng(77);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int trial = 0; trial < 20000; ++trial) {
    const std::size_t m = 2 + rng() % 4;
    std::vector<double> single(m), multi(m), same(m), shared(m);
    const double c = 1.0 + 3.0 * unit();
    for (std::size_t i = 0; i < m; ++i) {
      single[i] = 1.0 + 99.0 * unit();
      multi[i] = single[i] * (1.0 + 3.0 * unit());
      shared[i] = single[i] * c;
    }
    const auto disjoint = multi_dnn_metrics(single, single);
    for (double n : disjoint.ntt)
      if (n != 1.0) o.fail("NTT != 1 without contention");
    if (disjoint.stp != static_cast<double>(m)) o.fail("STP != M without contention");
    if (disjoint.fairness != 1.0) o.fail("F != 1 without contention");

    const auto loaded = multi_dnn_metrics(single, multi);
    if (loaded.stp > static_cast<double>(m)) o.fail("STP > M");
    if (loaded.fairness < 0.0 || loaded.fairness > 1.0) o.fail("F outside [0, 1]");
    // NP differ unless the random slowdowns happen to coincide.
    double np_lo = 1e300, np_hi = 0;
    for (std::size_t i = 0; i < m; ++i) {
      np_lo = std::min(np_lo, single[i] / multi[i]);
      np_hi = std::max(np_hi, single[i] / multi[i]);
    }
    const bool equal_np = np_hi - np_lo <= 1e-12;
    if (equal_np != (std::fabs(loaded.fairness - 1.0) <= 1e-12)) o.fail("F = 1 iff equal NP");

    const auto uniform = multi_dnn_metrics(single, shared);
    if (std::fabs(uniform.fairness - 1.0) > 1e-12) o.fail("uniform slowdown is not fair");
  }

  // The same identities through the metric evaluator on two-task problems.
  MetricId stp, f;
  stp.metric = Metric::STP;
  f.metric = Metric::F;
  std::size_t disjoint_checked = 0;
  for (const auto& p : cases) {
    if (p.problem->task_count() != 2) continue;
    for (const auto& x : p.problem->space().variables) {
      const double s = evaluate_metric(x, stp, *p.problem);
      const double fair = evaluate_metric(x, f, *p.problem);
      if (s > 2.0 || fair < 0.0 || fair > 1.0) o.fail("evaluator bounds, seed " + std::to_string(p.c.seed));
      if (x.configs[0].hw.engine != x.configs[1].hw.engine) {
        ++disjoint_checked;
        if (s != 2.0 || fair != 1.0) o.fail("disjoint placement is not contention free");
      }
    }
  }
  if (o.pass)
    o.detail = "20000 random vectors, " + std::to_string(disjoint_checked) + " disjoint placements";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int run(const std::string& command) {
  const int rc = std::system((command + " >/dev/null 2>&1").c_str());
  return rc;
}

Outcome round_trip(const std::vector<Prepared>& cases, const std::vector<MOOProblem>& uc,
                   const Args& args) {
  Outcome o;
  for (const auto& p : cases) {
    const ProfileDB& db = *p.c.db;
    const std::string text = write_profiles(db);
    if (!(parse_profiles(text) == db) || write_profiles(parse_profiles(text)) != text)
      o.fail("profile round-trip, seed " + std::to_string(p.c.seed));
    if (!p.scored) continue;
    const std::string doc = write_solution(solve(*p.problem));
    if (write_solution(parse_solution(doc)) != doc) o.fail("solution round-trip, seed " + std::to_string(p.c.seed));
    if (write_solution(solve(*p.problem)) != doc) o.fail("solve not deterministic");
  }
  for (const auto& p : uc) {
    const std::string text = write_profiles(p.profile());
    if (!(parse_profiles(text) == p.profile())) o.fail("fixture profile round-trip");
    const std::string doc = write_solution(solve(p));
    if (write_solution(parse_solution(doc)) != doc) o.fail("fixture solution round-trip");
  }

  std::string cli_note = "CLI not checked";
  if (!args.cli.empty()) {
    fs::create_directories(args.work);
    const std::string profiles = (args.data / "fixtures" / "uc1_s20.json").string();
    const std::string slo = (args.data / "fixtures" / "uc1_slo.json").string();
    const std::string trace = (args.data / "traces" / "uc1.jsonl").string();
    std::vector<std::string> outputs;
    for (int pass = 0; pass < 2; ++pass) {
      const fs::path dir = args.work / ("run" + std::to_string(pass));
      fs::create_directories(dir);
      const std::string sol = (dir / "solution.json").string();
      const std::string tl = (dir / "timeline.csv").string();
      const std::string rep = (dir / "report.csv").string();
      const bool ok = run(args.cli + " solve --profiles " + profiles + " --slo " + slo + " --out " + sol) == 0 &&
                      run(args.cli + " simulate --designs " + sol + " --trace " + trace + " --out " + tl) == 0 &&
                      run(args.cli + " compare --profiles " + profiles + " --slo " + slo +
                          " --baselines b-a,b-s,oodin --out " + rep) == 0;
      if (!ok) {
        o.fail("CLI run failed");
        break;
      }
      std::string all;
      for (const auto& f : {sol, tl, rep}) {
        all += slurp(f);
        // Manifests name their own paths, which differ between the runs.
        std::string manifest = slurp(f + ".manifest.json");
        const std::string from = dir.string();
        for (std::size_t at; (at = manifest.find(from)) != std::string::npos;)
          manifest.replace(at, from.size(), "<dir>");
        all += manifest;
      }
      outputs.push_back(all);
    }
    if (outputs.size() == 2 && outputs[0] != outputs[1]) o.fail("CLI outputs differ between runs");
    if (o.pass) cli_note = "CLI outputs byte-identical across two runs";
  }
  if (o.pass) o.detail = "profiles and solutions round-trip; " + cli_note;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  Args args;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") args.cli = argv[i + 1];
    else if (flag == "--data") args.data = argv[i + 1];
    else if (flag == "--work") args.work = argv[i + 1];
    else {
      std::fprintf(stderr, "unknown flag %s\n", flag.c_str());
      return 1;
    }
  }
  if (!args.cli.empty() && args.data.empty()) {
    std::fprintf(stderr, "--cli needs --data\n");
    return 1;
  }

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto cases = prepare_corpus();
  const auto uc = fixture_problems();
  const double prep_s = std::chrono::duration<double>(clock::now() - t0).count();
  std::size_t infeasible = 0;
  for (const auto& c : cases) infeasible += c.infeasible;
  std::printf("corpus: %zu problems (%zu infeasible), prepared in %.2f s\n", cases.size(), infeasible,
              prep_s);

  struct Criterion {
    const char* name;
    double limit_s;  // 0 = no limit
    std::function<Outcome()> body;
  };
  const std::vector<Criterion> criteria = {
      {"optimality oracle equivalence", 30, [&] { return oracle_equivalence(cases); }},
      {"affine invariance", 30, [&] { return affine_invariance(cases); }},
      {"design-set bounds", 0, [&] { return design_bounds(cases, uc); }},
      {"policy totality and six-rule layout", 5, [&] { return policy_totality(cases, uc); }},
      {"runtime-adaptation replay", 0, [&] { return runtime_replay(uc); }},
      {"baseline dominance", 0, [&] { return baseline_dominance(cases); }},
      {"multi-DNN metric identities", 5, [&] { return multi_dnn_identities(cases); }},
      {"round-trip and determinism", 0, [&] { return round_trip(cases, uc, args); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = clock::now();
    Outcome o;
    try {
      o = criteria[i].body();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(clock::now() - start).count();
    if (criteria[i].limit_s > 0 && s > criteria[i].limit_s) {
      char buf[80];
      std::snprintf(buf, sizeof buf, "took %.2f s, limit %.0f s", s, criteria[i].limit_s);
      o.fail(buf);
    }
    failures += !o.pass;
    std::printf("[%s] %zu. %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, s,
                o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
