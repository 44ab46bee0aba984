// rass: solve, simulate, compare and validate from the command line.
//
// Exit codes: 0 ok, 1 usage / I/O / schema error, 2 infeasible problem,
// 3 validation findings.

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rass/baselines.hpp"
#include "rass/errors.hpp"
#include "rass/moo.hpp"
#include "rass/profile.hpp"
#include "rass/runtime.hpp"
#include "rass/solver.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInfeasible = 2;
constexpr int kFindings = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rass::ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rass::Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw rass::Error("write failed for '" + path + "'");
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw rass::Error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

/// Records what a run read and wrote. Paths are kept as given so the
/// manifest itself is reproducible.
struct Manifest {
  std::string command;
  ordered_json inputs = ordered_json::array();
  ordered_json config = ordered_json::object();
  ordered_json outputs = ordered_json::array();

  void input(const std::string& role, const std::string& path, const std::string& content) {
    inputs.push_back({{"role", role}, {"path", path}, {"sha256", sha256_hex(content)}});
  }
  void output(const std::string& path, const std::string& content) {
    outputs.push_back({{"path", path}, {"sha256", sha256_hex(content)}});
  }
  std::string text() const {
    ordered_json doc;
    doc["command"] = command;
    doc["inputs"] = inputs;
    doc["config"] = config;
    doc["seed"] = nullptr;  // no command draws random numbers
    doc["outputs"] = outputs;
    return doc.dump(2) + "\n";
  }
};

void emit(const std::string& out, const std::string& content, Manifest& manifest,
          const std::string& manifest_path) {
  write_file(out, content);
  manifest.output(out, content);
  write_file(manifest_path.empty() ? out + ".manifest.json" : manifest_path, manifest.text());
}

struct ProblemArgs {
  std::string profiles;
  std::string slo;
  std::vector<std::string> tasks;
  std::vector<double> weights;
  double alpha = 1.0;
  bool no_contention = false;

  void bind(CLI::App* cmd) {
    cmd->add_option("--profiles", profiles, "profile document")->required();
    cmd->add_option("--slo", slo, "SLO document")->required();
    cmd->add_option("--tasks", tasks, "task ids, in order")->delimiter(',');
    cmd->add_option("--weights", weights, "objective weights, in compiled order")->delimiter(',');
    cmd->add_option("--alpha", alpha, "contention slowdown per co-located task")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--no-contention", no_contention, "require joint measurements");
  }

  rass::MOOProblem compile(Manifest& m) const {
    const std::string ptext = read_file(profiles);
    const std::string stext = read_file(slo);
    m.input("profiles", profiles, ptext);
    m.input("slo", slo, stext);
    m.config["tasks"] = tasks;
    m.config["alpha"] = alpha;
    m.config["contention"] = !no_contention;
    m.config["weights"] = weights;
    auto db = std::make_shared<const rass::ProfileDB>(rass::parse_profiles(ptext));
    auto problem = rass::MOOProblem::compile(db, rass::parse_slo_spec(stext), tasks,
                                             {alpha, !no_contention});
    if (!weights.empty()) problem.set_weights(weights);
    return problem;
  }
};

int cmd_solve(const ProblemArgs& args, const std::string& out, const std::string& manifest_path) {
  Manifest m;
  m.command = "solve";
  const auto problem = args.compile(m);
  const auto solution = rass::solve(problem);
  emit(out, rass::write_solution(solution), m, manifest_path);
  std::cout << "designs: " << solution.designs.distinct_count() << ", rules: "
            << solution.policy.rules.size() << "\n";
  return kOk;
}

int cmd_simulate(const std::string& designs, const std::string& trace, const std::string& out,
                 const rass::SimConfig& config, const std::string& manifest_path) {
  Manifest m;
  m.command = "simulate";
  const std::string dtext = read_file(designs);
  const std::string ttext = read_file(trace);
  m.input("designs", designs, dtext);
  m.input("trace", trace, ttext);
  m.config["degradation"] = config.degradation_factor;
  m.config["horizon"] = config.horizon_s ? ordered_json(*config.horizon_s) : ordered_json(nullptr);
  m.config["focus_task"] =
      config.focus_task ? ordered_json(*config.focus_task) : ordered_json(nullptr);
  const auto solution = rass::parse_solution(dtext);
  const auto timeline =
      rass::simulate(rass::parse_trace(ttext), solution.designs, solution.policy, config);
  emit(out, rass::write_timeline_csv(timeline), m, manifest_path);
  std::cout << "segments: " << timeline.segments.size() << ", switches: " << timeline.switch_count
            << ", max rules evaluated: " << timeline.max_rules_evaluated << "\n";
  return kOk;
}

std::vector<rass::BaselineKind> parse_baselines(const std::vector<std::string>& names,
                                                const std::string& source, Manifest& m) {
  std::vector<rass::BaselineKind> kinds;
  for (const auto& name : names) {
    if (name == "b-a") kinds.push_back(rass::BaselineKind::best_accuracy());
    else if (name == "b-s") kinds.push_back(rass::BaselineKind::best_size());
    else if (name == "multi-unaware") kinds.push_back(rass::BaselineKind::multi_unaware());
    else if (name == "oodin") kinds.push_back(rass::BaselineKind::weighted_sum());
    else if (name == "transferred") {
      if (source.empty()) throw rass::ValueError("baseline 'transferred' needs --source");
      const std::string text = read_file(source);
      m.input("source", source, text);
      kinds.push_back(rass::BaselineKind::transferred(
          std::make_shared<const rass::ProfileDB>(rass::parse_profiles(text))));
    } else {
      throw rass::ValueError("unknown baseline '" + name +
                             "' (expected b-a, b-s, transferred, multi-unaware, oodin)");
    }
  }
  return kinds;
}

int cmd_compare(const ProblemArgs& args, const std::vector<std::string>& names,
                const std::string& source, bool per_state, const std::string& out,
                const std::string& manifest_path) {
  Manifest m;
  m.command = "compare";
  const auto kinds = parse_baselines(names, source, m);
  const auto problem = args.compile(m);
  m.config["baselines"] = names;
  m.config["per_state"] = per_state;
  const auto solution = rass::solve(problem);
  const std::string csv = rass::write_report_csv(rass::compare(problem, solution, kinds, per_state));
  if (out.empty()) {
    std::cout << csv;
  } else {
    emit(out, csv, m, manifest_path);
  }
  return kOk;
}

int cmd_validate(const std::string& profiles, double cv, const std::string& manifest_path) {
  Manifest m;
  m.command = "validate";
  const std::string text = read_file(profiles);
  m.input("profiles", profiles, text);
  m.config["cv_threshold"] = cv;
  const auto report = rass::validate_profiles(rass::parse_profiles(text), cv);
  const std::string formatted = rass::format_report(report);
  std::cout << formatted;
  if (!manifest_path.empty()) {
    m.output("<stdout>", formatted);
    write_file(manifest_path, m.text());
  }
  return report.empty() ? kOk : kFindings;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective selection of DNN execution plans with runtime switching"};
  app.require_subcommand(1);
  std::string manifest_path;
  app.add_option("--manifest", manifest_path, "manifest path (default: <out>.manifest.json)");

  ProblemArgs solve_args;
  std::string solve_out;
  auto* solve = app.add_subcommand("solve", "solve a problem and emit designs plus policy");
  solve_args.bind(solve);
  solve->add_option("--out", solve_out, "design document to write")->required();

  std::string designs, trace, sim_out;
  rass::SimConfig sim;
  double horizon = -1.0;
  int focus = -1;
  auto* simulate = app.add_subcommand("simulate", "replay a trace against a design document");
  simulate->add_option("--designs", designs, "design document")->required();
  simulate->add_option("--trace", trace, "event trace (JSON lines)")->required();
  simulate->add_option("--out", sim_out, "timeline CSV to write")->required();
  simulate->add_option("--degradation", sim.degradation_factor, "latency factor on flagged engines")
      ->check(CLI::Range(1.0, 1e6));
  simulate->add_option("--horizon", horizon, "end of the simulated window (s)");
  simulate->add_option("--focus-task", focus, "task index reported in the timeline");

  ProblemArgs cmp_args;
  std::vector<std::string> baselines;
  std::string source, cmp_out;
  bool per_state = false;
  auto* compare = app.add_subcommand("compare", "score baselines against the solver");
  cmp_args.bind(compare);
  compare->add_option("--baselines", baselines, "b-a, b-s, transferred, multi-unaware, oodin")
      ->required()
      ->delimiter(',');
  compare->add_option("--source", source, "source-device profiles for 'transferred'");
  compare->add_flag("--per-state", per_state, "add one row per engine mapping");
  compare->add_option("--out", cmp_out, "report CSV (default: stdout)");

  std::string val_profiles;
  double cv = 0.5;
  auto* validate = app.add_subcommand("validate", "check profile coverage and variance");
  validate->add_option("--profiles", val_profiles, "profile document")->required();
  validate->add_option("--cv-threshold", cv, "coefficient-of-variation limit")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve) return cmd_solve(solve_args, solve_out, manifest_path);
    if (*simulate) {
      if (horizon >= 0) sim.horizon_s = horizon;
      if (focus >= 0) sim.focus_task = static_cast<std::size_t>(focus);
      return cmd_simulate(designs, trace, sim_out, sim, manifest_path);
    }
    if (*compare) return cmd_compare(cmp_args, baselines, source, per_state, cmp_out, manifest_path);
    if (*validate) return cmd_validate(val_profiles, cv, manifest_path);
  } catch (const rass::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << " [constraint: " << e.constraint() << "]\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
