#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rass/solver.hpp"

namespace rass {

struct BaselineKind {
  enum class Kind { BestAccuracy, BestSize, Transferred, MultiUnaware, WeightedSum };
  Kind kind = Kind::BestAccuracy;
  std::shared_ptr<const ProfileDB> source;  // Transferred only

  static BaselineKind best_accuracy() { return {Kind::BestAccuracy, nullptr}; }
  static BaselineKind best_size() { return {Kind::BestSize, nullptr}; }
  static BaselineKind multi_unaware() { return {Kind::MultiUnaware, nullptr}; }
  static BaselineKind weighted_sum() { return {Kind::WeightedSum, nullptr}; }
  static BaselineKind transferred(std::shared_ptr<const ProfileDB> src) {
    return {Kind::Transferred, std::move(src)};
  }

  /// "b-a", "b-s", "t-<device>", "multi-unaware", "oodin".
  std::string name() const;
};

/// Outcome of a baseline. Infeasibility is a value: `not_applicable` marks a
/// configuration that does not exist on the target device ("N/A"), otherwise
/// `violated` names the constraint that ruled it out ("!").
struct BaselineOutcome {
  bool feasible = false;
  bool not_applicable = false;
  std::optional<DecisionVariable> x;
  std::optional<std::size_t> space_index;  // into problem.space().variables
  std::string violated;
  std::string reason;
};

/// Chooses a decision variable the way the named baseline would. With a
/// signature, the choice is restricted to that engine-per-task mapping.
BaselineOutcome run_baseline(const BaselineKind& kind, const MOOProblem& problem,
                             const std::optional<std::vector<std::string>>& signature =
                                 std::nullopt);

/// Weighted sum of direction-adjusted min-max normalised objectives, with
/// normalisation bounds taken over the full space X.
std::vector<double> weighted_sum_scores(const ObjectiveMatrix& candidates,
                                        const ObjectiveMatrix& normalisation);

struct ComparisonRow {
  std::string baseline;
  std::string state;  // "*" or engine signature such as "CPU+GPU"
  bool feasible = false;
  std::string marker;  // "", "!", "N/A"
  std::string chosen;
  std::string reference;
  double baseline_opt = 0.0;
  double reference_opt = 0.0;
  double ratio = 0.0;  // reference / baseline; only for feasible rows
  std::string reason;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

/// Scores every baseline choice with the problem's own X' scoring. One "*"
/// row per baseline compares against d_0; one row per engine signature
/// compares against the best design with that signature.
ComparisonReport compare(const MOOProblem& problem, const Solution& solution,
                         const std::vector<BaselineKind>& kinds, bool per_state = false);

std::string write_report_csv(const ComparisonReport& report);

}  // namespace rass
