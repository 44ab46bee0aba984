#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rass/fixtures.hpp"
#include "rass/solver.hpp"

using namespace rass;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("checked-in data matches the generator") {
  const std::filesystem::path root = RASS_SOURCE_DIR;
  for (const auto& f : fixtures::bundled_files()) {
    CAPTURE(f.name);
    const auto path = root / "data" / f.subdir / f.name;
    REQUIRE(std::filesystem::exists(path));
    CHECK(slurp(path) == f.content);
  }
}

TEST_CASE("fixture devices") {
  CHECK(fixtures::uc1_s20().engine_set == std::vector<std::string>{"CPU", "GPU", "NPU"});
  CHECK(fixtures::uc3_a71().has_engine("DSP"));
  CHECK_FALSE(fixtures::uc3_p7().has_engine("DSP"));
  for (const auto& r : fixtures::uc4_s20().single_records) CHECK(r.batch == 4);
}

TEST_CASE("every use case solves within the design bounds") {
  struct UseCase {
    ProfileDB db;
    SLOSpec slo;
  };
  const std::vector<UseCase> cases = {{fixtures::uc1_s20(), fixtures::uc1_slo()},
                                      {fixtures::uc2_s20(), fixtures::uc2_slo()},
                                      {fixtures::uc3_a71(), fixtures::uc3_slo()},
                                      {fixtures::uc4_s20(), fixtures::uc4_slo()}};
  for (const auto& c : cases) {
    CAPTURE(c.db.device_name);
    const MOOProblem p = MOOProblem::compile(std::make_shared<const ProfileDB>(c.db), c.slo);
    const Solution sol = solve(p);
    CHECK(sol.designs.ranked.size() >= 1);
    CHECK(sol.designs.ranked.size() <= 3);
    CHECK(sol.designs.distinct_count() <= 5);
    CHECK(sol.policy.rules.size() == sol.designs.ranked.size() + 3);
  }
}
