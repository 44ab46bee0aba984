// Serial reference vs OpenMP kernels: optimality scoring and objective
// matrix evaluation.

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "rass/fixtures.hpp"
#include "rass/moo.hpp"
#include "rass/solver.hpp"

namespace {

rass::ObjectiveMatrix random_matrix(std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  rass::ObjectiveMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.values.resize(rows * cols);
  for (auto& v : m.values) v = u(rng);
  for (std::size_t c = 0; c < cols; ++c) {
    m.directions.push_back(c % 2 ? rass::Direction::Minimize : rass::Direction::Maximize);
    m.weights.push_back(1.0);
    m.labels.push_back("f" + std::to_string(c));
  }
  return m;
}

void BM_OptimalitySerial(benchmark::State& state) {
  const auto m = random_matrix(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(rass::compute_optimality_serial(m));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_OptimalityParallel(benchmark::State& state) {
  const auto m = random_matrix(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(rass::compute_optimality(m));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

const rass::MOOProblem& uc4_problem() {
  static const auto problem = rass::MOOProblem::compile(
      std::make_shared<const rass::ProfileDB>(rass::fixtures::uc4_s20()), rass::fixtures::uc4_slo());
  return problem;
}

void BM_MatrixSerial(benchmark::State& state) {
  const auto& p = uc4_problem();
  const auto space = rass::apply_constraints(p);
  for (auto _ : state) benchmark::DoNotOptimize(rass::build_objective_matrix_serial(space, p));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(space.size()));
}

void BM_MatrixParallel(benchmark::State& state) {
  const auto& p = uc4_problem();
  const auto space = rass::apply_constraints(p);
  for (auto _ : state) benchmark::DoNotOptimize(rass::build_objective_matrix(space, p));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(space.size()));
}

}  // namespace

BENCHMARK(BM_OptimalitySerial)->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(BM_OptimalityParallel)->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(BM_MatrixSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatrixParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
