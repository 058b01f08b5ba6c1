#include <benchmark/benchmark.h>

#include "analogy/kernels.hpp"

using namespace analogy;

namespace {

const std::vector<LetterStringProblem>& letter_suite() {
  static const auto suite = build_suite(LetterSuiteConfig::replication(), 1);
  return suite;
}

const std::vector<MatrixProblem>& matrix_suite() {
  static const auto suite = build_matrix_suite(MatrixSuiteConfig::replication(), 1);
  return suite;
}

void BM_LetterSuiteSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_suite(LetterSuiteConfig::replication(), 1));
}

void BM_LetterSuiteParallel(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_suite_parallel(LetterSuiteConfig::replication(), 1, threads));
}

void BM_MatrixSuiteSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_matrix_suite(MatrixSuiteConfig::replication(), 1));
}

void BM_MatrixSuiteParallel(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_matrix_suite_parallel(MatrixSuiteConfig::replication(), 1, threads));
}

void BM_LetterRoundTrip(benchmark::State& state) {
  const auto& suite = letter_suite();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(verify_letter_round_trip(suite, threads));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(suite.size()));
}

void BM_MatrixRoundTrip(benchmark::State& state) {
  const auto& suite = matrix_suite();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(verify_matrix_round_trip(suite, threads));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(suite.size()));
}

void BM_BruteSolve(benchmark::State& state) {
  const auto& suite = matrix_suite();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(brute_solve(suite[i]));
    i = (i + 1) % suite.size();
  }
}

}  // namespace

BENCHMARK(BM_LetterSuiteSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LetterSuiteParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatrixSuiteSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatrixSuiteParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LetterRoundTrip)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatrixRoundTrip)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BruteSolve);

BENCHMARK_MAIN();
