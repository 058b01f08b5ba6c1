#include "analogy/kernels.hpp"

#include <exception>
#include <mutex>

#include <omp.h>

#include "analogy/error.hpp"
#include "analogy/text.hpp"

namespace analogy {

namespace {

constexpr std::size_t kKeepFailingIds = 20;

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

// Runs fn(i) for every index in parallel and rethrows the first exception.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::exception_ptr error;
  std::mutex mu;
  const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(resolve_threads(threads))
  for (long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

bool letter_ok(const LetterStringProblem& p) {
  if (solve(p) != p.key) return false;
  if (!grade(p, join(p.key)).correct) return false;
  return problem_to_json(problem_from_json(problem_to_json(p))) == problem_to_json(p);
}

bool matrix_ok(const MatrixProblem& p) {
  if (solve_matrix(p) != p.key) return false;
  if (brute_solve(p) != std::vector<Cell>{p.key}) return false;
  if (!grade_matrix(p, render_cell(p.key))) return false;
  return matrix_to_json(matrix_from_json(matrix_to_json(p))) == matrix_to_json(p);
}

template <class P, class Check>
RoundTripStats verify(const std::vector<P>& problems, int threads, Check check) {
  std::vector<char> ok(problems.size(), 0);
  parallel_for(problems.size(), threads, [&](std::size_t i) {
    try {
      ok[i] = check(problems[i]) ? 1 : 0;
    } catch (const Error&) {
      ok[i] = 0;
    }
  });
  RoundTripStats s;
  s.checked = static_cast<long>(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (ok[i]) continue;
    ++s.failures;
    if (s.failing_ids.size() < kKeepFailingIds) s.failing_ids.push_back(problems[i].id);
  }
  return s;
}

}  // namespace

std::vector<LetterStringProblem> build_suite_parallel(const LetterSuiteConfig& config, std::uint64_t seed, int threads) {
  const auto plan = plan_suite(config, seed);
  std::vector<LetterStringProblem> out(plan.size());
  parallel_for(plan.size(), threads, [&](std::size_t i) { out[i] = generate_item(plan[i], 0); });
  // Collisions are resolved in plan order, exactly as the serial build does.
  deduplicate(out, plan);
  return out;
}

std::vector<MatrixProblem> build_matrix_suite_parallel(const MatrixSuiteConfig& config, std::uint64_t seed, int threads) {
  const auto plan = plan_matrix_suite(config, seed);
  std::vector<MatrixProblem> out(plan.size());
  parallel_for(plan.size(), threads, [&](std::size_t i) { out[i] = generate_matrix_item(plan[i]); });
  return out;
}

RoundTripStats verify_letter_round_trip(const std::vector<LetterStringProblem>& problems, int threads) {
  return verify(problems, threads, letter_ok);
}

RoundTripStats verify_letter_round_trip_serial(const std::vector<LetterStringProblem>& problems) {
  return verify(problems, 1, letter_ok);
}

RoundTripStats verify_matrix_round_trip(const std::vector<MatrixProblem>& problems, int threads) {
  return verify(problems, threads, matrix_ok);
}

RoundTripStats verify_matrix_round_trip_serial(const std::vector<MatrixProblem>& problems) {
  return verify(problems, 1, matrix_ok);
}

}  // namespace analogy
