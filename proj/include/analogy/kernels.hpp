#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "analogy/letterstring.hpp"
#include "analogy/matrix.hpp"

namespace analogy {

/// OpenMP versions of the suite builders. Each item draws from its own
/// split stream, so the output equals the serial build for any thread count.
/// threads <= 0 uses the OpenMP default.
std::vector<LetterStringProblem> build_suite_parallel(const LetterSuiteConfig& config, std::uint64_t seed,
                                                      int threads = 0);
std::vector<MatrixProblem> build_matrix_suite_parallel(const MatrixSuiteConfig& config, std::uint64_t seed,
                                                       int threads = 0);

struct RoundTripStats {
  long checked = 0;
  long failures = 0;
  std::vector<std::string> failing_ids;  // first few only
};

/// Letter problems: solve() reproduces the key, the key grades correct and
/// the JSON form parses back to the same problem.
RoundTripStats verify_letter_round_trip(const std::vector<LetterStringProblem>& problems, int threads = 0);
RoundTripStats verify_letter_round_trip_serial(const std::vector<LetterStringProblem>& problems);

/// Matrix problems: solve_matrix and brute_solve both give exactly the key,
/// the key grades correct and the JSON form parses back.
RoundTripStats verify_matrix_round_trip(const std::vector<MatrixProblem>& problems, int threads = 0);
RoundTripStats verify_matrix_round_trip_serial(const std::vector<MatrixProblem>& problems);

}  // namespace analogy
