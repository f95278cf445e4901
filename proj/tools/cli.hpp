#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace momentsdp::cli {

enum ExitCode { kSuccess = 0, kSolverFailure = 2, kUserError = 3 };

struct RunConfig {
  std::string command;
  std::string input;
  int order = 0;      // 0 = minimum order of the problem
  int max_order = 0;  // 0 = same as order
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  double rank_tol = 1e-6;
  double assert_threshold = 1e-6;
  int restarts = 1000;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string format = "json";
  std::string out;
  bool timing = true;
  // Task options (override the envelope when given).
  int terms = 0;
  std::string symmetric;  // "", "true", "false" or comma-separated group labels
  std::vector<int> parties;  // edge-witness, 1-based
  std::string dump;          // relax: relaxation dump path
  // Sweep.
  std::string family;
  double start = 0.0;
  double stop = 0.0;
  int steps = -1;  // -1 = family default
};

// Parses argv and runs one command. Reports go to out (or --out), messages
// to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace momentsdp::cli
