#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace pmaps::cli {

enum ExitCode : int { ok = 0, hypotheses_failed = 1, not_converged = 2, io_or_schema = 3 };

struct RunConfig {
  std::string command;
  std::string map_source;
  double s = 1.0;
  double s_min = 0.25;
  double s_max = 2.0;
  int s_steps = 8;
  int cells = 1024;
  double tol = 1e-10;
  int max_iter = 200000;
  int depth = 4;
  int n_max = 0;  // 0 picks 200, or 2000 when β is indifferent
  int grid = 4096;
  std::string format;
  std::string out;
  std::string emit = "density";
  std::uint64_t seed = 20240601;

  /// Throws std::invalid_argument naming the offending field.
  void check() const;
  nlohmann::json to_json() const;
  std::vector<double> s_grid() const;
};

/// Parses argv, runs one subcommand and returns its exit code. Data goes to
/// `out` (or the --out file), diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pmaps::cli
