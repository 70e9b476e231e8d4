#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace nipot {

/// Resolved parameters for one subcommand.
struct RunConfig {
  std::string command;
  int n = 1;
  double p = 2.0;
  double s = 0.3;
  double q = 2.0;
  double alpha = 2.0;
  std::optional<double> lambda;  // holomorphic potentials; default is the admissible midpoint
  double eps = 0.0;              // 0: w = 1, otherwise power weight (n = 2)
  std::size_t resolution = 256;
  std::optional<int> L;          // dyadic depth; resolved per subcommand
  std::uint64_t seed = 7;
  int measures = 10;
  int atoms = 8;
  double radius = 0.25;
  double t = 1.0;                // tail exponent for weight-diag
  int max_iterations = 20000;    // capacity solver cap
  std::string out;
  std::string summary;

  std::string to_json() const;
};

/// Parses and runs one subcommand. Exit codes: 0 ok, 1 invalid input, 2 solver failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

const std::vector<std::string>& subcommands();

}  // namespace nipot
