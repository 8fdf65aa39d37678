#pragma once
#include <stdexcept>
#include <string>

namespace linf {

// Malformed input file; carries a 1-based line and column.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line(line), column(column) {}
  int line;
  int column;
};

// Internal invariant breach inside a solver (bad step sizes, sampler faults).
struct SolverFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Demands that no searched radius can route.
struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace linf
