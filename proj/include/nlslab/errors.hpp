#pragma once

#include <stdexcept>
#include <string>

namespace nlslab {

// Process exit codes shared by the CLI and the test harness.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitPartial = 3;       // some scan points failed
inline constexpr int kExitConservation = 4;  // invariant drift breached mid-run

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user input: unknown keys, out-of-range parameters, preconditions that
// fail before any numerics start (omega below omega1, potential failing V1).
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// The numerics ran and did not reach the requested state: bisection bracket
// invalid, Newton stalled, eigensolver breakdown, iteration caps.
struct SolverError : Error {
  explicit SolverError(const std::string& what) : Error(what) {}
};

// A conserved quantity drifted past its budget during time evolution.
struct ConservationError : Error {
  explicit ConservationError(const std::string& what) : Error(what) {}
};

}  // namespace nlslab
