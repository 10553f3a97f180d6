#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semioverlap/hamiltonian.hpp"

namespace semioverlap::cli {

enum class Command { Spectrum, WkbEval, Overlap, SixJ, Validate };

enum class SixJMode { Exact, PonzanoRegge, Converge };

struct RunConfig {
  Command command = Command::Validate;
  // Model files, or built-ins "builtin:ho", "builtin:ho:<shift>", "builtin:quartic",
  // "builtin:tilted:<t>", "builtin:p", "builtin:q".
  std::string model;
  std::string model2;
  double h = 0.1;
  int grid_n = 512;
  double q_min = -10.0;
  double q_max = 10.0;
  int levels = 10;
  int level = 0;       // wkb-eval
  int stride = 1;      // wkb-eval: every stride-th grid point
  std::vector<int> n1, n2;
  std::vector<double> sweep_h;  // overlap --sweep-h
  double energy = 1.0;          // sweep cells sit around b = energy
  std::vector<int> offsets = {-2, -1, 0, 1, 2};
  SixJMode sixj_mode = SixJMode::Exact;
  std::vector<std::string> spins;  // six, as "3/2", "1.5" or doubled integers
  bool doubled = false;
  std::vector<int> scales = {1, 2, 4, 8};
  double trim = 0.2;
  std::string output;  // empty: stdout
  std::uint64_t seed = 0;
};

// Parses argv; throws Error(Parse) with CLI11's message on bad usage.
// Returns nullopt when help was requested (the help text goes to `out`).
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

// Exit codes: 0 success, 1 domain error, 2 parse or I/O error.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// parse_args + run.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

PolyHamiltonian resolve_model(const std::string& spec);
std::string describe(const RunConfig& config);
// 17 significant digits, scientific.
std::string format_double(double x);
// SEMIOVERLAP_THREADS if set and positive, otherwise the hardware concurrency.
unsigned worker_count();

}  // namespace semioverlap::cli
