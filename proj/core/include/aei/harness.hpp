#pragma once

// Experiment configuration and execution behind the command-line tool.
//
// Exit statuses: 0 ok, 1 a verification check failed, 2 configuration
// error, 3 runtime error.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aei/errors.hpp"
#include "aei/integrators.hpp"

namespace aei {

enum class Experiment { Drift, Convergence, Efficiency, Resonance, Verify };

std::string_view to_string(Experiment e);

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Thrown by parse_cli for --help; carries the usage text.
class HelpRequested : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Verify;
  std::vector<MethodId> methods;
  std::vector<double> epsilons;
  std::vector<double> steps;   // drift/efficiency; empty: h = ε
  std::vector<int> exponents;  // convergence: h = 2^-i
  std::vector<double> ratios;  // resonance
  double t_end = 1.0;
  int stride = 1;
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 42;
  Em1Options em1{};
  double reference_tol = 1e-12;
  int workers = 0;
};

// Validates the config; throws ConfigError naming the offending setting.
void validate(const ExperimentConfig& cfg);

// args excludes the program name. Unknown flags are rejected.
ExperimentConfig parse_cli(const std::vector<std::string>& args);

// Runs the experiment, writes <output_dir>/<experiment>.csv and returns an
// exit status. Progress and tables go to `log`.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// Column order of each CSV file.
const std::vector<std::string>& csv_header(Experiment e);

}  // namespace aei
