// Command-line front end: aei <drift|convergence|efficiency|resonance|verify> [options]

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "aei/harness.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  aei::ExperimentConfig cfg;
  try {
    cfg = aei::parse_cli(args);
  } catch (const aei::HelpRequested& help) {
    std::cout << help.what();
    return aei::kExitOk;
  } catch (const aei::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n"
              << "run 'aei --help' for usage\n";
    return aei::kExitConfigError;
  }
  try {
    return aei::run_experiment(cfg, std::cout);
  } catch (const aei::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return aei::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return aei::kExitRuntimeError;
  }
}
