#pragma once

#include <stdexcept>
#include <string>

namespace leadoff {

// Caller broke a documented precondition (bad state pair, wrong action type, ...).
struct contract_error : std::logic_error {
  explicit contract_error(const std::string& msg) : std::logic_error(msg) {}
};

// Malformed or inconsistent input data (files, records, configs).
struct data_error : std::runtime_error {
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Kernel assembly could not produce a complete stochastic kernel.
struct assembly_error : std::runtime_error {
  explicit assembly_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Kernel failed halting validation; solving it would not terminate meaningfully.
struct invalid_kernel_error : std::runtime_error {
  explicit invalid_kernel_error(const std::string& msg) : std::runtime_error(msg) {}
};

// An iterative routine hit its iteration cap before reaching tolerance.
struct convergence_error : std::runtime_error {
  explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace leadoff
