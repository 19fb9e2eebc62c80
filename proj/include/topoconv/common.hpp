#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace topoconv {

using cxd = std::complex<double>;

// Error taxonomy maps onto process exit codes: Config -> 1,
// Numerical/Shape/Io -> 2, OracleMismatch -> 3.
enum class ErrorKind { Config, Numerical, Shape, Io, OracleMismatch };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* version_string() { return "topoconv 0.1.0"; }

}  // namespace topoconv
