#ifndef SLICESIM_ERRORS_HPP
#define SLICESIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace slicesim {

// Error categories map 1:1 onto CLI exit codes (see tools/main.cpp).
enum class ErrorCategory {
  generic = 1,
  config = 2,
  io = 3,
  dimension_mismatch = 4,
  count = 5,
  checkpoint_mismatch = 6,
  mismatched_scenario = 7,
  unknown_slice = 8,
  domain = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorCategory::config, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCategory::io, m) {}
};
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& m)
      : Error(ErrorCategory::dimension_mismatch, m) {}
};
struct CountError : Error {
  explicit CountError(const std::string& m) : Error(ErrorCategory::count, m) {}
};
struct CheckpointMismatch : Error {
  explicit CheckpointMismatch(const std::string& m)
      : Error(ErrorCategory::checkpoint_mismatch, m) {}
};
struct MismatchedScenario : Error {
  explicit MismatchedScenario(const std::string& m)
      : Error(ErrorCategory::mismatched_scenario, m) {}
};
struct UnknownSlice : Error {
  explicit UnknownSlice(const std::string& m) : Error(ErrorCategory::unknown_slice, m) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error(ErrorCategory::domain, m) {}
};

}  // namespace slicesim

#endif  // SLICESIM_ERRORS_HPP
