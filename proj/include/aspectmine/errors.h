#ifndef ASPECTMINE_ERRORS_H_
#define ASPECTMINE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace aspectmine {

// Bad configuration: invalid regex, out-of-range hyperparameter, bad spec.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that violates a documented invariant (clicks > impressions,
// missing department, schema mismatch, empty graph).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A malformed log row. `row()` is the 1-based line number in the source.
class ValidationError : public DataError {
 public:
  ValidationError(std::size_t row, const std::string& reason)
      : DataError("row " + std::to_string(row) + ": " + reason), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a metric is undefined for its input (e.g. heterogeneity of
// fewer than two carousels).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke a precondition of an API function.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace aspectmine

#endif  // ASPECTMINE_ERRORS_H_
