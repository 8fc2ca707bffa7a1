#pragma once

#include <stdexcept>
#include <string>

namespace sphar {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Multipole or time index outside the range held by a panel.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// The panel carries no information (e.g. every coefficient is zero).
class DegeneratePanelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An adaptive series did not reach its tolerance before the truncation cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, long cap)
      : std::runtime_error(what), cap_(cap) {}
  long cap() const noexcept { return cap_; }

 private:
  long cap_;
};

/// Requested allocation exceeds the configured memory budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, written, or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sphar
