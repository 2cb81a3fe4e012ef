#pragma once

#include <stdexcept>
#include <string>

namespace pbvar {

/// Bad input: malformed files, inconsistent configuration, domain violations
/// in user-supplied data. The CLI maps these to exit status 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical step failed (rank deficiency, loss of positive definiteness).
/// Carries a "module/operation" breadcrumb; the CLI maps these to exit status 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace pbvar
