#ifndef SPHERE_PINCH_ERRORS_HPP
#define SPHERE_PINCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sphere_pinch {

/// Argument outside the domain of an operation (radius out of range, bad coordinates).
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Requested configuration is valid input but not supported (n < 3, non-pinch metric for GH, ...).
class UnsupportedError : public std::invalid_argument {
public:
  explicit UnsupportedError(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative or numerical procedure failed to produce a usable result.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed profile file or configuration.
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sphere_pinch

#endif // SPHERE_PINCH_ERRORS_HPP
