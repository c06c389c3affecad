#pragma once

#include <stdexcept>
#include <string>

namespace specmdp {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Violated precondition: bad arguments, malformed config, shape mismatch.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A required moment or constant is not recorded on the law.
class UndefinedMomentError : public Error {
 public:
  explicit UndefinedMomentError(const std::string& what) : Error(what) {}
};

/// Two independent evaluation routes of the same quantity disagree.
class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& what) : Error(what) {}
};

/// Dense linear algebra requested above the configured size limit.
class SizeLimitError : public Error {
 public:
  explicit SizeLimitError(const std::string& what) : Error(what) {}
};

/// Experiment cannot produce a statistically usable answer (tail too deep,
/// MGF argument too close to the boundary).
class FeasibilityError : public Error {
 public:
  explicit FeasibilityError(const std::string& what) : Error(what) {}
};

/// The closed form requested does not apply (degenerate quadratic form,
/// wrong rate-function branch).
class BranchError : public Error {
 public:
  explicit BranchError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace specmdp
