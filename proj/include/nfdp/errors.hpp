#pragma once

#include <stdexcept>
#include <string>

namespace nfdp {

// Bad argument values (sizes, ranges, malformed tables).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed probability data (negative entries, rows that do not sum to one).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Conditioning on an event of probability zero. Callers are expected to prune
// zero-probability branches before updating, so reaching this signals either a
// bug or genuinely inconsistent evidence; it is never silently absorbed.
class ImpossibleEvidenceError : public std::runtime_error {
 public:
  explicit ImpossibleEvidenceError(const std::string& what) : std::runtime_error(what) {}
};

// A configured size cap (actions, states, paths, strategies) would be exceeded.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative routine failed to converge within its iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Broken internal invariant (e.g. a successor state missing from a layer).
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace nfdp
