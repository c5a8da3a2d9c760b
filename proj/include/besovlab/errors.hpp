#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace besovlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Requested size exceeds the configured point budget.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::size_t requested, std::size_t budget)
      : Error(what + ": requested " + std::to_string(requested) + " points, budget " +
              std::to_string(budget)),
        requested_(requested),
        budget_(budget) {}
  std::size_t requested() const { return requested_; }
  std::size_t budget() const { return budget_; }

 private:
  std::size_t requested_;
  std::size_t budget_;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class BindingError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class InfeasibilityError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_iterate, double best_value)
      : Error(what), best_(std::move(best_iterate)), best_value_(best_value) {}
  const std::vector<double>& best_iterate() const { return best_; }
  double best_value() const { return best_value_; }

 private:
  std::vector<double> best_;
  double best_value_;
};

}  // namespace besovlab
