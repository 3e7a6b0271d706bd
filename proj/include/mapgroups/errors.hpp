#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mapgroups {

// Bad shapes, violated preconditions, malformed descriptors.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A least-squares or interpolation problem that has no acceptable solution.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Non-finite values produced while evaluating a closed-form map.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point or value outside the domain where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A group element outside the exponential chart.
class ChartDomainError : public DomainError {
 public:
  using DomainError::DomainError;
};

class SingularBoundaryError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Chart pieces that disagree on an overlap.
class IncompatibilityError : public std::runtime_error {
 public:
  IncompatibilityError(const std::string& what, double defect, std::vector<double> point)
      : std::runtime_error(what), defect_(defect), point_(std::move(point)) {}
  double defect() const noexcept { return defect_; }
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  double defect_;
  std::vector<double> point_;
};

}  // namespace mapgroups
