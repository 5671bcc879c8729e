#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace calibra {

// Base class for all errors raised by the library.  CLI layers map these to
// exit codes; everything below is still a std::runtime_error so callers that
// do not care about the taxonomy can catch one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Metric matrix failed to be positive definite (or invertible) at an
// evaluation point.
class DegenerateMetricError : public Error {
 public:
  DegenerateMetricError(const std::string& msg, const Eigen::VectorXd& at)
      : Error(msg), point(at) {}
  Eigen::VectorXd point;
};

// An evaluation point fell outside the chart domain, or a finite-difference
// stencil would have stepped outside it.
class ChartBoundaryError : public Error {
 public:
  ChartBoundaryError(const std::string& msg, const Eigen::VectorXd& at)
      : Error(msg), point(at) {}
  Eigen::VectorXd point;
};

// A geodesic (or other curve integration) left the chart before reaching the
// requested parameter value.  Carries the partial path so callers can report
// how far the curve got.
class LeftChartError : public Error {
 public:
  LeftChartError(const std::string& msg, std::vector<Eigen::VectorXd> path,
                 double reached)
      : Error(msg), partial_path(std::move(path)), t_reached(reached) {}
  std::vector<Eigen::VectorXd> partial_path;
  double t_reached = 0.0;
};

// Differential of an immersion lost rank at a parameter point.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& msg, const Eigen::VectorXd& at)
      : Error(msg), parameter(at) {}
  Eigen::VectorXd parameter;
};

// Form degree / dimension mismatch in multilinear algebra operations.
class DegreeMismatchError : public Error {
 public:
  explicit DegreeMismatchError(const std::string& msg) : Error(msg) {}
};

// Raised when a fibre integral or supremum is requested over a fibre that is
// not described as compact (no periodic coordinates / bounded region).
class FibreNotCompactError : public Error {
 public:
  explicit FibreNotCompactError(const std::string& msg) : Error(msg) {}
};

// Expression parser failure with 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line_, int column_)
      : Error(msg + " (line " + std::to_string(line_) + ", column " +
              std::to_string(column_) + ")"),
        line(line_),
        column(column_) {}
  int line = 1;
  int column = 1;
};

// A scenario check whose mathematical hypothesis fails at the supplied data
// (for example a comparison theorem invoked where its sign condition does not
// hold).  Distinct from a residual failure: the statement was never in force.
class HypothesisViolatedError : public Error {
 public:
  explicit HypothesisViolatedError(const std::string& msg) : Error(msg) {}
};

// Configuration file problems: missing keys, unknown scenario ids, malformed
// JSON and the like.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace calibra
