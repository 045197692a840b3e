#pragma once

#include <stdexcept>
#include <string>

namespace dadp {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or partition dimensions do not line up.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A symmetric argument was not symmetric within tolerance.
class NotSymmetric : public Error {
 public:
  using Error::Error;
};

/// A matrix required to be Hurwitz has an eigenvalue with nonnegative real
/// part.
class NotHurwitz : public Error {
 public:
  using Error::Error;
};

/// Simulation produced a non-finite or diverging state.
class Divergence : public Error {
 public:
  Divergence(const std::string& what, double time);
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// The data do not carry enough excitation: (I_x, I_xu) or the least-squares
/// operator lost column rank.
class RankDeficient : public Error {
 public:
  RankDeficient(const std::string& what, int rank, int required);
  int rank() const noexcept { return rank_; }
  int required() const noexcept { return required_; }

 private:
  int rank_;
  int required_;
};

/// A solve returned NaN or Inf entries.
class NonFiniteSolution : public Error {
 public:
  using Error::Error;
};

/// The damping parameter could not be decreased any further.
class AlphaStalled : public Error {
 public:
  using Error::Error;
};

/// An iteration hit its cap before meeting its stopping test.
class IterationCap : public Error {
 public:
  using Error::Error;
};

/// The structured SDP has no strictly feasible point.
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// Interior-point stagnation or a failed factorization inside the solver.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dadp
