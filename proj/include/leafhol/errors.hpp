#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace leafhol {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SpecMismatch : public Error {
 public:
  using Error::Error;
};

class OutOfInjectivityRadius : public Error {
 public:
  using Error::Error;
};

class NonFiniteRHS : public Error {
 public:
  using Error::Error;
};

class NonFiniteOutput : public Error {
 public:
  using Error::Error;
};

/// An integrated trajectory left the domain guard box or became non-finite.
class Blowup : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EndpointMismatch : public Error {
 public:
  EndpointMismatch(std::size_t junction, double gap)
      : Error("base endpoints do not match at junction " + std::to_string(junction) +
              " (gap " + std::to_string(gap) + ")"),
        junction_(junction),
        gap_(gap) {}

  std::size_t junction() const noexcept { return junction_; }
  double gap() const noexcept { return gap_; }

 private:
  std::size_t junction_;
  double gap_;
};

class NotLinear : public Error {
 public:
  using Error::Error;
};

class NotMonotone : public Error {
 public:
  using Error::Error;
};

class NotALoop : public Error {
 public:
  explicit NotALoop(double gap)
      : Error("base curve does not close (gap " + std::to_string(gap) + ")"), gap_(gap) {}

  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

class NotInvertible : public Error {
 public:
  using Error::Error;
};

class NoLogsAvailable : public Error {
 public:
  using Error::Error;
};

}  // namespace leafhol
