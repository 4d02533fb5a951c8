#pragma once

#include <stdexcept>
#include <string>

namespace kneser {

// Forward recurrence left the floating range (dominant growth).
class OverflowError : public std::runtime_error {
 public:
  explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

// A generalized zero was found where a positive solution was required.
class OscillationError : public std::runtime_error {
 public:
  OscillationError(const std::string& what, long index)
      : std::runtime_error(what), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

// Horizon doubling hit the cap before the candidate stabilized.
class NoStabilizationError : public std::runtime_error {
 public:
  NoStabilizationError(const std::string& what, long horizon, double last_change)
      : std::runtime_error(what), horizon_(horizon), last_change_(last_change) {}
  long horizon() const { return horizon_; }
  double last_change() const { return last_change_; }

 private:
  long horizon_;
  double last_change_;
};

// A summability hypothesis required by an operation fails numerically.
class HypothesisViolatedError : public std::runtime_error {
 public:
  explicit HypothesisViolatedError(const std::string& what) : std::runtime_error(what) {}
};

// A limit fit (tail constant, ratio at zero) did not plateau.
class UnstableFitError : public std::runtime_error {
 public:
  explicit UnstableFitError(const std::string& what) : std::runtime_error(what) {}
};

// sup F(u)/u grows without plateau toward u -> 0+.
class UnboundedRatioError : public std::runtime_error {
 public:
  explicit UnboundedRatioError(const std::string& what) : std::runtime_error(what) {}
};

// No certification strategy produced a valid positivity witness.
class CannotCertifyError : public std::runtime_error {
 public:
  explicit CannotCertifyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kneser
