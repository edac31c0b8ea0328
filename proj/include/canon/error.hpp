#pragma once

#include <stdexcept>
#include <string>

namespace canon {

// Base of every domain error. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No configuration carries positive weight, or sum n_j < k.
class InfeasibleModel : public Error {
 public:
  using Error::Error;
};

// A potential table is not log-concave or has non-interval support.
class InvalidPotential : public Error {
 public:
  InvalidPotential(int site, int index, const std::string& what)
      : Error("invalid potential at site " + std::to_string(site) +
              ", index " + std::to_string(index) + ": " + what),
        site_(site),
        index_(index) {}

  int site() const noexcept { return site_; }
  int index() const noexcept { return index_; }

 private:
  int site_;
  int index_;
};

// The site/particle kernel needs delta > 0.
class UnsupportedKernel : public Error {
 public:
  using Error::Error;
};

// State space exceeds the enumeration cap.
class TooLarge : public Error {
 public:
  TooLarge(long double count, long double cap)
      : Error("state space too large: " + std::to_string(static_cast<double>(count)) +
              " configurations (cap " + std::to_string(static_cast<double>(cap)) + ")"),
        count_(count) {}

  long double count() const noexcept { return count_; }

 private:
  long double count_;
};

// A coupling invariant was violated. Assertion-grade: indicates a bug.
class CorruptedCoupling : public Error {
 public:
  using Error::Error;
};

}  // namespace canon
