#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ppqc {

// Wide accumulator for exact sums and cross-multiplication.
__extension__ typedef __int128 Wide;

// Base of every error the library throws on a contract failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GraphFormatError : public Error {
 public:
  using Error::Error;
};

// Random digraph rejection sampling ran out of retries.
class GenerationFailure : public Error {
 public:
  using Error::Error;
};

// No private decomposition was found inside the offset window.
class InfeasibleSchedule : public Error {
 public:
  using Error::Error;
};

class InvalidSchedule : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class NotFullySurrounded : public Error {
 public:
  using Error::Error;
};

class ReconstructionFailure : public Error {
 public:
  using Error::Error;
};

class WitnessUnavailable : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Overflow-checked 64-bit arithmetic. Protocol arithmetic is exact, so an
// overflow aborts the trial instead of wrapping.
inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw OverflowError("int64 overflow in addition");
  }
  return out;
}

inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_sub_overflow(a, b, &out)) {
    throw OverflowError("int64 overflow in subtraction");
  }
  return out;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw OverflowError("int64 overflow in multiplication");
  }
  return out;
}

}  // namespace ppqc
