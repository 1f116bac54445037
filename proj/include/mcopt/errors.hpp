#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcopt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MCOPT_DEFINE_ERROR(Name)             \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

MCOPT_DEFINE_ERROR(InvalidSolution);
MCOPT_DEFINE_ERROR(MissingPart);
MCOPT_DEFINE_ERROR(SpaceTooLarge);
MCOPT_DEFINE_ERROR(TooFewSamples);
MCOPT_DEFINE_ERROR(EmptyFactors);
MCOPT_DEFINE_ERROR(InvalidSchedule);
MCOPT_DEFINE_ERROR(InvalidStopCondition);
MCOPT_DEFINE_ERROR(InvalidConfig);
MCOPT_DEFINE_ERROR(SubSolverContractViolation);
MCOPT_DEFINE_ERROR(NoOperatorRegistered);
MCOPT_DEFINE_ERROR(CapacityExceeded);
MCOPT_DEFINE_ERROR(DigitOutOfRange);
MCOPT_DEFINE_ERROR(InvalidInstance);

#undef MCOPT_DEFINE_ERROR

/// Instance-file error carrying the offending source and 1-based line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message), source_(source), line_(line) {}

  [[nodiscard]] const std::string& source() const { return source_; }
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

}  // namespace mcopt
