#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace scedex {

// Base of every error raised by the library. Carries the module that raised
// it and an optional remedy hint so the CLI can produce structured reports.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what, std::string hint = {})
      : std::runtime_error(what), module_(std::move(module)), hint_(std::move(hint)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& hint() const noexcept { return hint_; }

 private:
  std::string module_;
  std::string hint_;
};

#define SCEDEX_DEFINE_ERROR(Name)                                             \
  class Name : public Error {                                                 \
   public:                                                                    \
    using Error::Error;                                                       \
  };

SCEDEX_DEFINE_ERROR(ParseError)
SCEDEX_DEFINE_ERROR(OrderingError)
SCEDEX_DEFINE_ERROR(DomainError)
SCEDEX_DEFINE_ERROR(EmptySeasonError)
SCEDEX_DEFINE_ERROR(EmptyPoolError)
SCEDEX_DEFINE_ERROR(RangeError)
SCEDEX_DEFINE_ERROR(SingularityError)
SCEDEX_DEFINE_ERROR(NoExceedanceError)
SCEDEX_DEFINE_ERROR(InsufficientDataError)
SCEDEX_DEFINE_ERROR(ConvergenceError)
SCEDEX_DEFINE_ERROR(QuadratureError)
SCEDEX_DEFINE_ERROR(SpecError)

#undef SCEDEX_DEFINE_ERROR

}  // namespace scedex
