#pragma once

#include <stdexcept>
#include <string>

namespace sgdecay {

// Base for every library failure. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SGDECAY_ERROR(Name)                 \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  };

// input-side problems (bad parameters, out-of-domain arguments)
SGDECAY_ERROR(DomainError)
SGDECAY_ERROR(SpecError)
SGDECAY_ERROR(RegimeParameterError)
SGDECAY_ERROR(PreconditionError)
SGDECAY_ERROR(IntegrabilityError)
SGDECAY_ERROR(ZeroFunctionError)

// numerical failures
SGDECAY_ERROR(OverflowError)
SGDECAY_ERROR(MonotonicityError)
SGDECAY_ERROR(BracketError)
SGDECAY_ERROR(ConvergenceError)
SGDECAY_ERROR(TailError)
SGDECAY_ERROR(LimitError)
SGDECAY_ERROR(NonConvergenceError)
SGDECAY_ERROR(WindowError)

#undef SGDECAY_ERROR

}  // namespace sgdecay
