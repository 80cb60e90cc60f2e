#pragma once

#include <stdexcept>
#include <string>

namespace rareis {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RAREIS_DEFINE_ERROR(Name)        \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

RAREIS_DEFINE_ERROR(InvalidConfig);
RAREIS_DEFINE_ERROR(InvalidDomain);
RAREIS_DEFINE_ERROR(NonFiniteState);
RAREIS_DEFINE_ERROR(SingularAtTerminal);
RAREIS_DEFINE_ERROR(NoConvergence);
RAREIS_DEFINE_ERROR(QuadratureNotConverged);
RAREIS_DEFINE_ERROR(SingularSystem);
RAREIS_DEFINE_ERROR(EmbeddingFailure);
RAREIS_DEFINE_ERROR(OutOfWindow);
RAREIS_DEFINE_ERROR(CapTooSmall);
RAREIS_DEFINE_ERROR(ConfigError);
RAREIS_DEFINE_ERROR(UnknownPreset);

#undef RAREIS_DEFINE_ERROR

}  // namespace rareis
