#pragma once

#include <stdexcept>
#include <string>

namespace wedge {

// Root of every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define WEDGE_DEFINE_ERROR(Name)            \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

WEDGE_DEFINE_ERROR(DomainError);
WEDGE_DEFINE_ERROR(VacuumError);
WEDGE_DEFINE_ERROR(InadmissibleShock);
WEDGE_DEFINE_ERROR(WrongSideError);
WEDGE_DEFINE_ERROR(NoPolarError);
WEDGE_DEFINE_ERROR(NoAttachedShock);
WEDGE_DEFINE_ERROR(NoSonicIntersection);
WEDGE_DEFINE_ERROR(GeometryError);
WEDGE_DEFINE_ERROR(SupersonicityViolation);
WEDGE_DEFINE_ERROR(MappingError);
WEDGE_DEFINE_ERROR(InnerSolveError);
WEDGE_DEFINE_ERROR(CornerEscapeError);
WEDGE_DEFINE_ERROR(CflError);

#undef WEDGE_DEFINE_ERROR

// Configuration problems carry the offending key so the CLI can name it.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace wedge
