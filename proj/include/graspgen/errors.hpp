#pragma once

#include <stdexcept>
#include <string>

namespace graspgen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GRASPGEN_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    explicit Name(const std::string& what)   \
        : Error(#Name ": " + what) {}        \
  }

GRASPGEN_DEFINE_ERROR(ParseError);
GRASPGEN_DEFINE_ERROR(EmptyMesh);
GRASPGEN_DEFINE_ERROR(EmptyRegion);
GRASPGEN_DEFINE_ERROR(OneSidedContact);
GRASPGEN_DEFINE_ERROR(NoGraspsFound);
GRASPGEN_DEFINE_ERROR(DegenerateContacts);
GRASPGEN_DEFINE_ERROR(BenchTimeout);
GRASPGEN_DEFINE_ERROR(IoError);
GRASPGEN_DEFINE_ERROR(ValidationError);
GRASPGEN_DEFINE_ERROR(ConfigError);

#undef GRASPGEN_DEFINE_ERROR

}  // namespace graspgen
