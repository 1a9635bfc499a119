#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace shocklab {

using Complex = std::complex<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SHOCKLAB_ERROR(Name)          \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

SHOCKLAB_ERROR(DegenerateShockError);
SHOCKLAB_ERROR(InvalidModelError);
SHOCKLAB_ERROR(BranchCutError);
SHOCKLAB_ERROR(NoConnectionError);
SHOCKLAB_ERROR(RangeError);
SHOCKLAB_ERROR(ContractionError);
SHOCKLAB_ERROR(NearBranchError);
SHOCKLAB_ERROR(NearRootError);
SHOCKLAB_ERROR(InvalidContourError);
SHOCKLAB_ERROR(ExtendContourError);
SHOCKLAB_ERROR(RefineContourError);
SHOCKLAB_ERROR(DivergenceError);
SHOCKLAB_ERROR(ConfigError);

#undef SHOCKLAB_ERROR

}  // namespace shocklab
