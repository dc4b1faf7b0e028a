#pragma once

#include <stdexcept>
#include <string>

namespace bora {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define BORA_DEFINE_ERROR(Name)                                  \
  struct Name : Error {                                          \
    explicit Name(const std::string& msg) : Error(msg) {}        \
  }

BORA_DEFINE_ERROR(NonFinite);
BORA_DEFINE_ERROR(InvalidRing);
BORA_DEFINE_ERROR(EmptyNeighborInfo);
BORA_DEFINE_ERROR(LocationInBarrier);
BORA_DEFINE_ERROR(IsolatedUnreachable);
BORA_DEFINE_ERROR(NoReachableNeighbor);
BORA_DEFINE_ERROR(InvalidPermutation);
BORA_DEFINE_ERROR(SingularNeighborGram);
BORA_DEFINE_ERROR(NegativeDistance);
BORA_DEFINE_ERROR(InvalidSpec);
BORA_DEFINE_ERROR(DimensionMismatch);
BORA_DEFINE_ERROR(NonFiniteLikelihood);
BORA_DEFINE_ERROR(MissingCovariates);
BORA_DEFINE_ERROR(LengthMismatch);
BORA_DEFINE_ERROR(EmptyEvaluation);
BORA_DEFINE_ERROR(TooFewPoints);
BORA_DEFINE_ERROR(DegenerateBins);
BORA_DEFINE_ERROR(ParseError);
BORA_DEFINE_ERROR(IoError);

#undef BORA_DEFINE_ERROR

}  // namespace bora
