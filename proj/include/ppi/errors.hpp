#pragma once

#include <stdexcept>
#include <string>

namespace ppi {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PPI_DEFINE_ERROR(Name)        \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  };

// data ingestion
PPI_DEFINE_ERROR(MalformedFile)
PPI_DEFINE_ERROR(ValueOutOfRange)
PPI_DEFINE_ERROR(MissingRole)
PPI_DEFINE_ERROR(UnknownCountry)
PPI_DEFINE_ERROR(EmptyGroup)
PPI_DEFINE_ERROR(DimensionTooSmall)

// network estimation
PPI_DEFINE_ERROR(TooFewYears)
PPI_DEFINE_ERROR(DegenerateInput)
PPI_DEFINE_ERROR(TooFewNodes)
PPI_DEFINE_ERROR(ZeroVariance)

// simulation engine
PPI_DEFINE_ERROR(OutOfRange)
PPI_DEFINE_ERROR(NonFiniteInput)
PPI_DEFINE_ERROR(InvalidContribution)

// calibration
PPI_DEFINE_ERROR(NoNetwork)
PPI_DEFINE_ERROR(SearchBoundsInvalid)

// coherence
PPI_DEFINE_ERROR(UnknownMode)
PPI_DEFINE_ERROR(DegenerateVector)
PPI_DEFINE_ERROR(UndefinedIndex)
PPI_DEFINE_ERROR(RunCountMismatch)

// experiments
PPI_DEFINE_ERROR(TooFewModes)
PPI_DEFINE_ERROR(MissingCell)
PPI_DEFINE_ERROR(IoError)

#undef PPI_DEFINE_ERROR

}  // namespace ppi
