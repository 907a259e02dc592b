#pragma once

#include <stdexcept>
#include <string>

namespace mapel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MAPEL_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

MAPEL_DEFINE_ERROR(ConfigError);
MAPEL_DEFINE_ERROR(PlacementInfeasible);
MAPEL_DEFINE_ERROR(UnknownAgent);
MAPEL_DEFINE_ERROR(EpisodeFinished);
MAPEL_DEFINE_ERROR(ActionArityMismatch);
MAPEL_DEFINE_ERROR(NonTerminalStatus);
MAPEL_DEFINE_ERROR(OutOfBounds);
MAPEL_DEFINE_ERROR(ShapeMismatch);
MAPEL_DEFINE_ERROR(NonFiniteLoss);
MAPEL_DEFINE_ERROR(CheckpointVersionMismatch);
MAPEL_DEFINE_ERROR(CorruptRecord);

#undef MAPEL_DEFINE_ERROR

}  // namespace mapel
