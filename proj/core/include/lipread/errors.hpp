#pragma once

#include <stdexcept>
#include <string>

namespace lipread {

/// Base of every error raised by the toolkit. `kind()` is the stable,
/// machine-parsable class name printed by the CLI; `exit_code()` is the
/// process status the CLI maps it to.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, int exit_code, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)), exit_code_(exit_code) {}

  const std::string& kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  std::string kind_;
  int exit_code_;
};

#define LIPREAD_DEFINE_ERROR(Name, Code)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(#Name, Code, what) {}   \
  }

LIPREAD_DEFINE_ERROR(UsageError, 2);
LIPREAD_DEFINE_ERROR(IoError, 3);
LIPREAD_DEFINE_ERROR(InvalidArgument, 4);

// corpus
LIPREAD_DEFINE_ERROR(DecodeError, 10);
LIPREAD_DEFINE_ERROR(SegmentationError, 11);
LIPREAD_DEFINE_ERROR(NoFaceDetected, 12);
LIPREAD_DEFINE_ERROR(EmptyVocabulary, 13);
LIPREAD_DEFINE_ERROR(EmptyCorpus, 14);
LIPREAD_DEFINE_ERROR(UnreadableClip, 15);

// landmarks
LIPREAD_DEFINE_ERROR(AllFramesInvalid, 20);
LIPREAD_DEFINE_ERROR(DegenerateGeometry, 21);

// models
LIPREAD_DEFINE_ERROR(InvalidSpec, 30);
LIPREAD_DEFINE_ERROR(ShapeMismatch, 31);
LIPREAD_DEFINE_ERROR(CorruptCheckpoint, 32);
LIPREAD_DEFINE_ERROR(MissingCheckpoint, 33);

// training / evaluation
LIPREAD_DEFINE_ERROR(TooFewSamples, 40);
LIPREAD_DEFINE_ERROR(DivergedTraining, 41);
LIPREAD_DEFINE_ERROR(EmptySplit, 50);

// realtime
LIPREAD_DEFINE_ERROR(SourceClosed, 60);
LIPREAD_DEFINE_ERROR(RobotUnavailable, 61);

#undef LIPREAD_DEFINE_ERROR

}  // namespace lipread
