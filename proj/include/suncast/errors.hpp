#ifndef SUNCAST_ERRORS_HPP
#define SUNCAST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace suncast {

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidValue : std::runtime_error {
  explicit InvalidValue(const std::string& msg) : std::runtime_error(msg) {}
};

// data ingestion
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MissingColumn : ParseError {
  explicit MissingColumn(const std::string& msg) : ParseError(msg) {}
};

struct NonMonotonicTimestamps : ParseError {
  explicit NonMonotonicTimestamps(const std::string& msg) : ParseError(msg) {}
};

struct GapError : ParseError {
  explicit GapError(const std::string& msg) : ParseError(msg) {}
};

struct DegenerateScale : InvalidValue {
  explicit DegenerateScale(const std::string& msg) : InvalidValue(msg) {}
};

struct TooShort : InvalidValue {
  explicit TooShort(const std::string& msg) : InvalidValue(msg) {}
};

struct NotFound : std::runtime_error {
  explicit NotFound(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainingDiverged : std::runtime_error {
  TrainingDiverged(const std::string& msg, int epoch_index)
      : std::runtime_error(msg), epoch(epoch_index) {}
  int epoch;
};

}  // namespace suncast

#endif
