#pragma once

#include <stdexcept>
#include <string>

namespace cvqkd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition on a numeric argument was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class RejectStage { Sync, Pilot, Phase, Align };

inline const char* to_string(RejectStage stage) {
  switch (stage) {
    case RejectStage::Sync: return "sync";
    case RejectStage::Pilot: return "pilot";
    case RejectStage::Phase: return "phase";
    case RejectStage::Align: return "align";
  }
  return "unknown";
}

// Raised by the receiver when a frame cannot be recovered. Counted into the
// frame error rate by the batch runner; never aborts a batch.
class FrameRejected : public Error {
 public:
  FrameRejected(RejectStage stage, const std::string& message)
      : Error(std::string(to_string(stage)) + ": " + message), stage_(stage) {}
  RejectStage stage() const noexcept { return stage_; }

 private:
  RejectStage stage_;
};

}  // namespace cvqkd
