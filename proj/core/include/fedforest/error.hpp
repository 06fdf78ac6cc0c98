#pragma once

#include <stdexcept>
#include <string>

namespace fedforest {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data: unreadable files, schema violations, impossible splits.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A tree or forest was asked to score a row that lacks one of its split features.
class MissingFeatureError : public Error {
 public:
  explicit MissingFeatureError(const std::string& feature)
      : Error("missing feature '" + feature + "'"), feature_(feature) {}

  const std::string& feature() const noexcept { return feature_; }

 private:
  std::string feature_;
};

/// Malformed or unsupported exchange document.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Contract violations against the global tree store.
class FederationError : public Error {
 public:
  using Error::Error;
};

/// Statistical test preconditions not met.
class StatsError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedforest
