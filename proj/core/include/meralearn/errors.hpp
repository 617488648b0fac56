#pragma once

#include <stdexcept>
#include <string>

namespace mera {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (shape, range, Hermiticity, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A structured document could not be parsed into a library type.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A dense representation would exceed a configured size limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// An observable family does not span the requested operator space.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// A post-selection had (numerically) zero acceptance probability.
class PostSelectionError : public Error {
 public:
  PostSelectionError(const std::string& what, int layer, int block)
      : Error(what), layer_(layer), block_(block) {}
  int layer() const noexcept { return layer_; }
  int block() const noexcept { return block_; }

 private:
  int layer_;
  int block_;
};

}  // namespace mera
