#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace yoloo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidBoxError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// No points of the cloud fall inside the requested box.
class EmptyPatchError : public Error {
 public:
  using Error::Error;
};

/// Batch sampling constraints cannot be satisfied by the dataset.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// MOTA is undefined when there are no ground-truth objects.
class UndefinedMotaError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace yoloo
