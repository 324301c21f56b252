#pragma once

#include <stdexcept>
#include <string>

namespace priornet {

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file was readable but its contents are malformed.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& message, std::size_t iteration)
      : std::runtime_error(message), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace priornet
