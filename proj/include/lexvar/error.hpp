#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lexvar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised while reading or decoding input text.
class IngestError : public Error {
public:
  IngestError(std::string file, std::size_t offset, const std::string& what)
      : Error(file.empty() ? what
                           : file + ": " + what + " at byte offset " + std::to_string(offset)),
        file_(std::move(file)), offset_(offset) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t offset() const noexcept { return offset_; }

private:
  std::string file_;
  std::size_t offset_;
};

}  // namespace lexvar
