#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace docsplit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on an argument (e.g. doc_len = 0).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data. Carries an optional file name and
/// 1-based line number so callers can report "file:line: cause".
class DataError : public Error {
 public:
  explicit DataError(std::string cause, std::string file = {}, std::size_t line = 0);

  const std::string& cause() const noexcept { return cause_; }
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

  /// Same error with a location attached; keeps an existing location.
  DataError at(const std::string& file, std::size_t line) const;

 private:
  std::string cause_;
  std::string file_;
  std::size_t line_;
};

}  // namespace docsplit
