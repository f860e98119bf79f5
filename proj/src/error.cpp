#include "docsplit/error.hpp"

namespace docsplit {
namespace {

std::string describe(const std::string& cause, const std::string& file, std::size_t line) {
  std::string out;
  if (!file.empty()) {
    out += file;
    out += ':';
    if (line > 0) {
      out += std::to_string(line);
      out += ':';
    }
    out += ' ';
  } else if (line > 0) {
    out += "line " + std::to_string(line) + ": ";
  }
  return out + cause;
}

}  // namespace

DataError::DataError(std::string cause, std::string file, std::size_t line)
    : Error(describe(cause, file, line)), cause_(std::move(cause)), file_(std::move(file)), line_(line) {}

DataError DataError::at(const std::string& file, std::size_t line) const {
  return DataError(cause_, file_.empty() ? file : file_, line_ == 0 ? line : line_);
}

}  // namespace docsplit
