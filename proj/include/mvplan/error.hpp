#pragma once

#include <stdexcept>
#include <string>

namespace mvplan {

// Every failure the library reports derives from Error. The CLI maps the
// concrete type onto its exit code, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input documents that cannot be read or do not match their schema.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::string reason, int line = 0)
      : Error(format(file, reason, line)),
        file_(std::move(file)),
        reason_(std::move(reason)),
        line_(line) {}

  const std::string& file() const { return file_; }
  const std::string& reason() const { return reason_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& file, const std::string& reason, int line) {
    std::string out = file;
    if (line > 0) out += ":" + std::to_string(line);
    if (!out.empty()) out += ": ";
    return out + reason;
  }

  std::string file_;
  std::string reason_;
  int line_ = 0;
};

// Structurally valid input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// No selection of plans satisfies the budget.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string group_id, const std::string& reason)
      : Error(reason), group_id_(std::move(group_id)) {}

  const std::string& group_id() const { return group_id_; }

 private:
  std::string group_id_;
};

// Statistics that are undefined for the given data (zero variance, etc).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvplan
