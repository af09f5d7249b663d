// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_ERRORS_HPP
#define MADPFI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace madpfi {

// Process exit codes used by the CLI: 0 success, 2 validation,
// 3 computation, 4 I/O.
enum class ErrorKind { validation = 2, computation = 3, io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg)
      : Error(ErrorKind::validation, msg) {}
};

// Malformed input records; carries file/line context when known.
class ParseError : public ValidationError {
 public:
  explicit ParseError(const std::string& msg) : ValidationError(msg) {}
  ParseError(const std::string& file, std::size_t line, const std::string& msg)
      : ValidationError(file + ":" + std::to_string(line) + ": " + msg),
        file_(file),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_ = 0;
};

class ComputationError : public Error {
 public:
  explicit ComputationError(const std::string& msg)
      : Error(ErrorKind::computation, msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(ErrorKind::io, msg) {}
};

}  // namespace madpfi

#endif  // MADPFI_ERRORS_HPP
