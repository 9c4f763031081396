#pragma once

#include <stdexcept>
#include <string>

namespace occnav {

// Broad failure classes. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
  usage = 1,
  config = 2,
  io = 3,
  data_format = 4,
  numeric = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error config_error(const std::string& what) { return Error(ErrorKind::config, what); }
inline Error io_error(const std::string& what) { return Error(ErrorKind::io, what); }
inline Error format_error(const std::string& what) { return Error(ErrorKind::data_format, what); }
inline Error numeric_error(const std::string& what) { return Error(ErrorKind::numeric, what); }
inline Error usage_error(const std::string& what) { return Error(ErrorKind::usage, what); }

}  // namespace occnav
