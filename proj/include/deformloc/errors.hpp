#pragma once

#include <stdexcept>
#include <string>

namespace deformloc {

/// Error taxonomy shared by the library and the CLI. `kind` maps to the
/// process exit code: config -> 2, data -> 3, numeric -> 4.
class Error : public std::runtime_error {
 public:
  enum class Kind { config, data, numeric };

  Error(std::string name, Kind kind, const std::string& message)
      : std::runtime_error(message), name_(std::move(name)), kind_(kind) {}

  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }

  int exit_code() const {
    switch (kind_) {
      case Kind::config: return 2;
      case Kind::data: return 3;
      case Kind::numeric: return 4;
    }
    return 4;
  }

 private:
  std::string name_;
  Kind kind_;
};

inline Error config_error(const std::string& name, const std::string& msg) {
  return Error(name, Error::Kind::config, msg);
}
inline Error data_error(const std::string& name, const std::string& msg) {
  return Error(name, Error::Kind::data, msg);
}
inline Error numeric_error(const std::string& name, const std::string& msg) {
  return Error(name, Error::Kind::numeric, msg);
}

}  // namespace deformloc
