#pragma once
#include <stdexcept>
#include <string>

namespace naesat {

enum class ExitCode { ok = 0, mismatch = 2, capacity = 3, usage = 4 };

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ExitCode code() const { return code_; }

private:
    ExitCode code_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ExitCode::usage, "configuration error: " + m) {}
};
struct InputError : Error {
    explicit InputError(const std::string& m) : Error(ExitCode::usage, "input error: " + m) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error(ExitCode::usage, "parse error: " + m) {}
};
struct CapacityError : Error {
    explicit CapacityError(const std::string& m) : Error(ExitCode::capacity, "capacity guard: " + m) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error(ExitCode::mismatch, "validation error: " + m) {}
};

}  // namespace naesat
