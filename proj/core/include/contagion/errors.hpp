#pragma once

#include <stdexcept>
#include <string>

namespace contagion {

// Exit status carried by each error family; the CLI maps these directly.
enum class ExitCode : int { Ok = 0, Validation = 1, Numerical = 2, Io = 3 };

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what);
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what);
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what);
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what);
};

// Non-fatal diagnostics. The default sink writes to stderr; tests swap it.
using WarningSink = void (*)(const std::string&);
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace contagion
