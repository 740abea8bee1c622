#include "contagion/errors.hpp"

#include <atomic>
#include <iostream>

namespace contagion {

Error::Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
ValidationError::ValidationError(const std::string& what) : Error(ExitCode::Validation, what) {}
NumericalError::NumericalError(const std::string& what) : Error(ExitCode::Numerical, what) {}
IoError::IoError(const std::string& what) : Error(ExitCode::Io, what) {}

namespace {

void stderr_sink(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

std::atomic<WarningSink> g_sink{&stderr_sink};

}  // namespace

void set_warning_sink(WarningSink sink) { g_sink.store(sink ? sink : &stderr_sink); }

void warn(const std::string& message) { g_sink.load()(message); }

}  // namespace contagion
