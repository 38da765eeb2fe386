#pragma once

#include <stdexcept>
#include <string>

namespace advkit {

// Error taxonomy shared by the C++ core and mirrored by the C API status codes.
enum class ErrorCode : int {
    ok = 0,
    invalid_input = 1,      // bad data fed to an operation (shapes, ranges, ids)
    invalid_parameter = 2,  // bad configuration value (k > K, even kernel size, ...)
    spectral = 3,           // rank/eigenvalue deficiency in DPP sampling
    numeric = 4,            // non-finite values, divergence
    state = 5,              // operation called on an object in the wrong state
    io = 6,                 // file system / serialization failures
    config = 7,             // experiment config validation failures
    training_failure = 8,   // accuracy floor or convergence contract not met
    internal = 9,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }
[[noreturn]] inline void fail_input(const std::string& msg) { fail(ErrorCode::invalid_input, msg); }
[[noreturn]] inline void fail_parameter(const std::string& msg) { fail(ErrorCode::invalid_parameter, msg); }
[[noreturn]] inline void fail_spectral(const std::string& msg) { fail(ErrorCode::spectral, msg); }
[[noreturn]] inline void fail_numeric(const std::string& msg) { fail(ErrorCode::numeric, msg); }
[[noreturn]] inline void fail_state(const std::string& msg) { fail(ErrorCode::state, msg); }
[[noreturn]] inline void fail_io(const std::string& msg) { fail(ErrorCode::io, msg); }

inline void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

}  // namespace advkit
