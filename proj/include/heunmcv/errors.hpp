#pragma once

#include <stdexcept>
#include <string>

namespace heunmcv {

enum class Err {
    InvalidInput,
    PoleError,
    UseInfinityRealization,
    DegenerateThetaInf,
    UseLineRealization,
    FirstOrderReducible,
    NotHeunShaped,
    TransitionUndefined,
    NoGluing,
    NotRealizable,
    DegenerateDenominator,
    GeneratorUndefined,
    MapUndefined,
    GaugeUndefined,
    KernelUndefined,
    WrongBranch,
    BadGerm,
    LogarithmicCase,
    NotRegularSingular,
    PathTooClose,
    BranchError,
    QuadratureError,
    VerificationFailure,
};

const char* err_name(Err e);

/// All library failures carry a taxonomy code plus a human-readable message.
class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& msg)
        : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}
    Err code() const { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) { throw Error(code, msg); }

}  // namespace heunmcv
