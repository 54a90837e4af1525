#pragma once

#include <stdexcept>
#include <string>

namespace spiral {

enum class ErrorKind {
    InvalidParams,
    AdmissibilityViolated,
    CavitationError,
    EllipticityLost,
    BlowUp,
    SingularSystem,
    NoContraction,
    LeftIterationSet,
    MonotonicityLost,
    TrajectoryExit,
    CoercivityLost,
};

const char* to_string(ErrorKind k);

class SolverError : public std::runtime_error {
public:
    SolverError(ErrorKind kind, const std::string& what);
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// radius at which the failure was detected, when meaningful
class AdmissibilityViolated : public SolverError {
public:
    AdmissibilityViolated(double r, const std::string& what)
        : SolverError(ErrorKind::AdmissibilityViolated, what), radius(r) {}
    double radius;
};

class BlowUp : public SolverError {
public:
    BlowUp(double r, const std::string& what) : SolverError(ErrorKind::BlowUp, what), radius(r) {}
    double radius;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace spiral
