#include "spiral/errors.hpp"

namespace spiral {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::AdmissibilityViolated: return "AdmissibilityViolated";
        case ErrorKind::CavitationError: return "CavitationError";
        case ErrorKind::EllipticityLost: return "EllipticityLost";
        case ErrorKind::BlowUp: return "BlowUp";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::NoContraction: return "NoContraction";
        case ErrorKind::LeftIterationSet: return "LeftIterationSet";
        case ErrorKind::MonotonicityLost: return "MonotonicityLost";
        case ErrorKind::TrajectoryExit: return "TrajectoryExit";
        case ErrorKind::CoercivityLost: return "CoercivityLost";
    }
    return "Unknown";
}

SolverError::SolverError(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw SolverError(kind, what); }

}  // namespace spiral
