#pragma once

#include <stdexcept>
#include <string>

namespace ccbm {

// Base for all domain errors so callers can catch the whole family.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvertedElement : Error {
    explicit InvertedElement(const std::string& msg) : Error(msg) {}
};
struct SolverFailure : Error {
    explicit SolverFailure(const std::string& msg) : Error(msg) {}
};
struct MeshMismatch : Error {
    explicit MeshMismatch(const std::string& msg) : Error(msg) {}
};
struct GeometryMismatch : Error {
    explicit GeometryMismatch(const std::string& msg) : Error(msg) {}
};
struct EmptyInclusion : Error {
    explicit EmptyInclusion(const std::string& msg) : Error(msg) {}
};
struct NoNegativeMinimum : Error {
    explicit NoNegativeMinimum(const std::string& msg) : Error(msg) {}
};
struct NoMinima : Error {
    explicit NoMinima(const std::string& msg) : Error(msg) {}
};
struct NoRejection : Error {
    explicit NoRejection(const std::string& msg) : Error(msg) {}
};
struct ZeroDirection : Error {
    explicit ZeroDirection(const std::string& msg) : Error(msg) {}
};
struct InterfaceNotResolved : Error {
    explicit InterfaceNotResolved(const std::string& msg) : Error(msg) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace ccbm
