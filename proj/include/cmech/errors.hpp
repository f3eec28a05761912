#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmech {

enum class ErrorKind {
    ContractViolation,
    SurfaceDegenerate,
    LagrangianInadmissible,
    FrameSingular,
    ConstraintsNotSecondClass,
    DegenerateBody,
    StepRejected,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::ContractViolation: return "ContractViolation";
    case ErrorKind::SurfaceDegenerate: return "SurfaceDegenerate";
    case ErrorKind::LagrangianInadmissible: return "LagrangianInadmissible";
    case ErrorKind::FrameSingular: return "FrameSingular";
    case ErrorKind::ConstraintsNotSecondClass: return "ConstraintsNotSecondClass";
    case ErrorKind::DegenerateBody: return "DegenerateBody";
    case ErrorKind::StepRejected: return "StepRejected";
    }
    return "Unknown";
}

/// Base of every error raised by the library. what() is prefixed by the kind
/// name so command-line users see e.g. "DegenerateBody: ...".
class MechanicsError : public std::runtime_error {
public:
    MechanicsError(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

template <ErrorKind Kind>
class KindedError : public MechanicsError {
public:
    explicit KindedError(const std::string& message) : MechanicsError(Kind, message) {}
};

using ContractViolation = KindedError<ErrorKind::ContractViolation>;
using SurfaceDegenerate = KindedError<ErrorKind::SurfaceDegenerate>;
using LagrangianInadmissible = KindedError<ErrorKind::LagrangianInadmissible>;
using FrameSingular = KindedError<ErrorKind::FrameSingular>;
using ConstraintsNotSecondClass = KindedError<ErrorKind::ConstraintsNotSecondClass>;
using DegenerateBody = KindedError<ErrorKind::DegenerateBody>;

/// Raised by the Lie-series integrator when the coefficient ratio test says the
/// step lies outside the series' usable radius.
class StepRejected : public MechanicsError {
public:
    StepRejected(const std::string& message, double suggested_step)
        : MechanicsError(ErrorKind::StepRejected, message), suggested_step_(suggested_step) {}

    [[nodiscard]] double suggested_step() const noexcept { return suggested_step_; }

private:
    double suggested_step_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw ContractViolation(message);
    }
}

}  // namespace detail
}  // namespace cmech
