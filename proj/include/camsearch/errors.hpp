#pragma once

#include <stdexcept>
#include <string>

namespace camsearch {

/// Base class of every error raised by the library. `kind()` is a stable
/// machine-readable tag; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& detail)
        : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define CAMSEARCH_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& detail) : Error(#Name, detail) {}    \
    };

// kinematics
CAMSEARCH_DEFINE_ERROR(Unreachable)
CAMSEARCH_DEFINE_ERROR(SingularWristAxis)

// workspace
CAMSEARCH_DEFINE_ERROR(NonPositiveRadius)
CAMSEARCH_DEFINE_ERROR(DomainError)
CAMSEARCH_DEFINE_ERROR(EmptyInterval)
CAMSEARCH_DEFINE_ERROR(NoIntersection)
CAMSEARCH_DEFINE_ERROR(EmptySpace)

// actuation
CAMSEARCH_DEFINE_ERROR(NearDegenerateTimeConstants)
CAMSEARCH_DEFINE_ERROR(StepTooCoarse)

// imaging
CAMSEARCH_DEFINE_ERROR(FrameTooSmall)
CAMSEARCH_DEFINE_ERROR(DimensionMismatch)
CAMSEARCH_DEFINE_ERROR(EmptyList)
CAMSEARCH_DEFINE_ERROR(BadKernel)

// search
CAMSEARCH_DEFINE_ERROR(SpaceTooSmall)
CAMSEARCH_DEFINE_ERROR(EmptyExploredSet)
CAMSEARCH_DEFINE_ERROR(SafetyViolation)
CAMSEARCH_DEFINE_ERROR(InsufficientInitialEnergy)
CAMSEARCH_DEFINE_ERROR(NoNewNodes)

// scenario loading
CAMSEARCH_DEFINE_ERROR(ParseError)
CAMSEARCH_DEFINE_ERROR(ValidationError)

#undef CAMSEARCH_DEFINE_ERROR

}  // namespace camsearch
