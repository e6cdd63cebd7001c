#pragma once

#include <stdexcept>
#include <string>

namespace kep {

/// Failure categories raised by the library. Every throwing operation
/// documents which of these it can raise.
enum class ErrorCode {
    InvalidParameter,    ///< constructor/factory argument violates a stated invariant
    NotPeriodic,         ///< operation requires a closed (elliptic) orbit
    ZeroVelocity,        ///< direction-dependent quantity requested at v = 0
    DegenerateBasis,     ///< supplied plane basis is not orthonormal
    SingularElements,    ///< element set undefined at this state (circular/equatorial/retrograde limit)
    NonPositiveW,        ///< equinoctial denominator W = 1 + ex cos l + ey sin l <= 0
    OriginSingularity,   ///< trajectory reached the gravitational singularity guard radius
    NonPositiveMass,     ///< mass hit zero or below during integration
    StepSizeUnderflow,   ///< step controller drove the step under the smallest representable increment
    BoundViolated,       ///< control magnitude exceeds the admissible thrust bound
    NotInPMinus,         ///< construction requires a state in the P-minus region
    GramianSingular,     ///< steering Gramian numerically singular
    EndpointOutsideRegion, ///< path endpoint not inside the requested region
    NoConvergence,       ///< iterative solver exhausted its budget without meeting tolerance
    EventNeverFires,     ///< required terminal event did not occur within the time horizon
    BracketFailure,      ///< could not establish a sign-changing bracket
    InnerSolverFailure,  ///< inner optimal-control solve failed during an outer iteration
    ScenarioError,       ///< scenario file missing, malformed, or inconsistent
    MissingTrajectory,   ///< figure emission requested without trajectory data
    IoError,             ///< filesystem read/write failure
};

/// Human-readable tag for an ErrorCode, e.g. "NotPeriodic".
const char* error_code_name(ErrorCode code);

/// Exception carrying a typed failure category plus a contextual message.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace kep
