#ifndef HAWKESWAVE_ERROR_HPP
#define HAWKESWAVE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hawkeswave {

/// Coarse error class; the CLI maps it to an exit code.
enum class ErrorKind { config, numerical, statistical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define HAWKESWAVE_DEFINE_ERROR(Name, Kind)                                                 \
    class Name : public Error {                                                             \
    public:                                                                                 \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, #Name ": " + what) {} \
    };

HAWKESWAVE_DEFINE_ERROR(ConfigError, config)
HAWKESWAVE_DEFINE_ERROR(NotBistable, numerical)
HAWKESWAVE_DEFINE_ERROR(StabilityViolation, numerical)
HAWKESWAVE_DEFINE_ERROR(OutOfRange, numerical)
HAWKESWAVE_DEFINE_ERROR(ProfileDiverged, numerical)
HAWKESWAVE_DEFINE_ERROR(NegativeH, numerical)
HAWKESWAVE_DEFINE_ERROR(IdentityViolation, numerical)
HAWKESWAVE_DEFINE_ERROR(NonFinite, numerical)
HAWKESWAVE_DEFINE_ERROR(OutOfTube, numerical)
HAWKESWAVE_DEFINE_ERROR(NoConvergence, numerical)
HAWKESWAVE_DEFINE_ERROR(GapNotFound, numerical)
HAWKESWAVE_DEFINE_ERROR(InsufficientRuns, statistical)

#undef HAWKESWAVE_DEFINE_ERROR

}  // namespace hawkeswave

#endif  // HAWKESWAVE_ERROR_HPP
