#pragma once

#include <stdexcept>
#include <string>

namespace fattn {

// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    ok = 0,
    generic = 1,
    config = 2,
    capacity = 3,
    convergence = 4,
    numerical_health = 5,
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, ExitCode code = ExitCode::generic)
        : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

#define FATTN_DEFINE_ERROR(Name, Code)                                     \
    class Name : public Error {                                           \
    public:                                                               \
        explicit Name(const std::string& what) : Error(what, Code) {}     \
    };

FATTN_DEFINE_ERROR(DimensionError, ExitCode::generic)
FATTN_DEFINE_ERROR(ArgumentError, ExitCode::config)
FATTN_DEFINE_ERROR(NumericError, ExitCode::numerical_health)
FATTN_DEFINE_ERROR(ShapeError, ExitCode::generic)
FATTN_DEFINE_ERROR(UnsupportedGeometryError, ExitCode::config)
FATTN_DEFINE_ERROR(UnsupportedModelError, ExitCode::config)
FATTN_DEFINE_ERROR(InvalidPlanError, ExitCode::config)
FATTN_DEFINE_ERROR(ConfigError, ExitCode::config)
FATTN_DEFINE_ERROR(CapacityError, ExitCode::capacity)
FATTN_DEFINE_ERROR(ConvergenceError, ExitCode::convergence)
FATTN_DEFINE_ERROR(NumericalHealthError, ExitCode::numerical_health)
FATTN_DEFINE_ERROR(UndefinedError, ExitCode::generic)

#undef FATTN_DEFINE_ERROR

}  // namespace fattn
