#pragma once

#include <stdexcept>
#include <string>

namespace panelcf {

/// Base class for all errors thrown by this library. `kind()` is a stable
/// machine-readable tag used in structured CLI error output.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual const char* kind() const { return "Error"; }
};

#define PANELCF_DEFINE_ERROR(Name)                        \
    class Name : public Error {                           \
    public:                                               \
        using Error::Error;                               \
        const char* kind() const override { return #Name; } \
    }

// Ingestion / panel construction
PANELCF_DEFINE_ERROR(ParseError);
PANELCF_DEFINE_ERROR(DuplicateCell);
PANELCF_DEFINE_ERROR(IncompletePanel);
PANELCF_DEFINE_ERROR(DomainError);
PANELCF_DEFINE_ERROR(InsufficientHistory);
PANELCF_DEFINE_ERROR(InsufficientUnits);

// Solvers
PANELCF_DEFINE_ERROR(NumericalError);
PANELCF_DEFINE_ERROR(MixingError);
PANELCF_DEFINE_ERROR(FoldError);
PANELCF_DEFINE_ERROR(DegenerateMask);
PANELCF_DEFINE_ERROR(EnsembleError);

// Bad arguments / configuration
PANELCF_DEFINE_ERROR(ConfigError);

#undef PANELCF_DEFINE_ERROR

}  // namespace panelcf
