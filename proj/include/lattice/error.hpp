#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lattice {

enum class ErrorKind {
    InvalidInput,
    UnknownTopology,
    BboxTooSmall,
    InvalidGraph,
    ZeroLength,
    DisconnectedMesh,
    NoBoundary,
    SingularSystem,
    NotPositiveDefinite,
    NotOrthotropic,
    InsufficientData,
    MissingTopology,
    MissingCase,
    EmptyTable,
    IoError,
};

std::string_view to_string(ErrorKind kind);

// Every domain failure in the library is reported through this type; `kind()`
// lets callers (the CLI, the study runner) branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace lattice
