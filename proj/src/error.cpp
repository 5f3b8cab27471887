#include "lattice/error.hpp"

namespace lattice {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::UnknownTopology: return "UnknownTopology";
        case ErrorKind::BboxTooSmall: return "BboxTooSmall";
        case ErrorKind::InvalidGraph: return "InvalidGraph";
        case ErrorKind::ZeroLength: return "ZeroLength";
        case ErrorKind::DisconnectedMesh: return "DisconnectedMesh";
        case ErrorKind::NoBoundary: return "NoBoundary";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::NotOrthotropic: return "NotOrthotropic";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::MissingTopology: return "MissingTopology";
        case ErrorKind::MissingCase: return "MissingCase";
        case ErrorKind::EmptyTable: return "EmptyTable";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace lattice
