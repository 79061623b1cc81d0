#pragma once

#include <stdexcept>
#include <string>

namespace agora {

enum class ErrorKind {
    Config,        // invalid configuration or CLI input
    Io,            // file system / serialization failures
    Precondition,  // caller violated an operation precondition
    Gateway,       // provider transport or protocol failure
    Capability,    // endpoint lacks a required capability
    Scoring,       // judge/reward reply could not be interpreted
    Analysis,      // degenerate numeric input (singular design, zero variance, ...)
    Job,           // generation job level failure (rejection ceiling, checkpoint mismatch)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::Gateway: return "gateway";
        case ErrorKind::Capability: return "capability";
        case ErrorKind::Scoring: return "scoring";
        case ErrorKind::Analysis: return "analysis";
        case ErrorKind::Job: return "job";
    }
    return "unknown";
}

}  // namespace agora
