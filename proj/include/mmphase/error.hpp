#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmphase {

enum class ErrorKind {
    InvalidParameters,
    InadmissibleEta,
    SingularSlope,
    KPole,
    Domain,
    StepUnderflow,
    InsufficientSamples,
    SignChange,
    UnsupportedResonance,
    InsufficientPrecision,
    Construction,
    Inconclusive,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI can report it as JSON without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace mmphase
