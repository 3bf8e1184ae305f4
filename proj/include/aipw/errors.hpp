#pragma once

#include <stdexcept>
#include <string>

namespace aipw {

enum class ErrorKind {
    Usage,
    DegenerateInput,
    SingularBandwidth,
    Dimension,
    Domain,
    Parse,
    Numerical,
    Convergence,
};

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[nodiscard]] inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return "usage";
        case ErrorKind::DegenerateInput: return "degenerate-input";
        case ErrorKind::SingularBandwidth: return "singular-bandwidth";
        case ErrorKind::Dimension: return "dimension";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Convergence: return "convergence";
    }
    return "unknown";
}

// CLI exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.
[[nodiscard]] inline int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return 2;
        case ErrorKind::DegenerateInput:
        case ErrorKind::Dimension:
        case ErrorKind::Domain:
        case ErrorKind::Parse: return 3;
        case ErrorKind::SingularBandwidth:
        case ErrorKind::Numerical:
        case ErrorKind::Convergence: return 4;
    }
    return 4;
}

} // namespace aipw
