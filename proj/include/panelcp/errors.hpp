#pragma once

#include <stdexcept>
#include <string>

namespace panelcp {

// Error taxonomy shared by the library and the CLI. The CLI maps kinds to
// process exit codes: user/input problems -> 1, data that defeats the
// estimators -> 2, everything else -> 3.
enum class ErrorKind {
    invalid_data,        // non-finite or malformed observations
    unsupported_horizon, // T too small for the requested statistic
    parameter,           // bad argument (alpha, tau, draw count, ...)
    input,               // CSV / config file problems
    degenerate_data,     // zero-variance residuals, all-skipped ratio, ...
    estimation_quality,  // estimate too far from usable (e.g. badly indefinite)
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::invalid_data:
            case ErrorKind::unsupported_horizon:
            case ErrorKind::parameter:
            case ErrorKind::input:
                return 1;
            case ErrorKind::degenerate_data:
            case ErrorKind::estimation_quality:
                return 2;
            default:
                return 3;
        }
    }

private:
    ErrorKind kind_;
};

struct InvalidDataError : Error {
    explicit InvalidDataError(const std::string& what)
        : Error(ErrorKind::invalid_data, what) {}
};

struct UnsupportedHorizonError : Error {
    explicit UnsupportedHorizonError(const std::string& what)
        : Error(ErrorKind::unsupported_horizon, what) {}
};

struct ParameterError : Error {
    explicit ParameterError(const std::string& what)
        : Error(ErrorKind::parameter, what) {}
};

struct InputError : Error {
    explicit InputError(const std::string& what)
        : Error(ErrorKind::input, what) {}
};

struct DegenerateDataError : Error {
    explicit DegenerateDataError(const std::string& what)
        : Error(ErrorKind::degenerate_data, what) {}
};

struct EstimationQualityError : Error {
    explicit EstimationQualityError(const std::string& what)
        : Error(ErrorKind::estimation_quality, what) {}
};

} // namespace panelcp
