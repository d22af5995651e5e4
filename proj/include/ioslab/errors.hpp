#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace ioslab {

enum class ErrorKind {
    Usage,                // bad arguments, dimension mismatch, unknown names
    Domain,               // argument outside a function's domain
    Range,                // value outside a bounded function's range
    Precondition,         // e.g. non-Hurwitz matrix, box without origin
    Numerical,            // non-finite state, non-convergence
    Horizon,              // settling search ran past the representable horizon
    Construction,         // a constructed object failed its own verification
    ForwardCompleteness,  // a trajectory blew up before the horizon
    Io,
};

std::string_view to_string(ErrorKind kind);

/// CLI exit code associated with an error kind (2 = usage, 3 = numerical failure).
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, nlohmann::json detail = nullptr)
        : std::runtime_error(message), kind_(kind), detail_(std::move(detail)) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const nlohmann::json& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    nlohmann::json detail_;
};

}  // namespace ioslab
