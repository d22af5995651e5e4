#pragma once

#include "ioslab/errors.hpp"
#include "ioslab/sysmodel.hpp"

#include <optional>

namespace testing {

/// Kind of the ioslab::Error thrown by fn, or nullopt if nothing is thrown.
template <class F>
std::optional<ioslab::ErrorKind> error_kind(F&& fn) {
    try {
        fn();
    } catch (const ioslab::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

/// ẋ = -x + u, y = x (scalar).
inline ioslab::ControlSystem scalar_stable() {
    return ioslab::ControlSystem(
        "scalar", 1, 1, 1,
        [](std::span<const double> x, std::span<const double> u, std::span<double> dx) { dx[0] = -x[0] + u[0]; },
        [](std::span<const double> x, std::span<double> y) { y[0] = x[0]; });
}

/// ẋ = x², y = x: escapes to infinity at t = 1/x(0).
inline ioslab::ControlSystem finite_escape() {
    return ioslab::ControlSystem(
        "escape", 1, 1, 1,
        [](std::span<const double> x, std::span<const double>, std::span<double> dx) { dx[0] = x[0] * x[0]; },
        [](std::span<const double> x, std::span<double> y) { y[0] = x[0]; });
}

}  // namespace testing
