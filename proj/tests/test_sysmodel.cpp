#include "helpers.hpp"

#include "ioslab/sysmodel.hpp"

#include <doctest.h>

#include <cmath>

using namespace ioslab;
using testing::error_kind;

namespace {

// ẋ = u·(1 if x < 1/2 else 2); the guard x - 1/2 marks the switch.
ControlSystem switched_rate() {
    return ControlSystem(
        "switched", 1, 1, 1,
        [](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
            dx[0] = u[0] * (x[0] < 0.5 ? 1.0 : 2.0);
        },
        [](std::span<const double> x, std::span<double> y) { y[0] = x[0]; }, 1,
        [](std::span<const double> x, std::span<double> g) { g[0] = x[0] - 0.5; });
}

}  // namespace

TEST_CASE("systems must vanish at the origin") {
    CHECK(error_kind([] {
              ControlSystem("bad", 1, 0, 1,
                            [](std::span<const double>, std::span<const double>, std::span<double> dx) { dx[0] = 1; },
                            [](std::span<const double> x, std::span<double> y) { y[0] = x[0]; });
          }) == ErrorKind::Usage);
    CHECK(error_kind([] {
              ControlSystem("bad", 0, 0, 1, [](auto, auto, auto) {}, [](auto, auto) {});
          }) == ErrorKind::Usage);
}

TEST_CASE("input signals") {
    const InputSignal u({0.0, 1.0, 3.0}, {{1.0}, {-2.0}, {0.5}});
    CHECK(u.at(0.0)[0] == 1.0);
    CHECK(u.at(0.999)[0] == 1.0);
    CHECK(u.at(1.0)[0] == -2.0);
    CHECK(u.at(100.0)[0] == 0.5);
    CHECK(sup_norm(u) == 2.0);
    CHECK(sup_norm(u, 1.0) == 1.0);
    CHECK(sup_norm(u, 1.5) == 2.0);
    CHECK(sup_norm(u, 0.0) == 0.0);

    const auto s = u.shifted(2.0);
    CHECK(s.at(0.0)[0] == -2.0);
    CHECK(s.at(1.0)[0] == 0.5);

    const auto c = concat_inputs(InputSignal::constant({7.0}), 0.5, u);
    CHECK(c.at(0.2)[0] == 7.0);
    CHECK(c.at(0.6)[0] == 1.0);
    CHECK(c.at(1.6)[0] == -2.0);

    const auto back = InputSignal::from_json(u.to_json());
    CHECK(back.breakpoints() == u.breakpoints());
    CHECK(back.values() == u.values());

    CHECK(error_kind([] { InputSignal({0.0}, {{1.5}}, std::nullopt, true); }) == ErrorKind::Usage);
    CHECK(error_kind([] { InputSignal({0.5}, {{1.0}}); }) == ErrorKind::Usage);
    CHECK(error_kind([] { InputSignal({0.0, 0.0}, {{1.0}, {2.0}}); }) == ErrorKind::Usage);
    CHECK(InputSignal::zero(2).unit_ball());
}

TEST_CASE("RK4 agrees with the closed form and converges at fourth order") {
    const auto sys = testing::scalar_stable();
    const auto u = InputSignal::constant({1.0});
    auto err = [&](double step) {
        const auto traj = simulate(sys, Vec{2.0}, u, 5.0, step);
        double e = 0.0;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = traj.times[k];
            e = std::max(e, std::abs(traj.state(k)[0] - (1.0 + std::exp(-t))));
        }
        return e;
    };
    const double coarse = err(0.2), fine = err(0.1);
    CHECK(fine < 1e-5);
    CHECK(coarse / fine > 12.0);
    CHECK(err(1e-3) < 1e-12);
}

TEST_CASE("time grid includes input breakpoints and the horizon") {
    const auto sys = testing::scalar_stable();
    const InputSignal u({0.0, 0.25}, {{1.0}, {0.0}});
    const auto traj = simulate(sys, Vec{0.0}, u, 1.05, 0.1);
    CHECK(traj.times.back() == doctest::Approx(1.05));
    CHECK(std::find(traj.times.begin(), traj.times.end(), 0.25) != traj.times.end());
    // exact: x(0.25) = 1 - e^{-0.25}, then free decay
    CHECK(traj.state(traj.size() - 1)[0] == doctest::Approx((1.0 - std::exp(-0.25)) * std::exp(-0.8)).epsilon(1e-6));
    CHECK(traj.input(0)[0] == 1.0);
}

TEST_CASE("finite escape is reported as incomplete") {
    const auto traj = simulate(testing::finite_escape(), Vec{1.0}, InputSignal::zero(1), 2.0, 1e-3);
    CHECK_FALSE(traj.complete());
    CHECK(traj.end_time < 1.01);  // exact escape at t = 1
    CHECK(traj.blowup_norm > 1e12);
}

TEST_CASE("non-finite states raise a numerical error") {
    const ControlSystem nan_sys(
        "nan", 1, 0, 1,
        [](std::span<const double> x, std::span<const double>, std::span<double> dx) {
            dx[0] = x[0] > 1.5 ? std::nan("") : 1.0 * (x[0] != 0.0);
        },
        [](std::span<const double> x, std::span<double> y) { y[0] = x[0]; });
    CHECK(error_kind([&] { simulate(nan_sys, Vec{1.0}, InputSignal::none(), 5.0, 0.01); }) == ErrorKind::Numerical);
}

TEST_CASE("guard refinement resolves a switching surface") {
    const auto sys = switched_rate();
    const auto u = InputSignal::constant({1.0});
    // exact: x = t until t = 1/2, then slope 2, so x(1) = 1.5
    IntegratorOptions on;
    on.step = 0.3;
    IntegratorOptions off = on;
    off.refinement = Refinement::Off;
    const auto refined = simulate(sys, Vec{0.0}, u, 0.9, on);
    const auto plain = simulate(sys, Vec{0.0}, u, 0.9, off);
    const double exact = 0.5 + 2.0 * 0.4;
    CHECK(std::abs(refined.state(refined.size() - 1)[0] - exact) < 0.06);
    CHECK(std::abs(refined.state(refined.size() - 1)[0] - exact) <
          std::abs(plain.state(plain.size() - 1)[0] - exact));
}

TEST_CASE("dimension and domain checks") {
    const auto sys = testing::scalar_stable();
    CHECK(error_kind([&] { simulate(sys, Vec{0.0, 1.0}, InputSignal::zero(1), 1.0, 0.1); }) == ErrorKind::Usage);
    CHECK(error_kind([&] { simulate(sys, Vec{0.0}, InputSignal::zero(2), 1.0, 0.1); }) == ErrorKind::Usage);
    const InputSignal short_u({0.0}, {{1.0}}, 0.5);
    CHECK(error_kind([&] { simulate(sys, Vec{0.0}, short_u, 1.0, 0.1); }) == ErrorKind::Usage);
    CHECK(error_kind([&] { simulate(sys, Vec{0.0}, InputSignal::zero(1), 1.0, 0.0); }) == ErrorKind::Usage);
}

TEST_CASE("closed loop feeds back d·λ(|y|)") {
    const FeedbackLoop loop(testing::scalar_stable(), ComparisonFunction::linear(0.5));
    const auto eff = loop.effective_input(Vec{-4.0}, Vec{0.5});
    CHECK(eff[0] == doctest::Approx(1.0));
    CHECK(error_kind([&] { simulate_closed_loop(loop, Vec{1.0}, InputSignal::constant({0.5}), 1.0); }) ==
          ErrorKind::Usage);
    // ẋ = -x + x/2 for d = 1 and x > 0
    const auto traj = simulate_closed_loop(loop, Vec{1.0}, InputSignal::constant({1.0}, true), 2.0);
    CHECK(traj.state(traj.size() - 1)[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK(traj.input(0)[0] == doctest::Approx(0.5));
}

TEST_CASE("trajectory CSV") {
    const auto traj = simulate(testing::scalar_stable(), Vec{1.0}, InputSignal::zero(1), 0.2, 0.1);
    const auto csv = traj.to_csv();
    CHECK(csv.rfind("t,x1,y1,u1\n0,1,1,0\n", 0) == 0);
}
