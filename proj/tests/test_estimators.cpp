#include "helpers.hpp"
#include "oracles.hpp"

#include "ioslab/estimators.hpp"
#include "ioslab/examples.hpp"

#include <doctest.h>

#include <cmath>

using namespace ioslab;
using testing::error_kind;

namespace {

SampleGrid small_grid() {
    SampleGrid g;
    g.radii = {0.5, 2.0};
    g.states_per_radius = 3;
    g.levels = {0.5, 2.0};
    g.random_inputs = 2;
    g.horizon = 5.0;
    g.integrator.step = 0.01;
    return g;
}

}  // namespace

TEST_CASE("sample grids are seeded and lie on the requested spheres") {
    const auto g = small_grid();
    const auto a = g.states(3), b = g.states(3);
    CHECK(a == b);
    REQUIRE(a.size() == 6);
    CHECK(euclidean_norm(a[0]) == doctest::Approx(0.5));
    CHECK(euclidean_norm(a[5]) == doctest::Approx(2.0));
    auto other = g;
    other.seed = 99;
    CHECK(other.states(3) != a);

    const auto inputs = g.input_family(2);
    CHECK(inputs.size() == 1 + 2 * 2 + 2);
    CHECK(sup_norm(inputs[1]) == doctest::Approx(0.5));
    for (const auto& d : g.disturbance_family(2)) {
        CHECK(d.unit_ball());
        CHECK(sup_norm(d) <= 1.0 + 1e-12);
    }
}

TEST_CASE("IOS estimate for a stable scalar system") {
    // |x(t)| ≤ e^{-t}|ξ| + ‖u‖ ≤ max{2e^{-t}|ξ|, 2‖u‖}
    const auto sys = testing::scalar_stable();
    EstimateGains good;
    good.beta = KLSurface::exponential(2.0, 1.0);
    good.gamma = ComparisonFunction::linear(2.0);
    const auto ok = verify_estimate(sys, PropertyKind::IOS, good, small_grid());
    CHECK(ok.holds());
    CHECK(ok.worst_margin >= 0.0);
    CHECK(ok.to_json().at("verdict") == "holds-on-grid");
    CHECK(ok.to_json().at("witness").is_null());

    EstimateGains bad = good;
    bad.gamma = ComparisonFunction::linear(0.5);
    const auto no = verify_estimate(sys, PropertyKind::IOS, bad, small_grid());
    CHECK_FALSE(no.holds());
    CHECK(no.worst_margin < 0.0);
    REQUIRE(no.witness);
    CHECK(no.witness->observed > no.witness->bound);
    CHECK(no.to_json().at("verdict") == "violated");

    EstimateGains missing;
    CHECK(error_kind([&] { verify_estimate(sys, PropertyKind::IOS, missing, small_grid()); }) == ErrorKind::Usage);
}

TEST_CASE("OL, SIOS and UBIBS estimates") {
    const auto sys = testing::scalar_stable();
    EstimateGains g;
    g.sigma1 = ComparisonFunction::identity();
    g.sigma2 = ComparisonFunction::identity();
    CHECK(verify_estimate(sys, PropertyKind::OL, g, small_grid()).holds());
    g.beta = KLSurface::exponential(2.0, 1.0);
    g.gamma = ComparisonFunction::linear(2.0);
    CHECK(verify_estimate(sys, PropertyKind::SIOS, g, small_grid()).holds());
    g.sigma = ComparisonFunction::identity();
    CHECK(verify_estimate(sys, PropertyKind::UBIBS, g, small_grid()).holds());
    g.sigma = ComparisonFunction::linear(0.5);
    CHECK_FALSE(verify_estimate(sys, PropertyKind::UBIBS, g, small_grid()).holds());
}

TEST_CASE("blow-up inside a batch is a forward-completeness error") {
    EstimateGains g;
    g.beta = KLSurface::exponential(1.0, 1.0);
    g.gamma = ComparisonFunction::identity();
    auto grid = small_grid();
    grid.horizon = 3.0;
    CHECK(error_kind([&] { verify_estimate(testing::finite_escape(), PropertyKind::IOS, g, grid); }) ==
          ErrorKind::ForwardCompleteness);
}

TEST_CASE("margin tracker keeps the worst point") {
    MarginTracker a, b;
    a.observe(1.0, 0.5, {1.0}, nullptr, 0.1);
    b.observe(1.0, 1.5, {2.0}, nullptr, 0.2);
    b.observe(1.0, 1.2, {3.0}, nullptr, 0.3);
    a.merge(b);
    CHECK(a.worst() == doctest::Approx(-0.5));
    const auto r = a.report(PropertyKind::IOS, Json::object(), 3);
    REQUIRE(r.witness);
    CHECK(r.witness->xi == Vec{2.0});
    CHECK(r.witness->t == 0.2);
}

TEST_CASE("half-time and empirical beta") {
    const auto sys = testing::scalar_stable();
    const auto traj = simulate(sys, Vec{3.0}, InputSignal::zero(1), 3.0, 1e-3);
    REQUIRE(output_half_time(traj));
    CHECK(*output_half_time(traj) == doctest::Approx(std::log(2.0)).epsilon(1e-4));

    auto grid = small_grid();
    const auto beta = fit_empirical_beta(sys, grid);
    for (double r : {0.5, 2.0})
        for (double t : {0.0, 0.7, 2.5}) CHECK(beta(r, t) >= r * std::exp(-t) - 1e-9);
}

TEST_CASE("violation search finds nothing for a well-behaved system") {
    const auto sys = testing::scalar_stable();
    auto grid = small_grid();
    CHECK_FALSE(find_estimate_violation(sys, PropertyKind::OL, grid));
    CHECK_FALSE(find_estimate_violation(sys, PropertyKind::SIOS, grid));
    CHECK(error_kind([&] { find_estimate_violation(sys, PropertyKind::IOS, grid); }) == ErrorKind::Usage);
}

TEST_CASE("OL violation of sys11") {
    SampleGrid grid;
    grid.radii = {1.0};
    grid.states_per_radius = 0;
    const auto w = find_estimate_violation(build_sys11(), PropertyKind::OL, grid);
    REQUIRE(w);
    CHECK(w->observed == doctest::Approx(oracle::sys11_peak()).epsilon(1e-4));
    CHECK(w->to_json().at("kind") == "OLIOS_ol_part");
}

TEST_CASE("Lyapunov decrease for the scalar system") {
    const auto sys = testing::scalar_stable();
    ScalarField v{[](std::span<const double> x) { return 0.5 * x[0] * x[0]; },
                  [](std::span<const double> x) { return Vec{x[0]}; }};
    const auto states = box_lattice({-3.0}, {3.0}, 13);
    std::vector<Vec> mus{{-2.0}, {-0.5}, {0.0}, {1.0}, {2.5}};
    // V ≥ |μ|² forces |x| > |μ|, where x(-x + μ) < 0
    auto ok = lyapunov_decrease_check(sys, v, ComparisonFunction::tabulate([](double s) { return s * s; },
                                                                          linspace(0, 10, 101), GainClass::KInfinity),
                                      states, mus);
    CHECK(ok.holds());
    // V ≥ |μ|²/8 admits |x| = |μ|/2, where the derivative is positive
    auto no = lyapunov_decrease_check(sys, v, ComparisonFunction::tabulate([](double s) { return s * s / 8; },
                                                                          linspace(0, 10, 101), GainClass::KInfinity),
                                      states, mus);
    CHECK_FALSE(no.holds());

    ScalarField wrong{v.value, [](std::span<const double> x) { return Vec{3.0 * x[0]}; }};
    CHECK(error_kind([&] {
              lyapunov_decrease_check(sys, wrong, ComparisonFunction::identity(), states, mus);
          }) == ErrorKind::Numerical);
    ScalarField shifted{[](std::span<const double> x) { return 1.0 + x[0] * x[0]; }, {}};
    CHECK(error_kind([&] {
              lyapunov_decrease_check(sys, shifted, ComparisonFunction::identity(), states, mus);
          }) == ErrorKind::Precondition);
}

TEST_CASE("box lattice") {
    const auto pts = box_lattice({-1, 0}, {1, 2}, 3);
    CHECK(pts.size() == 9);
    CHECK(pts.front() == Vec{-1, 0});
    CHECK(pts.back() == Vec{1, 2});
}

TEST_CASE("ROS decay for sys29 under output feedback") {
    SampleGrid grid;
    grid.radii = {1.0, 10.0};
    grid.states_per_radius = 2;
    grid.horizon = 5.0;
    grid.integrator = counterexample_integrator(1e-3);
    // |z(t)| = |z(0)|e^{-t} under |u| ≤ |y|
    const auto res = verify_ros(build_sys29(), ComparisonFunction::identity(), KLSurface::exponential(1.0, 0.99), grid);
    CHECK(res.decay.holds());
    const auto bad = verify_ros(build_sys29(), ComparisonFunction::identity(), KLSurface::exponential(0.5, 1.0), grid);
    CHECK_FALSE(bad.decay.holds());
    const ComparisonFunction bounded({{0, 0}, {1, 1}}, GainClass::K, 0.0);
    CHECK(error_kind([&] { verify_ros(build_sys29(), bounded, KLSurface::exponential(1, 1), grid); }) ==
          ErrorKind::Usage);
}

TEST_CASE("property names") {
    CHECK(property_from_string("IOS") == PropertyKind::IOS);
    CHECK(property_from_string("ol") == PropertyKind::OL);
    CHECK(property_from_string("lyap") == PropertyKind::LyapDecrease);
    CHECK(error_kind([] { property_from_string("xyz"); }) == ErrorKind::Usage);
}
