#include "helpers.hpp"
#include "oracles.hpp"

#include "ioslab/compfn.hpp"

#include <doctest.h>

#include <cmath>

using namespace ioslab;
using testing::error_kind;

TEST_CASE("construction rejects malformed knot tables") {
    CHECK(error_kind([] { ComparisonFunction({{0, 0}}, GainClass::K); }) == ErrorKind::Usage);
    CHECK(error_kind([] { ComparisonFunction({{0, 1}, {1, 2}}, GainClass::K); }) == ErrorKind::Usage);
    CHECK(error_kind([] { ComparisonFunction({{0, 0}, {1, 1}, {1, 2}}, GainClass::K); }) == ErrorKind::Usage);
    CHECK(error_kind([] { ComparisonFunction({{0, 0}, {1, 1}, {2, 1}}, GainClass::K); }) == ErrorKind::Usage);
    CHECK(error_kind([] { ComparisonFunction({{0, 0}, {1, 1}}, GainClass::KInfinity, 0.0); }) == ErrorKind::Usage);
    CHECK_FALSE(error_kind([] { ComparisonFunction({{0, 0}, {1, 1}}, GainClass::K, 0.0); }));
}

TEST_CASE("evaluation, tail and domain") {
    const ComparisonFunction f({{0, 0}, {1, 2}, {3, 3}}, GainClass::KInfinity);
    CHECK(f(0.0) == 0.0);
    CHECK(f(0.5) == doctest::Approx(1.0));
    CHECK(f(2.0) == doctest::Approx(2.5));
    CHECK(f(5.0) == doctest::Approx(4.0));  // tail slope defaults to the last segment's 0.5
    CHECK(error_kind([&] { f(-1e-9); }) == ErrorKind::Domain);
    CHECK(ComparisonFunction::identity()(7.25) == 7.25);
    CHECK(ComparisonFunction::linear(3.0)(2.0) == doctest::Approx(6.0));
}

TEST_CASE("bounded class-K functions") {
    const ComparisonFunction sat({{0, 0}, {1, 1}}, GainClass::K, 0.0);
    CHECK(sat.bounded());
    CHECK(sat.supremum() == 1.0);
    CHECK(sat(10.0) == 1.0);
    CHECK(sat.inverse(0.5) == doctest::Approx(0.5));
    CHECK(error_kind([&] { sat.inverse(1.5); }) == ErrorKind::Range);
    CHECK(error_kind([&] { sat.inverse_function(); }) == ErrorKind::Precondition);
    const auto p = sat.promoted();
    CHECK_FALSE(p.bounded());
    CHECK(p(3.0) == doctest::Approx(3.0));
}

TEST_CASE("inverse function undoes evaluation") {
    const ComparisonFunction f({{0, 0}, {0.5, 2}, {4, 3}}, GainClass::KInfinity, 0.25);
    const auto g = f.inverse_function();
    for (double s : {0.0, 0.1, 0.5, 1.0, 4.0, 10.0, 1e4}) {
        CHECK(g(f(s)) == doctest::Approx(s).epsilon(1e-12));
        CHECK(f.inverse(f(s)) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("composition matches pointwise nesting") {
    const ComparisonFunction outer({{0, 0}, {1, 3}, {2, 3.5}, {10, 4}}, GainClass::KInfinity, 2.0);
    const ComparisonFunction inner({{0, 0}, {0.3, 0.9}, {1.7, 1.2}, {5, 9}}, GainClass::KInfinity, 0.5);
    const auto c = compose(outer, inner);
    for (double s = 0.0; s < 60.0; s += 0.0137) CHECK(c(s) == doctest::Approx(outer(inner(s))).epsilon(1e-12));
}

TEST_CASE("pointwise max dominates both arguments exactly") {
    const ComparisonFunction a({{0, 0}, {1, 2}, {2, 2.5}}, GainClass::KInfinity, 0.1);
    const auto b = ComparisonFunction::identity();
    const auto m = ComparisonFunction::pointwise_max(a, b);
    for (double s = 0.0; s < 40.0; s += 0.01) CHECK(m(s) == doctest::Approx(std::max(a(s), b(s))).epsilon(1e-12));
}

TEST_CASE("JSON round trip") {
    const ComparisonFunction f({{0, 0}, {1, 2}, {3, 3}}, GainClass::KInfinity, 0.7, "gamma");
    const auto g = ComparisonFunction::from_json(f.to_json());
    CHECK(g.cls() == GainClass::KInfinity);
    CHECK(g.args() == f.args());
    CHECK(g.values() == f.values());
    CHECK(g.tail_slope() == f.tail_slope());
    CHECK(g.description() == "gamma");
    CHECK(error_kind([] { ComparisonFunction::from_json(Json{{"class", "L"}, {"knots", Json::array()}}); }) ==
          ErrorKind::Usage);

    const auto e = KLSurface::exponential(2.0, 0.5);
    const auto e2 = KLSurface::from_json(e.to_json());
    CHECK(e2(3.0, 1.0) == doctest::Approx(e(3.0, 1.0)));
}

TEST_CASE("KL grids are raised to monotone surfaces") {
    // rows: r = 0, 1, 2; columns t = 0, 1, 2; the middle row dips below its successor in t
    const auto b = KLSurface::grid({0, 1, 2}, {0, 1, 2}, {{0, 0, 0}, {1, 0.2, 0.5}, {0.5, 0.4, 0.1}});
    CHECK(b(1, 1) == doctest::Approx(0.5));   // suffix max in t
    CHECK(b(2, 0) == doctest::Approx(1.0));   // prefix max in r
    CHECK(b(0.5, 0) == doctest::Approx(0.5)); // bilinear
    CHECK(b(4, 0) == doctest::Approx(2.0));   // proportional in r
    CHECK(b(1, 3) == doctest::Approx(0.5 * std::exp(-1.0)));
    CHECK(error_kind([] { KLSurface::grid({0, 1}, {0, 1}, {{0.1, 0}, {1, 0.5}}); }) == ErrorKind::Usage);
    CHECK(error_kind([] { KLSurface::grid({0, 1}, {0, 1}, {{0, 0}, {1, 0.5}}, 1.0, 0.1); }) == ErrorKind::Usage);
    CHECK(error_kind([&] { b(-1, 0); }) == ErrorKind::Domain);
}

TEST_CASE("settling time map for the exponential surface") {
    const auto T = settling_time_map(KLSurface::exponential(1.0, 1.0));
    CHECK(T(2.0, 0.5) == doctest::Approx(oracle::settling_exp(2.0, 0.5)).epsilon(1e-9));
    CHECK(T.hat(0.5, 1.0) == 0.0);  // already below
    CHECK(T.hat(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(error_kind([&] { T(1.0, 0.0); }) == ErrorKind::Domain);

    const auto slow = settling_time_map(KLSurface::exponential(1.0, 1e-9));
    CHECK(error_kind([&] { slow(1.0, 0.5); }) == ErrorKind::Horizon);

    const auto tab = T.tabulate({0.1, 1.0, 10.0}, {0.01, 0.1, 1.0});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(tab.values[i][j] == doctest::Approx(oracle::settling_exp(tab.r[i], tab.s[j])).epsilon(1e-8));
}

TEST_CASE("time dilation keeps the dilated bound above min{sigma, beta}") {
    const auto sigma = ComparisonFunction::linear(2.0);
    const auto beta = KLSurface::exponential(1.0, 1.0);
    DilationOptions opt;
    opt.r_nodes = 80;
    opt.s_nodes = 40;
    opt.t_nodes = 80;
    const auto res = kl_time_dilation(sigma, beta, opt);
    CHECK(res.gamma_hat.cls() == GainClass::KInfinity);
    // independent spot checks, off the construction grid
    for (double r : {0.013, 0.4, 1.7, 6.3, 9.9})
        for (double s : {0.02, 0.3, 2.2, 7.7})
            for (double t : {0.0, 0.05, 1.3, 4.4, 17.0})
                CHECK(std::min(sigma(s), beta(r, t)) <= res.beta_hat(s, t / (1.0 + res.gamma_hat(r))) + 1e-12);
}

TEST_CASE("spacing helpers") {
    const auto l = linspace(-1, 1, 5);
    CHECK(l == std::vector<double>{-1, -0.5, 0, 0.5, 1});
    const auto g = logspace(1e-3, 1e3, 7);
    CHECK(g.front() == doctest::Approx(1e-3));
    CHECK(g.back() == doctest::Approx(1e3));
    CHECK(g[3] == doctest::Approx(1.0));
}
