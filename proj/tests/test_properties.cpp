// Seeded randomized checks of structural invariants.

#include "helpers.hpp"

#include "ioslab/compfn.hpp"
#include "ioslab/estimators.hpp"
#include "ioslab/examples.hpp"
#include "ioslab/redefine.hpp"
#include "ioslab/smallgain.hpp"
#include "ioslab/sysmodel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ioslab;

namespace {

std::mt19937_64& rng() {
    static std::mt19937_64 gen(20261016);
    return gen;
}

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

ComparisonFunction random_gain(GainClass cls = GainClass::KInfinity) {
    const int knots = 2 + static_cast<int>(uniform(0, 6));
    std::vector<std::pair<double, double>> k{{0.0, 0.0}};
    double s = 0.0, v = 0.0;
    for (int i = 1; i < knots; ++i) {
        s += std::exp(uniform(-4, 2));
        v += std::exp(uniform(-4, 2));
        k.emplace_back(s, v);
    }
    const double tail = cls == GainClass::KInfinity ? std::exp(uniform(-3, 2)) : 0.0;
    return ComparisonFunction(k, cls, tail);
}

KLSurface random_grid_beta() {
    const int nr = 4, nt = 6;
    std::vector<double> r{0.0}, t{0.0};
    for (int i = 1; i < nr; ++i) r.push_back(r.back() + uniform(0.1, 2.0));
    for (int j = 1; j < nt; ++j) t.push_back(t.back() + uniform(0.1, 2.0));
    std::vector<std::vector<double>> vals(nr, std::vector<double>(nt, 0.0));
    for (int i = 1; i < nr; ++i)
        for (int j = 0; j < nt; ++j) vals[i][j] = uniform(0.0, 3.0) * r[i] * std::exp(-t[j]);
    return KLSurface::grid(r, t, vals, uniform(0.2, 2.0));
}

double final_state_error(const ControlSystem& sys, const Vec& xi, const InputSignal& u, double horizon, double step,
                         const Vec& reference) {
    IntegratorOptions opt;
    opt.step = step;
    opt.refinement = Refinement::Off;
    const auto traj = simulate(sys, xi, u, horizon, opt);
    const auto x = traj.state(traj.size() - 1);
    double e = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) e = std::max(e, std::abs(x[i] - reference[i]));
    return e;
}

}  // namespace

TEST_CASE("comparison functions: inverse at knots, monotonicity, zero at zero") {
    for (int trial = 0; trial < 200; ++trial) {
        const auto g = random_gain(trial % 3 == 0 ? GainClass::K : GainClass::KInfinity);
        CHECK(g(0.0) == 0.0);
        for (double s : g.args()) CHECK(std::abs(g.inverse(g(s)) - s) <= 1e-12 * std::max(1.0, s));
        double prev = -1.0;
        for (double s = 0.0; s < 2.0 * g.args().back() + 1.0; s += 0.01 * g.args().back()) {
            const double v = g(s);
            if (g.bounded()) CHECK(v >= prev);
            else CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("composition and pointwise max agree with pointwise evaluation") {
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_gain(), b = random_gain();
        const auto c = compose(a, b);
        const auto m = ComparisonFunction::pointwise_max(a, b);
        for (int k = 0; k < 50; ++k) {
            const double s = std::exp(uniform(-6, 4));
            CHECK(c(s) == doctest::Approx(a(b(s))).epsilon(1e-10));
            CHECK(m(s) == doctest::Approx(std::max(a(s), b(s))).epsilon(1e-10));
        }
    }
}

TEST_CASE("ingested KL grids are monotone at every adjacent pair") {
    for (int trial = 0; trial < 100; ++trial) {
        const auto b = random_grid_beta();
        const auto* g = b.as_grid();
        REQUIRE(g);
        for (std::size_t i = 0; i < g->r.size(); ++i)
            for (std::size_t j = 0; j < g->t.size(); ++j) {
                if (i > 0) CHECK(g->values[i][j] >= g->values[i - 1][j]);
                if (j > 0) CHECK(g->values[i][j] <= g->values[i][j - 1]);
            }
        for (double t : g->t) CHECK(b(0.0, t) == 0.0);
    }
}

TEST_CASE("settling time map: strict settling and monotonicity") {
    for (int trial = 0; trial < 20; ++trial) {
        const auto beta = trial % 2 ? KLSurface::exponential(uniform(0.2, 5), uniform(0.1, 3)) : random_grid_beta();
        const auto T = settling_time_map(beta);
        const auto rs = logspace(1e-3, 1e2, 15), ss = logspace(1e-3, 1e2, 15);
        for (std::size_t i = 0; i < rs.size(); ++i)
            for (std::size_t j = 0; j < ss.size(); ++j) {
                const double v = T(rs[i], ss[j]);
                CHECK(beta(rs[i], v) < ss[j]);
                if (i > 0) CHECK(v > T(rs[i - 1], ss[j]));
                if (j > 0) CHECK(v < T(rs[i], ss[j - 1]));
            }
    }
}

TEST_CASE("time dilation for random gains") {
    for (int trial = 0; trial < 3; ++trial) {
        const auto sigma = random_gain();
        const auto beta = random_grid_beta();
        DilationOptions opt;
        opt.r_nodes = 60;
        opt.s_nodes = 30;
        opt.t_nodes = 60;
        const auto res = kl_time_dilation(sigma, beta, opt);  // verifies a 20³ grid internally
        for (int k = 0; k < 500; ++k) {
            const double r = uniform(0, opt.r_max), s = uniform(1e-3, opt.s_max), t = uniform(0, opt.t_max);
            CHECK(std::min(sigma(s), beta(r, t)) <= res.beta_hat(s, t / (1.0 + res.gamma_hat(r))) + 1e-12);
        }
    }
}

TEST_CASE("step halving shows fourth-order convergence on smooth segments") {
    struct Case {
        ControlSystem sys;
        Vec xi;
        InputSignal u;
        double horizon;
    };
    std::vector<Case> cases{
        {build_sys11(), {1.0, -0.5}, InputSignal::constant({0.3}), 2.0},
        {build_sys12(), {2.0, 1.0}, InputSignal::constant({-0.7}), 2.0},
        {build_pid_example().system, {0.0, 0.0, 0.0, 1.0}, InputSignal::none(), 2.0},
        // |y| > 5 throughout: ρ = -1 and σ = 1, a smooth regime
        {build_sys29(), {10.0, 30.0}, InputSignal::constant({0.0}), 0.3},
        {build_sys31(), {10.0, 30.0}, InputSignal::none(), 0.3},
    };
    for (const auto& c : cases) {
        IntegratorOptions fine;
        fine.step = 1e-4;
        fine.refinement = Refinement::Off;
        const auto ref_traj = simulate(c.sys, c.xi, c.u, c.horizon, fine);
        const auto rx = ref_traj.state(ref_traj.size() - 1);
        const Vec ref(rx.begin(), rx.end());
        const double e1 = final_state_error(c.sys, c.xi, c.u, c.horizon, 0.1, ref);
        const double e2 = final_state_error(c.sys, c.xi, c.u, c.horizon, 0.05, ref);
        INFO(c.sys.name());
        CHECK(e1 / e2 >= 8.0);
    }
}

TEST_CASE("semigroup: restarting mid-way with the shifted input reproduces the end state") {
    const auto sys = build_sys11();
    const InputSignal u({0.0, 0.7, 1.9}, {{0.4}, {-1.0}, {0.25}});
    const double step = 0.01;
    const auto full = simulate(sys, Vec{0.3, -1.2}, u, 3.0, step);
    const auto first = simulate(sys, Vec{0.3, -1.2}, u, 1.0, step);
    const auto mid = first.state(first.size() - 1);
    const auto second = simulate(sys, Vec(mid.begin(), mid.end()), u.shifted(1.0), 2.0, step);
    const auto a = full.state(full.size() - 1), b = second.state(second.size() - 1);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(a[i] - b[i]) <= 10.0 * std::pow(step, 5));
}

TEST_CASE("closed loop equals the open loop driven by the recorded effective input, step by step") {
    const FeedbackLoop loop(build_sys12(), ComparisonFunction::linear(0.4));
    const double step = 1e-5;
    IntegratorOptions opt;
    opt.step = step;
    const auto traj = simulate_closed_loop(loop, Vec{1.0, 2.0}, InputSignal::constant({-0.8}, true), 0.01, opt);
    Integrator open(loop.base(), opt);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        const auto xk = traj.state(k);
        Vec x(xk.begin(), xk.end());
        open.advance(x, traj.input(k), traj.times[k + 1] - traj.times[k]);
        const auto next = traj.state(k + 1);
        for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(x[i] - next[i]));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("trajectory invariants: outputs are h(states), incomplete means beyond the threshold") {
    const auto sys = build_sys12();
    const auto traj = simulate(sys, Vec{0.5, -2.0}, InputSignal::constant({1.0}), 1.0, 0.01);
    for (std::size_t k = 0; k < traj.size(); ++k) CHECK(sys.output(traj.state(k))[0] == traj.output(k)[0]);
    IntegratorOptions opt;
    opt.step = 0.01;
    opt.blowup_threshold = 1e6;
    const auto esc = simulate(testing::finite_escape(), Vec{2.0}, InputSignal::zero(1), 1.0, opt);
    REQUIRE_FALSE(esc.complete());
    CHECK(esc.state_norm(esc.size() - 1) > opt.blowup_threshold);
}

TEST_CASE("feedback loop: zero output switches the input off; the origin is an equilibrium") {
    const FeedbackLoop loop(build_sys29(), ComparisonFunction::identity());
    for (int k = 0; k < 50; ++k) {
        const Vec x{uniform(-20, 20), 0.0};
        const Vec d{uniform(-1, 1)};
        CHECK(loop.system().rhs(x, d) == loop.base().rhs(x, Vec{0.0}));
        CHECK(loop.system().rhs(Vec{0.0, 0.0}, d) == Vec{0.0, 0.0});
    }
}

TEST_CASE("estimates: determinism, verdict consistency, monotone grids, sound witnesses") {
    const auto sys = build_sys11();
    EstimateGains g;
    g.beta = KLSurface::exponential(1.2, 1.0);
    g.gamma = ComparisonFunction::linear(1.2);
    SampleGrid small;
    small.radii = {0.5, 1.5};
    small.states_per_radius = 3;
    small.levels = {0.5, 1.0};
    small.random_inputs = 2;
    small.horizon = 6.0;
    small.integrator.step = 0.01;
    const auto a = verify_estimate(sys, PropertyKind::IOS, g, small);
    const auto b = verify_estimate(sys, PropertyKind::IOS, g, small);
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK((a.worst_margin < 0.0) == a.witness.has_value());

    SampleGrid big = small;
    big.levels = {0.5, 1.0, 2.0};
    big.extra_states = {{1.0, 0.0}, {0.0, 2.0}};
    const auto c = verify_estimate(sys, PropertyKind::IOS, g, big);
    CHECK(c.worst_margin <= a.worst_margin);
    CHECK((c.worst_margin < 0.0) == c.witness.has_value());

    for (const auto* r : {&a, &c}) {
        if (!r->witness) continue;
        const auto& w = *r->witness;
        const auto u = InputSignal::from_json(w.input);
        const auto traj = simulate(sys, w.xi, u, small.horizon, small.integrator);
        double observed = 0.0;
        for (std::size_t k = 0; k < traj.size(); ++k)
            if (std::abs(traj.times[k] - w.t) < 1e-12) observed = traj.output_norm(k);
        const double bound = std::max((*g.beta)(euclidean_norm(w.xi), w.t), (*g.gamma)(sup_norm(u, small.horizon)));
        CHECK(observed - bound >= -r->worst_margin - 1e-9);
    }
}

TEST_CASE("empirical beta passes its own zero-input IOS check") {
    const auto sys = build_sys12();
    SampleGrid grid;
    grid.radii = {0.5, 1.0, 3.0};
    grid.states_per_radius = 3;
    grid.horizon = 8.0;
    grid.integrator.step = 0.01;
    grid.inputs = {InputSignal::zero(1)};
    EstimateGains g;
    g.beta = fit_empirical_beta(sys, grid);
    g.gamma = ComparisonFunction::linear(1e6);
    const auto r = verify_estimate(sys, PropertyKind::IOS, g, grid);
    CHECK(r.holds());
    CHECK(r.worst_margin >= 0.0);
}

TEST_CASE("h0: clamp, monotone search and horizon soundness") {
    const auto sys = build_sys11();
    RedefinitionConfig base(ComparisonFunction::linear(2.0 * std::sqrt(2.0)), KLSurface::exponential(2.0, 1.0));
    base.search.segments = 2;
    base.search.levels = 3;
    base.search.random_restarts = 4;
    RedefinitionConfig richer = base;
    richer.search.levels = 5;  // {-c, 0, c} ⊂ {-c, -c/2, 0, c/2, c}
    for (int k = 0; k < 6; ++k) {
        const Vec xi{uniform(-1.5, 1.5), uniform(-1.5, 1.5)};
        const auto r = compute_h0_detailed(sys, base, xi);
        CHECK(r.value >= 0.0);
        CHECK(r.value >= sys.output_norm(xi) - 1e-15);
        CHECK(base.beta(euclidean_norm(xi), r.final_horizon) < std::max(r.value, base.eps0) / 2.0);
        CHECK(compute_h0(sys, richer, xi) >= r.value);
    }
}

TEST_CASE("certificate margin is about an eighth of sigma1 inverse") {
    for (int trial = 0; trial < 30; ++trial) {
        const auto s1 = random_gain(), s2 = random_gain();
        const auto cert = construct_lambda(s1, s2);
        for (double s : cert.grid) {
            const double quarter = 0.25 * cert.sigma1.inverse(s);
            CHECK(cert.sigma2(cert.lambda(s)) < quarter);
            CHECK(quarter - cert.sigma2(cert.lambda(s)) >= 0.125 * cert.sigma1.inverse(s) * (1.0 - 1e-9));
        }
    }
}

TEST_CASE("Francis equations on random Hurwitz data") {
    for (int trial = 0; trial < 30; ++trial) {
        const int nz = 2 + trial % 3, nw = 1 + trial % 2;
        LinearRegulatorProblem p;
        p.A = Eigen::MatrixXd::Random(nz, nz) - 3.0 * Eigen::MatrixXd::Identity(nz, nz);
        p.S = Eigen::MatrixXd::Random(nw, nw) * 0.1;
        p.P = Eigen::MatrixXd::Random(nz, nw);
        p.C = Eigen::MatrixXd::Random(1, nz);
        p.Q = -p.C * Eigen::MatrixXd::Random(nz, nw);  // generally inconsistent with the solved Π
        const auto r = solve_francis(p);
        CHECK(r.sylvester_residual <= 1e-10);
        if (r.verdict == FrancisVerdict::Solved) CHECK(r.regulation_residual <= 1e-10);
        else CHECK(r.verdict == FrancisVerdict::RegulationConditionFails);
    }
}

TEST_CASE("transition and bump profiles stay in range") {
    for (int k = 0; k < 2000; ++k) {
        const double s = uniform(-5, 5);
        const double v = transition(s);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (s > -2.0 && s < 0.0) CHECK(v > 0.0);
        CHECK(switching(uniform(-50, 50), uniform(-50, 50)) > 0.0);
    }
}
