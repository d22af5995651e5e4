#include "ioslab/examples.hpp"

#include "ioslab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ioslab {

namespace {

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

double smoothstep(double w) {
    if (w <= 0.0) return 0.0;
    if (w >= 1.0) return 1.0;
    return w * w * w * (10.0 + w * (-15.0 + 6.0 * w));
}

}  // namespace

// ---------------------------------------------------------------- Francis equations

std::string_view to_string(FrancisVerdict verdict) {
    switch (verdict) {
        case FrancisVerdict::Solved: return "solved";
        case FrancisVerdict::NoSolution: return "no-solution";
        case FrancisVerdict::RegulationConditionFails: return "regulation-condition-fails";
    }
    return "?";
}

Json FrancisResult::to_json() const {
    return Json{{"verdict", std::string(to_string(verdict))},
                {"Pi", matrix_json(Pi)},
                {"sylvester_residual", sylvester_residual},
                {"regulation_residual", regulation_residual},
                {"unique", unique}};
}

FrancisResult solve_francis(const LinearRegulatorProblem& prob, double tolerance) {
    const auto nz = prob.A.rows();
    const auto nw = prob.S.rows();
    if (prob.A.cols() != nz || prob.S.cols() != nw || prob.P.rows() != nz || prob.P.cols() != nw ||
        prob.C.cols() != nz || prob.Q.rows() != prob.C.rows() || prob.Q.cols() != nw)
        throw Error(ErrorKind::Usage, "inconsistent regulator problem dimensions");

    // vec(ΠS − AΠ) = (Sᵀ ⊗ I − I ⊗ A) vec(Π), column-major vec
    const Eigen::Index dim = nz * nw;
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index j = 0; j < nw; ++j)
        for (Eigen::Index k = 0; k < nw; ++k) {
            op.block(j * nz, k * nz, nz, nz) += prob.S(k, j) * Eigen::MatrixXd::Identity(nz, nz);
            if (j == k) op.block(j * nz, k * nz, nz, nz) -= prob.A;
        }
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(prob.P.data(), dim);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(op);
    const Eigen::VectorXd sol = cod.solve(rhs);

    FrancisResult result;
    result.Pi = Eigen::Map<const Eigen::MatrixXd>(sol.data(), nz, nw);
    result.unique = cod.rank() == dim;
    result.sylvester_residual = (result.Pi * prob.S - prob.A * result.Pi - prob.P).norm();
    result.regulation_residual = (prob.C * result.Pi + prob.Q).norm();
    const double scale = std::max(1.0, prob.P.norm());
    if (result.sylvester_residual > tolerance * scale) result.verdict = FrancisVerdict::NoSolution;
    else if (result.regulation_residual > tolerance * std::max(1.0, prob.Q.norm()))
        result.verdict = FrancisVerdict::RegulationConditionFails;
    else result.verdict = FrancisVerdict::Solved;
    return result;
}

PidExample build_pid_example() {
    LinearRegulatorProblem prob;
    prob.A.resize(3, 3);
    prob.A << 0, 1, 0, 0, 0, 1, -1, -1, -2;
    prob.P.resize(3, 1);
    prob.P << 0, 0, 1;
    prob.S = Eigen::MatrixXd::Zero(1, 1);
    prob.C.resize(1, 3);
    prob.C << 0, 1, 0;
    prob.Q = Eigen::MatrixXd::Zero(1, 1);
    Dynamics f = [](std::span<const double> x, std::span<const double>, std::span<double> dx) {
        dx[0] = x[1];
        dx[1] = x[2];
        dx[2] = -x[0] - x[1] - 2.0 * x[2] + x[3];
        dx[3] = 0.0;
    };
    OutputMap h = [](std::span<const double> x, std::span<double> y) { y[0] = x[1]; };
    return {ControlSystem("pid", 4, 0, 1, std::move(f), std::move(h)), std::move(prob)};
}

// ---------------------------------------------------------------- linear gains

Eigen::MatrixXd expm(const Eigen::MatrixXd& M) {
    const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const Eigen::MatrixXd X = M / std::ldexp(1.0, squarings);
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(M.rows(), M.cols());
    Eigen::MatrixXd term = result;
    for (int k = 1; k <= 30; ++k) {
        term = term * X / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18 * std::max(1.0, result.cwiseAbs().maxCoeff())) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

bool is_hurwitz(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    return (es.eigenvalues().real().array() < 0.0).all();
}

LinearGains linear_gain_functions(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, double horizon,
                                  double resolution) {
    if (A.rows() != A.cols() || C.cols() != A.rows()) throw Error(ErrorKind::Usage, "A and C dimensions disagree");
    if (!(horizon > 0.0) || !(resolution > 0.0)) throw Error(ErrorKind::Usage, "horizon and resolution must be positive");
    if (!is_hurwitz(A)) throw Error(ErrorKind::Precondition, "A is not Hurwitz");
    const double c_norm = spectral_norm(C);
    if (!(c_norm > 0.0)) throw Error(ErrorKind::Precondition, "C must be nonzero");

    auto steps = static_cast<std::size_t>(std::ceil(horizon / resolution - 1e-9));
    steps += steps % 2;  // even, so H/2 is a grid point
    const double dt = horizon / static_cast<double>(steps);
    const Eigen::MatrixXd step = expm(dt * A);
    const Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    const double growth = std::exp(dt * std::max(0.0, es.eigenvalues().maxCoeff()));

    std::vector<double> norms(steps + 1);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    for (std::size_t j = 0; j <= steps; ++j) {
        norms[j] = spectral_norm(power);
        power = power * step;
    }
    const std::size_t half = steps / 2;
    const double q = norms[half];
    if (!(q < 1.0)) throw Error(ErrorKind::Precondition, "horizon too short: |e^{(H/2)A}| is not below 1",
                                Json{{"horizon", horizon}, {"factor", q}});
    double sup_half = 0.0;  // bound on |e^{tA}| over [0, H/2]
    for (std::size_t j = 0; j <= half; ++j) sup_half = std::max(sup_half, norms[j] * growth);

    // env[j] bounds |e^{tA}| on [t_{j-1}, ∞); the t ≥ H part uses
    // |e^{tA}| ≤ q^{⌊t/(H/2)⌋}·sup_half.
    std::vector<double> env(steps + 1);
    env[0] = norms[0];
    for (std::size_t j = 1; j <= steps; ++j) env[j] = norms[j - 1] * growth;
    env[steps] = std::max(env[steps], q * sup_half);
    for (std::size_t j = steps; j-- > 0;) env[j] = std::max(env[j], env[j + 1]);

    std::vector<double> t_grid(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) t_grid[j] = static_cast<double>(j) * dt;
    t_grid.back() = horizon;
    std::vector<double> row(env);
    for (double& v : row) v /= c_norm;
    const double tail_rate = std::log(1.0 / q) / (0.5 * horizon);
    KLSurface beta = KLSurface::grid({0.0, 1.0}, t_grid, {std::vector<double>(steps + 1, 0.0), row}, tail_rate);
    return LinearGains{ComparisonFunction::linear(1.0 / c_norm).with_description("chi"), std::move(beta),
                       ComparisonFunction::linear(env[0]).with_description("sigma"), env[0], q};
}

// ---------------------------------------------------------------- textbook systems

double saturation(double s) { return std::clamp(s, -1.0, 1.0); }

double transition(double s) {
    if (s >= 0.0) return 1.0;
    if (s <= -2.0) return 0.0;
    return smoothstep((s + 2.0) / 2.0);
}

double switching(double x, double y) {
    const double s0 = transition(std::abs(y) - 4.0);
    return s0 + (1.0 - s0) * (1.0 / std::numbers::pi + std::abs(y)) / std::max(1.0, std::abs(x));
}

ControlSystem build_sys11() {
    Dynamics f = [](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
        dx[0] = -x[0] + x[1] + u[0];
        dx[1] = -x[0] - x[1] + u[0];
    };
    OutputMap h = [](std::span<const double> x, std::span<double> y) { y[0] = x[1]; };
    return ControlSystem("sys11", 2, 1, 1, std::move(f), std::move(h));
}

ControlSystem build_sys12() {
    Dynamics f = [](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
        dx[0] = 0.0;
        dx[1] = -(2.0 * x[1] + u[0]) / (1.0 + x[0] * x[0]);
    };
    OutputMap h = [](std::span<const double> x, std::span<double> y) { y[0] = x[1]; };
    return ControlSystem("sys12", 2, 1, 1, std::move(f), std::move(h));
}

namespace {

constexpr int kGuardCount = 10;

// ρ and max{1,|x|} have kinks at |y| = 3, 5 and |x| = 1; σ₀ switches at |y| = 2, 4.
void counterexample_guards(std::span<const double> x, std::span<double> g) {
    const double levels[4] = {2.0, 3.0, 4.0, 5.0};
    for (int i = 0; i < 4; ++i) {
        g[2 * i] = x[1] - levels[i];
        g[2 * i + 1] = x[1] + levels[i];
    }
    g[8] = x[0] - 1.0;
    g[9] = x[0] + 1.0;
}

// ẋ = a·x − yσ, ẏ = a·y + xσ with a = ρ(arg)
void rotate_scale(std::span<const double> x, double arg, std::span<double> dx) {
    const double a = saturation(arg);
    const double s = switching(x[0], x[1]);
    dx[0] = a * x[0] - x[1] * s;
    dx[1] = a * x[1] + x[0] * s;
}

OutputMap second_coordinate() {
    return [](std::span<const double> x, std::span<double> y) { y[0] = x[1]; };
}

}  // namespace

ControlSystem build_sys29() {
    Dynamics f = [](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
        rotate_scale(x, std::abs(u[0]) - 1.0 - std::abs(x[1]), dx);
    };
    return ControlSystem("sys29", 2, 1, 1, std::move(f), second_coordinate(), kGuardCount, counterexample_guards);
}

ControlSystem build_sys31() {
    Dynamics f = [](std::span<const double> x, std::span<const double>, std::span<double> dx) {
        rotate_scale(x, 4.0 - std::abs(x[1]), dx);
    };
    return ControlSystem("sys31", 2, 0, 1, std::move(f), second_coordinate(), kGuardCount, counterexample_guards);
}

IntegratorOptions counterexample_integrator(double step) {
    IntegratorOptions opt;
    opt.step = step;
    opt.blowup_threshold = 1e30;
    opt.refinement = Refinement::Auto;
    return opt;
}

// ---------------------------------------------------------------- counterexample

CounterexampleParams::CounterexampleParams(std::vector<Annulus> annuli) : annuli_(std::move(annuli)) {
    if (annuli_.empty()) throw Error(ErrorKind::Usage, "counterexample needs at least one annulus");
    for (std::size_t k = 0; k < annuli_.size(); ++k) {
        const auto& a = annuli_[k];
        if (!(a.inner > 0.0) || !(a.outer > a.inner)) throw Error(ErrorKind::Usage, "annulus radii must increase");
        if (k > 0 && !(a.inner > annuli_[k - 1].outer))
            throw Error(ErrorKind::Usage, "annuli must be disjoint and increasing");
    }
    knots_.push_back(0.5 * annuli_.front().inner);
    levels_.push_back(0.0);
    for (std::size_t k = 0; k < annuli_.size(); ++k) {
        knots_.push_back(annuli_[k].inner);
        levels_.push_back(1.0);
        knots_.push_back(annuli_[k].outer);
        levels_.push_back(1.0);
        knots_.push_back(r_double_prime(k + 1));
        levels_.push_back(0.0);
    }
}

double CounterexampleParams::r_double_prime(std::size_t k) const {
    if (k < 1 || k > annuli_.size()) throw Error(ErrorKind::Usage, "annulus index out of range");
    if (k == annuli_.size()) return 2.0 * annuli_.back().outer;
    return 0.5 * (annuli_[k - 1].outer + annuli_[k].inner);
}

double CounterexampleParams::phi_radial(double radius) const {
    if (radius <= knots_.front() || radius >= knots_.back()) return 0.0;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), radius);
    const auto i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double w = (radius - knots_[i]) / (knots_[i + 1] - knots_[i]);
    return levels_[i] + (levels_[i + 1] - levels_[i]) * smoothstep(w);
}

double CounterexampleParams::phi(double x, double y) const { return phi_radial(std::hypot(x, y)); }

Json CounterexampleParams::to_json() const {
    Json annuli = Json::array();
    for (std::size_t k = 0; k < annuli_.size(); ++k) {
        const auto& a = annuli_[k];
        annuli.push_back(Json{{"r", a.inner},
                              {"r_prime", a.outer},
                              {"r_double_prime", r_double_prime(k + 1)},
                              {"z", to_json_array(a.z)},
                              {"loop_time", a.loop_time},
                              {"return_radius", a.return_radius}});
    }
    return Json{{"annuli", annuli},
                {"sigma0", "smoothstep 6w^5 - 15w^4 + 10w^3, w = (s + 2)/2 on [-2, 0]"},
                {"phi", "radial smoothstep profile"}};
}

std::vector<Crossing> measure_line_crossings(const Trajectory& traj) {
    if (traj.n != 2) throw Error(ErrorKind::Usage, "line crossings need a planar trajectory");
    std::vector<Crossing> out;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const auto a = traj.state(k - 1);
        const auto b = traj.state(k);
        const double ga = a[1] - 4.0, gb = b[1] - 4.0;
        if ((ga < 0.0) == (gb < 0.0) || !(a[0] > 0.0 && b[0] > 0.0)) continue;
        const double w = ga / (ga - gb);
        const double t = traj.times[k - 1] + w * (traj.times[k] - traj.times[k - 1]);
        if (!(t > 0.0)) continue;
        Vec p{a[0] + w * (b[0] - a[0]), 4.0};
        const double r = euclidean_norm(p);
        out.push_back(Crossing{t, std::move(p), r});
    }
    return out;
}

namespace {

// One loop of sys31 from z: first return time and the radius range on [0, T].
Annulus trace_loop(const ControlSystem& sys31, const Vec& z, double step) {
    const double limit = 18.0 * std::numbers::pi;
    const auto traj = simulate(sys31, z, InputSignal::none(), limit + 2.0, counterexample_integrator(step));
    if (!traj.complete())
        throw Error(ErrorKind::Construction, "loop left the representable range", Json{{"z", to_json_array(z)}});
    const auto crossings = measure_line_crossings(traj);
    if (crossings.empty() || crossings.front().t > limit)
        throw Error(ErrorKind::Construction, "loop did not return to the line within the time bound",
                    Json{{"z", to_json_array(z)}, {"bound", limit}});
    const auto& c = crossings.front();
    Annulus a;
    a.z = z;
    a.loop_time = c.t;
    a.return_radius = c.radius;
    a.inner = a.outer = euclidean_norm(z);
    for (std::size_t k = 0; k < traj.size() && traj.times[k] <= c.t; ++k) {
        const double r = traj.state_norm(k);
        a.inner = std::min(a.inner, r);
        a.outer = std::max(a.outer, r);
    }
    a.inner = std::min(a.inner, c.radius);
    a.outer = std::max(a.outer, c.radius);
    return a;
}

Vec point_on_line(double radius) { return {std::sqrt(radius * radius - 16.0), 4.0}; }

}  // namespace

CounterexampleParams construct_counterexample_ubibs(const CounterexampleOptions& options) {
    if (options.count < 1) throw Error(ErrorKind::Usage, "need at least one annulus");
    if (!(options.seed_radius > 4.0)) throw Error(ErrorKind::Usage, "seed radius must exceed 4");
    const ControlSystem sys31 = build_sys31();
    std::vector<Annulus> annuli;
    double candidate = options.seed_radius;
    for (int k = 0; k < options.count; ++k) {
        Annulus a;
        bool placed = false;
        for (int attempt = 0; attempt < options.max_candidates; ++attempt) {
            const Vec z = k == 0 ? Vec{options.seed_radius, 4.0} : point_on_line(candidate);
            a = trace_loop(sys31, z, options.step);
            if (k == 0) {
                // the seed must be large enough for the radius to grow by e^{2π} per loop
                if (a.return_radius < 0.95 * euclidean_norm(z) * std::exp(2.0 * std::numbers::pi))
                    throw Error(ErrorKind::Construction, "seed radius too small for the loop growth",
                                Json{{"seed", options.seed_radius}, {"return_radius", a.return_radius}});
                placed = true;
                break;
            }
            if (a.inner > annuli.back().outer) {
                placed = true;
                break;
            }
            candidate *= 1.5;
        }
        if (!placed)
            throw Error(ErrorKind::Construction, "could not place a disjoint annulus", Json{{"index", k + 1}});
        annuli.push_back(a);
        candidate = a.outer * std::exp(std::numbers::pi) * options.candidate_factor;
    }
    return CounterexampleParams(std::move(annuli));
}

ControlSystem build_sys32(const CounterexampleParams& params) {
    auto p = std::make_shared<const CounterexampleParams>(params);
    Dynamics f = [p](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
        rotate_scale(x, p->phi(x[0], x[1]) * std::abs(u[0]) - 1.0 - std::abs(x[1]), dx);
    };
    return ControlSystem("sys32", 2, 1, 1, std::move(f), second_coordinate(), kGuardCount, counterexample_guards);
}

ControlSystem build_sys33(const CounterexampleParams& params) {
    auto p = std::make_shared<const CounterexampleParams>(params);
    Dynamics f = [p](std::span<const double> x, std::span<const double>, std::span<double> dx) {
        rotate_scale(x, 5.0 * p->phi(x[0], x[1]) - 1.0 - std::abs(x[1]), dx);
    };
    return ControlSystem("sys33", 2, 0, 1, std::move(f), second_coordinate(), kGuardCount, counterexample_guards);
}

// ---------------------------------------------------------------- registry

std::vector<std::string> example_names() { return {"pid", "sys11", "sys12", "sys29", "sys31", "sys32", "sys33"}; }

ControlSystem make_example(const std::string& name, const CounterexampleOptions& options) {
    if (name == "pid") return build_pid_example().system;
    if (name == "sys11") return build_sys11();
    if (name == "sys12") return build_sys12();
    if (name == "sys29") return build_sys29();
    if (name == "sys31") return build_sys31();
    if (name == "sys32") return build_sys32(construct_counterexample_ubibs(options));
    if (name == "sys33") return build_sys33(construct_counterexample_ubibs(options));
    throw Error(ErrorKind::Usage, "unknown system: " + name);
}

}  // namespace ioslab
