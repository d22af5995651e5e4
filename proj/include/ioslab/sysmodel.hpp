#pragma once

#include "ioslab/compfn.hpp"
#include "ioslab/json_io.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ioslab {

using Vec = std::vector<double>;
using Dynamics = std::function<void(std::span<const double> x, std::span<const double> u, std::span<double> dx)>;
using OutputMap = std::function<void(std::span<const double> x, std::span<double> y)>;
/// Scalar functions whose zero sets mark where the right-hand side is not smooth.
using GuardMap = std::function<void(std::span<const double> x, std::span<double> g)>;

double euclidean_norm(std::span<const double> v);

/// ẋ = f(x,u), y = h(x). m may be 0 for systems without input.
class ControlSystem {
public:
    ControlSystem(std::string name, int n, int m, int p, Dynamics f, OutputMap h, int guard_count = 0,
                  GuardMap guards = {});

    const std::string& name() const { return name_; }
    int n() const { return n_; }
    int m() const { return m_; }
    int p() const { return p_; }
    int guard_count() const { return guard_count_; }

    void f(std::span<const double> x, std::span<const double> u, std::span<double> dx) const { f_(x, u, dx); }
    void h(std::span<const double> x, std::span<double> y) const { h_(x, y); }
    void guards(std::span<const double> x, std::span<double> g) const { guards_(x, g); }

    Vec rhs(std::span<const double> x, std::span<const double> u) const;
    Vec output(std::span<const double> x) const;
    double output_norm(std::span<const double> x) const { return euclidean_norm(output(x)); }

private:
    std::string name_;
    int n_, m_, p_;
    Dynamics f_;
    OutputMap h_;
    int guard_count_ = 0;
    GuardMap guards_;
};

/// Piecewise-constant input: values[k] holds on [breakpoints[k], breakpoints[k+1]).
/// The last value is held up to domain_end (or forever when absent).
class InputSignal {
public:
    InputSignal(std::vector<double> breakpoints, std::vector<Vec> values, std::optional<double> domain_end = {},
                bool unit_ball = false);

    static InputSignal constant(Vec value, bool unit_ball = false);
    static InputSignal zero(int m);
    static InputSignal none() { return zero(0); }

    int dim() const { return dim_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<Vec>& values() const { return values_; }
    const std::optional<double>& domain_end() const { return domain_end_; }
    bool unit_ball() const { return unit_ball_; }

    const Vec& at(double t) const;
    /// t ↦ u(t + tau)
    InputSignal shifted(double tau) const;
    InputSignal with_unit_ball(bool flag) const;

    Json to_json() const;
    static InputSignal from_json(const Json& doc);

private:
    std::vector<double> breakpoints_;
    std::vector<Vec> values_;
    std::optional<double> domain_end_;
    bool unit_ball_ = false;
    int dim_ = 0;
};

/// v on [0,tau), then u(· - tau).
InputSignal concat_inputs(const InputSignal& v, double tau, const InputSignal& u);

/// Largest Euclidean norm among pieces overlapping [0,t] with positive length
/// (the whole domain when t is absent). An empty interval gives 0.
double sup_norm(const InputSignal& u, std::optional<double> t = std::nullopt);

enum class Completion { Complete, Incomplete };

struct Trajectory {
    int n = 0, m = 0, p = 0;
    std::vector<double> times;
    std::vector<double> states;   // times.size() * n
    std::vector<double> outputs;  // times.size() * p
    std::vector<double> inputs;   // times.size() * m, input acting on [t_k, t_{k+1})
    Completion status = Completion::Complete;
    double end_time = 0.0;
    double blowup_norm = 0.0;

    std::size_t size() const { return times.size(); }
    std::span<const double> state(std::size_t k) const { return {states.data() + k * n, static_cast<std::size_t>(n)}; }
    std::span<const double> output(std::size_t k) const { return {outputs.data() + k * p, static_cast<std::size_t>(p)}; }
    std::span<const double> input(std::size_t k) const { return {inputs.data() + k * m, static_cast<std::size_t>(m)}; }
    double output_norm(std::size_t k) const { return euclidean_norm(output(k)); }
    double state_norm(std::size_t k) const { return euclidean_norm(state(k)); }
    bool complete() const { return status == Completion::Complete; }

    std::string to_csv() const;
};

enum class Refinement { Auto, Off, On };

struct IntegratorOptions {
    double step = 1e-3;
    double blowup_threshold = 1e12;
    /// Auto subdivides steps only for systems that declare guard functions.
    Refinement refinement = Refinement::Auto;
    double refine_tol = 1e-9;
    double guard_resolution = 0.05;
    int max_depth = 64;
};

/// One-step RK4 map (with the optional refinement) for callers that drive
/// their own time loop. Holds scratch space; not shareable across threads.
class Integrator {
public:
    Integrator(const ControlSystem& sys, const IntegratorOptions& options);
    ~Integrator();
    Integrator(const Integrator&) = delete;
    Integrator& operator=(const Integrator&) = delete;

    /// Advances x in place over dt with the input held at u.
    void advance(std::span<double> x, std::span<const double> u, double dt);

private:
    class Impl;
    IntegratorOptions options_;
    std::unique_ptr<Impl> impl_;
};

Trajectory simulate(const ControlSystem& sys, std::span<const double> xi, const InputSignal& u, double horizon,
                    const IntegratorOptions& options = {});
Trajectory simulate(const ControlSystem& sys, std::span<const double> xi, const InputSignal& u, double horizon,
                    double step);

/// g(x,d) = f(x, d·λ(|h(x)|)).
class FeedbackLoop {
public:
    FeedbackLoop(ControlSystem base, ComparisonFunction lambda);

    const ControlSystem& base() const { return base_; }
    const ComparisonFunction& lambda() const { return lambda_; }
    const ControlSystem& system() const { return closed_; }
    Vec effective_input(std::span<const double> x, std::span<const double> d) const;

private:
    ControlSystem base_;
    ComparisonFunction lambda_;
    ControlSystem closed_;
};

/// Simulates g; the recorded inputs are the effective inputs d(t)·λ(|y(t)|).
Trajectory simulate_closed_loop(const FeedbackLoop& loop, std::span<const double> xi, const InputSignal& d,
                                double horizon, const IntegratorOptions& options = {});

}  // namespace ioslab
