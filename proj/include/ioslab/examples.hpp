#pragma once

#include "ioslab/compfn.hpp"
#include "ioslab/sysmodel.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ioslab {

// ---------------------------------------------------------------- linear regulator

struct LinearRegulatorProblem {
    Eigen::MatrixXd A, P, S, C, Q;
};

enum class FrancisVerdict { Solved, NoSolution, RegulationConditionFails };

std::string_view to_string(FrancisVerdict verdict);

struct FrancisResult {
    FrancisVerdict verdict = FrancisVerdict::NoSolution;
    Eigen::MatrixXd Pi;              // least-squares candidate, also set on failure
    double sylvester_residual = 0.0; // ‖ΠS − AΠ − P‖
    double regulation_residual = 0.0;// ‖CΠ + Q‖
    bool unique = false;
    Json to_json() const;
};

/// Solves ΠS = AΠ + P by vectorization, then checks CΠ + Q = 0.
FrancisResult solve_francis(const LinearRegulatorProblem& prob, double tolerance = 1e-10);

struct PidExample {
    ControlSystem system;  // state (q, y, v, w), output y, no input
    LinearRegulatorProblem problem;
};

PidExample build_pid_example();

struct LinearGains {
    ComparisonFunction chi;
    KLSurface beta;
    ComparisonFunction sigma;
    double sup_norm = 0.0;    // upper bound of sup_t |e^{tA}|
    double tail_factor = 0.0; // |e^{(H/2)A}|
};

/// Envelope of |e^{tA}| on [0, horizon] with spacing `resolution`, extended past
/// the horizon by geometric decay. Precondition: A Hurwitz.
LinearGains linear_gain_functions(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, double horizon = 40.0,
                                  double resolution = 1e-2);

/// Scaling-and-squaring Taylor exponential.
Eigen::MatrixXd expm(const Eigen::MatrixXd& M);
bool is_hurwitz(const Eigen::MatrixXd& A);

// ---------------------------------------------------------------- textbook systems

double saturation(double s);           // ρ
double transition(double s);           // σ₀
double switching(double x, double y);  // σ(x, y)

ControlSystem build_sys11();
ControlSystem build_sys12();
ControlSystem build_sys29();
ControlSystem build_sys31();

// ---------------------------------------------------------------- counterexample

struct Annulus {
    double inner = 0.0;        // r_k: smallest radius on the loop
    double outer = 0.0;        // r'_k: largest radius on the loop
    Vec z;                     // z_k on the line {x > 0, y = 4}
    double loop_time = 0.0;    // first return time to the line
    double return_radius = 0.0;
};

struct CounterexampleOptions {
    double seed_radius = 200.0;
    int count = 3;
    double step = 1e-4;
    double candidate_factor = 1.1;  // next z_{k+1} radius ≈ factor · e^π · r'_k
    int max_candidates = 20;
};

/// φ and the annuli. φ is radial: 0 on |z| ≤ r₁/2, 1 on each [r_k, r'_k],
/// 0 on each |z| = r''_k = (r'_k + r_{k+1})/2 and beyond 2r'_K, smoothstep in between.
class CounterexampleParams {
public:
    explicit CounterexampleParams(std::vector<Annulus> annuli);

    const std::vector<Annulus>& annuli() const { return annuli_; }
    /// r''_k for k = 1..count (1-based); the last one is 2r'_K.
    double r_double_prime(std::size_t k) const;
    double phi(double x, double y) const;
    double phi_radial(double radius) const;
    Json to_json() const;

private:
    std::vector<Annulus> annuli_;
    std::vector<double> knots_;   // radii where the profile switches
    std::vector<double> levels_;  // value at each knot (0 or 1)
};

/// First time after 0 where the trajectory crosses {y = 4, x > 0}, with radius.
struct Crossing {
    double t = 0.0;
    Vec point;
    double radius = 0.0;
};

std::vector<Crossing> measure_line_crossings(const Trajectory& traj);

/// Builds the annuli from sys31 loops and returns the parameters.
CounterexampleParams construct_counterexample_ubibs(const CounterexampleOptions& options = {});

ControlSystem build_sys32(const CounterexampleParams& params);
ControlSystem build_sys33(const CounterexampleParams& params);

/// Integrator settings for the counterexample family (finer step, large blow-up threshold).
IntegratorOptions counterexample_integrator(double step = 1e-4);

// ---------------------------------------------------------------- registry

std::vector<std::string> example_names();
/// sys32/sys33 build the counterexample with `options`.
ControlSystem make_example(const std::string& name, const CounterexampleOptions& options = {});

}  // namespace ioslab
