#pragma once

#include "ioslab/compfn.hpp"
#include "ioslab/sysmodel.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ioslab {

enum class PropertyKind { IOS, OL, SIOS, ROS, UBIBS, RosSmallOutput, RosSettling, LyapDecrease, FeedbackBound };

std::string_view to_string(PropertyKind kind);
PropertyKind property_from_string(std::string_view name);

/// Initial states and inputs to check. States: `states_per_radius` seeded
/// directions on each sphere of `radii`, plus `extra_states`. Inputs: `inputs`
/// when given, otherwise zero, ±constants at `levels` and `random_inputs`
/// seeded piecewise-constant signals with `segments` pieces.
struct SampleGrid {
    std::vector<double> radii{0.5, 1.0, 2.0};
    int states_per_radius = 4;
    std::vector<Vec> extra_states;
    std::vector<InputSignal> inputs;
    std::vector<double> levels{0.25, 0.5, 1.0, 2.0, 5.0};
    int segments = 4;
    int random_inputs = 3;
    double horizon = 10.0;
    IntegratorOptions integrator{};
    std::uint64_t seed = 1;

    std::vector<Vec> states(int n) const;
    std::vector<InputSignal> input_family(int m) const;
    /// Same as input_family, restricted to the closed unit ball and tagged as such.
    std::vector<InputSignal> disturbance_family(int m) const;
    Json to_json() const;
};

struct EstimateGains {
    std::optional<KLSurface> beta;
    std::optional<ComparisonFunction> gamma;
    std::optional<ComparisonFunction> sigma1;
    std::optional<ComparisonFunction> sigma2;
    std::optional<ComparisonFunction> sigma;
};

struct Witness {
    Vec xi;
    Json input;
    double t = 0.0;
    double observed = 0.0;
    double bound = 0.0;
};

enum class Verdict { HoldsOnGrid, Violated };

struct EstimateReport {
    PropertyKind property = PropertyKind::IOS;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::optional<Witness> witness;
    Json grid;
    std::size_t samples = 0;
    Json details = Json::object();

    Verdict verdict() const { return witness ? Verdict::Violated : Verdict::HoldsOnGrid; }
    bool holds() const { return !witness; }
    Json to_json() const;
};

/// Running minimum of bound - observed with the worst point kept as witness.
class MarginTracker {
public:
    void observe(double bound, double observed, const Vec& xi, const InputSignal* input, double t);
    void merge(const MarginTracker& other);
    double worst() const { return worst_; }
    EstimateReport report(PropertyKind kind, Json grid, std::size_t samples) const;

private:
    double worst_ = std::numeric_limits<double>::infinity();
    Witness at_;
    bool has_ = false;
};

/// Checks the max-form estimate of `kind` (IOS, OL, SIOS or UBIBS) at every
/// grid time of every sampled trajectory.
EstimateReport verify_estimate(const ControlSystem& sys, PropertyKind kind, const EstimateGains& gains,
                               const SampleGrid& grid);

struct RosChecks {
    /// (ε, δ(ε)) pairs: outputs from |ξ| ≤ δ must stay within ε.
    std::vector<std::pair<double, double>> p1;
    struct Settling {
        double r, eps, T;
    };
    /// Outputs from |ξ| ≤ r must be within ε after T.
    std::vector<Settling> p2;
};

struct RosResult {
    EstimateReport decay;
    std::optional<EstimateReport> p1;
    std::optional<EstimateReport> p2;
};

RosResult verify_ros(const ControlSystem& sys, const ComparisonFunction& lambda, const KLSurface& beta,
                     const SampleGrid& grid, const RosChecks& checks = {});

/// Zero-input output envelope over the grid states, raised to a KL surface.
KLSurface fit_empirical_beta(const ControlSystem& sys, const SampleGrid& grid);

struct ViolationOptions {
    double ol_threshold = 1e-6;
    double sios_factor = 4.0;
};

struct ViolationWitness {
    PropertyKind kind = PropertyKind::OL;
    Vec xi;
    Vec xi_other;  // SIOS only
    double t = 0.0;
    double observed = 0.0;  // OL: sup |y|; SIOS: larger half-time
    double reference = 0.0; // OL: |h(ξ)|; SIOS: smaller half-time
    double ratio = 0.0;     // SIOS only
    Json to_json() const;
};

/// First time |y| falls to half of |y(0)| (linear interpolation), or nullopt.
std::optional<double> output_half_time(const Trajectory& traj);

/// Searches for an OL or SIOS counterexample. Absence proves nothing.
std::optional<ViolationWitness> find_estimate_violation(const ControlSystem& sys, PropertyKind kind,
                                                        const SampleGrid& grid, const ViolationOptions& options = {});

struct ScalarField {
    std::function<double(std::span<const double>)> value;
    std::function<Vec(std::span<const double>)> gradient;  // optional
};

/// At grid pairs with V(ξ) > 0 and V(ξ) ≥ χ(|μ|), requires DV(ξ)·f(ξ,μ) < 0.
/// Margin is -DV·f.
EstimateReport lyapunov_decrease_check(const ControlSystem& sys, const ScalarField& v, const ComparisonFunction& chi,
                                       const std::vector<Vec>& states, const std::vector<Vec>& input_values);

/// Rectangular lattice over [lo, hi]^n with `per_dim` points per axis.
std::vector<Vec> box_lattice(const Vec& lo, const Vec& hi, int per_dim);

}  // namespace ioslab
