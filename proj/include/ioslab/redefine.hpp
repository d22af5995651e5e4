#pragma once

#include "ioslab/compfn.hpp"
#include "ioslab/estimators.hpp"
#include "ioslab/sysmodel.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ioslab {

/// Finite input family for the h₀ search: every piecewise-constant signal with
/// `segments` equal pieces and `levels` evenly spaced values per coordinate in
/// [-cap, cap], plus `random_restarts` seeded signals.
struct InputSearch {
    int segments = 4;
    int levels = 7;
    int random_restarts = 32;
    std::uint64_t seed = 7;
};

struct RedefinitionConfig {
    ComparisonFunction gamma;
    KLSurface beta;
    InputSearch search{};
    double eps0 = 1e-3;  // floor for the first truncation level
    bool clamp = true;
    int max_iterations = 5;
    double horizon_rel_tol = 0.05;
    IntegratorOptions integrator{.step = 0.02};
    /// Grid for the IOS sanity check run before tabulation.
    SampleGrid sanity{};

    RedefinitionConfig(ComparisonFunction gamma_, KLSurface beta_);
    SettlingTimeMap settling() const { return SettlingTimeMap(beta); }
    double amplitude_cap(double xi_norm) const;
    Json to_json() const;
};

struct H0Result {
    double value = 0.0;
    double searched_horizon = 0.0;  // horizon of the last search
    double final_horizon = 0.0;     // T_{|ξ|}(max(value, eps0)/2)
    std::vector<double> horizons;
    std::size_t signals = 0;
    Json to_json() const;
};

/// Lower bound of sup over t and admissible u of |y(t,ξ,u)| - γ(‖u‖), clamped at 0.
H0Result compute_h0_detailed(const ControlSystem& sys, const RedefinitionConfig& config, std::span<const double> xi);
double compute_h0(const ControlSystem& sys, const RedefinitionConfig& config, std::span<const double> xi);

/// Search restricted to a fixed horizon (no truncation iteration). Exposed for tests.
double search_h0_on_horizon(const ControlSystem& sys, const RedefinitionConfig& config, std::span<const double> xi,
                            double horizon, std::size_t* signals = nullptr);

class H0Table {
public:
    H0Table(Vec lo, Vec hi, std::vector<int> resolution, std::vector<double> values, Json provenance);

    const Vec& lo() const { return lo_; }
    const Vec& hi() const { return hi_; }
    const std::vector<int>& resolution() const { return resolution_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t node_count() const { return values_.size(); }
    Vec node(std::size_t flat) const;
    bool contains(std::span<const double> x) const;
    /// Multilinear interpolation; Range error outside the box.
    double operator()(std::span<const double> x) const;
    const Json& provenance() const { return provenance_; }

    Json to_json() const;
    static H0Table from_json(const Json& doc);

private:
    Vec lo_, hi_;
    std::vector<int> resolution_;  // nodes per axis, first axis varies fastest
    std::vector<double> values_;
    Json provenance_;
};

/// compute_h0 at every lattice node of the box; checks |h(ξ)| ≤ h₀(ξ) ≤ β₀(|ξ|) at each.
H0Table tabulate_h0(const ControlSystem& sys, const RedefinitionConfig& config, const Vec& lo, const Vec& hi,
                    const std::vector<int>& resolution);

struct Slack {
    double rel = 0.1;
    double abs = 1e-3;
};

struct H0Estimates {
    EstimateReport decay;     // h₀(x(τ)) ≤ β(|ξ|,τ) + γ(‖v‖_[0,τ))
    EstimateReport lagrange;  // h₀(x(τ)) ≤ max{2h₀(ξ), 2γ(‖v‖)}
    std::size_t skipped = 0;  // samples that left the box
};

H0Estimates verify_h0_estimates(const ControlSystem& sys, const H0Table& table, const RedefinitionConfig& config,
                                const SampleGrid& grid, const Slack& slack = {});

}  // namespace ioslab
