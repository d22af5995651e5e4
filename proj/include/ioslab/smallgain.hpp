#pragma once

#include "ioslab/compfn.hpp"
#include "ioslab/estimators.hpp"
#include "ioslab/redefine.hpp"
#include "ioslab/sysmodel.hpp"

#include <optional>
#include <vector>

namespace ioslab {

/// λ = σ₂⁻¹(⅛·σ₁⁻¹(·)) with σ₁ raised to max(σ₁, id), checked against
/// σ₂(λ(s)) < ¼σ₁⁻¹(s) on a log grid.
struct GainMarginCertificate {
    ComparisonFunction lambda;
    ComparisonFunction sigma1;  // normalized: max(σ₁, id)
    ComparisonFunction sigma2;
    std::vector<double> grid;
    double worst_margin = 0.0;           // min over the grid of ¼σ₁⁻¹(s) - σ₂(λ(s))
    double worst_relative_margin = 0.0;  // same, divided by ¼σ₁⁻¹(s)
    Json to_json() const;
};

struct CertificateGrid {
    double lo = 1e-6;
    double hi = 1e6;
    int count = 241;
};

GainMarginCertificate construct_lambda(const ComparisonFunction& sigma1, const ComparisonFunction& sigma2,
                                       const CertificateGrid& grid = {});

struct FeedbackCheckOptions {
    double zero_tolerance = 1e-9;
    /// When set, the output-Lagrange estimate is checked on this grid first.
    std::optional<SampleGrid> sanity;
};

/// Closed loop with the certificate's λ: σ₂(λ(|y(t)|)) ≤ ½|h(ξ)| when h(ξ) ≠ 0,
/// |y(t)| within the zero tolerance when h(ξ) = 0. The details also carry
/// the worst margin of sup|y| ≤ σ₁(|h(ξ)|).
EstimateReport verify_feedback_bound(const ControlSystem& sys, const GainMarginCertificate& cert,
                                     const SampleGrid& grid, const FeedbackCheckOptions& options = {});

/// λ₀ ∘ χ. With a table, checks λ(|h(ξ)|) ≤ λ₀(h₀(ξ)) at every node.
ComparisonFunction compose_lambda_for_ios(const ComparisonFunction& lambda0, const ComparisonFunction& chi,
                                          const ControlSystem* sys = nullptr, const H0Table* table = nullptr);

}  // namespace ioslab
