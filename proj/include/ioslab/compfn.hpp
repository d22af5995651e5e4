#pragma once

#include "ioslab/json_io.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ioslab {

enum class GainClass { K, KInfinity };

std::string_view to_string(GainClass cls);

/// Piecewise-linear monotone gain through (0,0). Beyond the last knot the
/// function continues with `tail_slope`; a slope of zero makes it bounded
/// (only allowed for class K).
class ComparisonFunction {
public:
    ComparisonFunction(std::vector<std::pair<double, double>> knots, GainClass cls,
                       std::optional<double> tail_slope = std::nullopt, std::string description = {});

    static ComparisonFunction identity();
    static ComparisonFunction linear(double slope);
    /// Samples `fn` at `args` (must start at 0 and increase).
    static ComparisonFunction tabulate(const std::function<double(double)>& fn, std::vector<double> args,
                                       GainClass cls, std::string description = {});
    static ComparisonFunction pointwise_max(const ComparisonFunction& a, const ComparisonFunction& b);

    double operator()(double s) const;
    double evaluate(double s) const { return (*this)(s); }
    double inverse(double v) const;

    ComparisonFunction inverse_function() const;
    ComparisonFunction scaled(double factor) const;
    /// Same knots, but an unbounded tail (slope of the last segment when bounded).
    ComparisonFunction promoted() const;

    bool bounded() const { return tail_slope_ == 0.0; }
    double supremum() const;
    /// Slope of the linear piece immediately to the right of s.
    double right_slope(double s) const;

    const std::vector<double>& args() const { return args_; }
    const std::vector<double>& values() const { return values_; }
    double tail_slope() const { return tail_slope_; }
    GainClass cls() const { return cls_; }
    const std::string& description() const { return description_; }
    ComparisonFunction with_description(std::string text) const;

    Json to_json() const;
    static ComparisonFunction from_json(const Json& doc);

private:
    std::vector<double> args_;
    std::vector<double> values_;
    double tail_slope_ = 0.0;
    GainClass cls_ = GainClass::K;
    std::string description_;
};

/// outer ∘ inner, exact on the merged knot set.
ComparisonFunction compose(const ComparisonFunction& outer, const ComparisonFunction& inner);

/// β(r,t) either as r·a·e^{-bt} or as a monotonized (r,t) grid.
class KLSurface {
public:
    struct Exponential {
        double a = 1.0;
        double b = 1.0;
    };
    struct Grid {
        std::vector<double> r;
        std::vector<double> t;
        std::vector<std::vector<double>> values;  // values[i][j] = β(r[i], t[j])
        double tail_rate = 1.0;
    };

    static KLSurface exponential(double a, double b);
    /// Ingests a grid: r[0] = t[0] = 0, zero row at r = 0, then raised to the
    /// smallest surface that is nondecreasing in r and nonincreasing in t.
    /// The last column must not exceed `floor`.
    static KLSurface grid(std::vector<double> r, std::vector<double> t, std::vector<std::vector<double>> values,
                          double tail_rate = 1.0, double floor = std::numeric_limits<double>::infinity());

    double operator()(double r, double t) const;
    double at_zero(double r) const { return (*this)(r, 0.0); }

    bool is_exponential() const { return std::holds_alternative<Exponential>(form_); }
    const Exponential* as_exponential() const { return std::get_if<Exponential>(&form_); }
    const Grid* as_grid() const { return std::get_if<Grid>(&form_); }

    Json to_json() const;
    static KLSurface from_json(const Json& doc);

private:
    explicit KLSurface(std::variant<Exponential, Grid> form) : form_(std::move(form)) {}
    std::variant<Exponential, Grid> form_;
};

/// T_r(s) = T̂_r(s) + r/(1+s) with T̂_r(s) the first dyadic time at which β(r,·) drops below s.
class SettlingTimeMap {
public:
    static constexpr double kHorizon = 1048576.0;  // 2^20
    static constexpr int kBisections = 50;         // resolution 2^-30 < 1e-9

    explicit SettlingTimeMap(KLSurface beta) : beta_(std::move(beta)) {}

    double hat(double r, double s) const;
    double operator()(double r, double s) const;
    const KLSurface& beta() const { return beta_; }

    struct Table {
        std::vector<double> r;
        std::vector<double> s;
        std::vector<std::vector<double>> values;  // values[i][j] = T_{r[i]}(s[j])
    };
    /// Evaluates on a grid and applies the running-max sweeps (grids must be increasing).
    Table tabulate(const std::vector<double>& r_grid, const std::vector<double>& s_grid) const;

private:
    KLSurface beta_;
};

SettlingTimeMap settling_time_map(const KLSurface& beta);

struct DilationOptions {
    double r_max = 10.0;
    double s_max = 10.0;
    double t_max = 20.0;
    int r_nodes = 200;
    int s_nodes = 60;
    int t_nodes = 200;
    int verify_nodes = 20;
};

struct DilationResult {
    KLSurface beta_hat;
    ComparisonFunction gamma_hat;
};

/// Builds (β̂, γ̂) with min{σ(s), β(r,t)} ≤ β̂(s, t/(1+γ̂(r))) on the option ranges,
/// verified on a verify_nodes³ grid.
DilationResult kl_time_dilation(const ComparisonFunction& sigma, const KLSurface& beta,
                                const DilationOptions& options = {});

std::vector<double> linspace(double lo, double hi, int count);
std::vector<double> logspace(double lo, double hi, int count);

}  // namespace ioslab
