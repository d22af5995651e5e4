#include "ioslab/compfn.hpp"

#include "ioslab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ioslab {

namespace {

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Usage, std::string(what) + " must be finite");
}

}  // namespace

std::string_view to_string(GainClass cls) { return cls == GainClass::K ? "K" : "Kinf"; }

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    if (count <= 0) return out;
    if (count == 1) return {lo};
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
    out.back() = hi;
    return out;
}

std::vector<double> logspace(double lo, double hi, int count) {
    auto exps = linspace(std::log(lo), std::log(hi), count);
    for (auto& e : exps) e = std::exp(e);
    if (!exps.empty()) {
        exps.front() = lo;
        exps.back() = hi;
    }
    return exps;
}

// ---------------------------------------------------------------- ComparisonFunction

ComparisonFunction::ComparisonFunction(std::vector<std::pair<double, double>> knots, GainClass cls,
                                       std::optional<double> tail_slope, std::string description)
    : cls_(cls), description_(std::move(description)) {
    if (knots.size() < 2) throw Error(ErrorKind::Usage, "a comparison function needs at least two knots");
    if (knots.front().first != 0.0 || knots.front().second != 0.0)
        throw Error(ErrorKind::Usage, "first knot must be (0, 0)");
    args_.reserve(knots.size());
    values_.reserve(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const auto [s, v] = knots[i];
        require_finite(s, "knot argument");
        require_finite(v, "knot value");
        if (i > 0 && !(s > args_.back()))
            throw Error(ErrorKind::Usage, "knot arguments must strictly increase",
                        Json{{"index", i}, {"arg", s}});
        if (i > 0 && !(v > values_.back()))
            throw Error(ErrorKind::Usage, "knot values must strictly increase",
                        Json{{"index", i}, {"arg", s}, {"value", v}});
        args_.push_back(s);
        values_.push_back(v);
    }
    const std::size_t n = args_.size();
    tail_slope_ = tail_slope.value_or((values_[n - 1] - values_[n - 2]) / (args_[n - 1] - args_[n - 2]));
    require_finite(tail_slope_, "tail slope");
    if (tail_slope_ < 0.0) throw Error(ErrorKind::Usage, "tail slope must be nonnegative");
    if (cls_ == GainClass::KInfinity && !(tail_slope_ > 0.0))
        throw Error(ErrorKind::Usage, "a K-infinity function needs a positive tail slope");
}

ComparisonFunction ComparisonFunction::identity() {
    return ComparisonFunction({{0.0, 0.0}, {1.0, 1.0}}, GainClass::KInfinity, 1.0, "identity");
}

ComparisonFunction ComparisonFunction::linear(double slope) {
    if (!(slope > 0.0) || !std::isfinite(slope)) throw Error(ErrorKind::Usage, "linear gain needs a positive slope");
    return ComparisonFunction({{0.0, 0.0}, {1.0, slope}}, GainClass::KInfinity, slope,
                              "linear " + format_double(slope));
}

ComparisonFunction ComparisonFunction::tabulate(const std::function<double(double)>& fn, std::vector<double> args,
                                                GainClass cls, std::string description) {
    std::vector<std::pair<double, double>> knots;
    knots.reserve(args.size());
    for (double s : args) knots.emplace_back(s, s == 0.0 ? 0.0 : fn(s));
    return ComparisonFunction(std::move(knots), cls, std::nullopt, std::move(description));
}

double ComparisonFunction::operator()(double s) const {
    if (!(s >= 0.0)) throw Error(ErrorKind::Domain, "comparison function evaluated at a negative argument",
                                 Json{{"arg", s}});
    if (s >= args_.back()) {
        if (std::isinf(s)) return tail_slope_ > 0.0 ? s : values_.back();
        return values_.back() + tail_slope_ * (s - args_.back());
    }
    const auto it = std::upper_bound(args_.begin(), args_.end(), s);
    const auto k = static_cast<std::size_t>(it - args_.begin());
    const double s0 = args_[k - 1], s1 = args_[k];
    const double v0 = values_[k - 1], v1 = values_[k];
    if (s == s0) return v0;
    return v0 + (v1 - v0) * (s - s0) / (s1 - s0);
}

double ComparisonFunction::supremum() const {
    return tail_slope_ > 0.0 ? std::numeric_limits<double>::infinity() : values_.back();
}

double ComparisonFunction::inverse(double v) const {
    if (!(v >= 0.0)) throw Error(ErrorKind::Domain, "inverse evaluated at a negative value", Json{{"value", v}});
    if (v >= values_.back()) {
        if (v == values_.back()) return args_.back();
        if (tail_slope_ == 0.0)
            throw Error(ErrorKind::Range, "value above the range of a bounded class-K function",
                        Json{{"value", v}, {"supremum", values_.back()}});
        if (std::isinf(v)) return v;
        return args_.back() + (v - values_.back()) / tail_slope_;
    }
    const auto it = std::upper_bound(values_.begin(), values_.end(), v);
    const auto k = static_cast<std::size_t>(it - values_.begin());
    const double v0 = values_[k - 1], v1 = values_[k];
    const double s0 = args_[k - 1], s1 = args_[k];
    if (v == v0) return s0;
    return s0 + (s1 - s0) * (v - v0) / (v1 - v0);
}

ComparisonFunction ComparisonFunction::inverse_function() const {
    if (tail_slope_ == 0.0) throw Error(ErrorKind::Precondition, "inverse function needs an unbounded gain");
    std::vector<std::pair<double, double>> knots;
    knots.reserve(args_.size());
    for (std::size_t i = 0; i < args_.size(); ++i) knots.emplace_back(values_[i], args_[i]);
    return ComparisonFunction(std::move(knots), GainClass::KInfinity, 1.0 / tail_slope_,
                              description_.empty() ? std::string{} : "inverse of " + description_);
}

ComparisonFunction ComparisonFunction::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw Error(ErrorKind::Usage, "scale factor must be positive");
    std::vector<std::pair<double, double>> knots;
    knots.reserve(args_.size());
    for (std::size_t i = 0; i < args_.size(); ++i) knots.emplace_back(args_[i], factor * values_[i]);
    return ComparisonFunction(std::move(knots), cls_, factor * tail_slope_, description_);
}

ComparisonFunction ComparisonFunction::promoted() const {
    std::vector<std::pair<double, double>> knots;
    for (std::size_t i = 0; i < args_.size(); ++i) knots.emplace_back(args_[i], values_[i]);
    const std::size_t n = args_.size();
    const double slope =
        tail_slope_ > 0.0 ? tail_slope_ : (values_[n - 1] - values_[n - 2]) / (args_[n - 1] - args_[n - 2]);
    return ComparisonFunction(std::move(knots), GainClass::KInfinity, slope, description_);
}

double ComparisonFunction::right_slope(double s) const {
    if (s >= args_.back()) return tail_slope_;
    const auto it = std::upper_bound(args_.begin(), args_.end(), s);
    const auto k = static_cast<std::size_t>(it - args_.begin());
    return (values_[k] - values_[k - 1]) / (args_[k] - args_[k - 1]);
}

ComparisonFunction ComparisonFunction::with_description(std::string text) const {
    ComparisonFunction copy = *this;
    copy.description_ = std::move(text);
    return copy;
}

namespace {

// Sorted, strictly increasing knot list from raw samples; drops near-duplicates.
std::vector<std::pair<double, double>> clean_knots(std::vector<double> args,
                                                   const std::function<double(double)>& fn) {
    std::sort(args.begin(), args.end());
    std::vector<std::pair<double, double>> knots;
    for (double s : args) {
        if (s < 0.0 || !std::isfinite(s)) continue;
        if (!knots.empty() && close_rel(s, knots.back().first)) continue;
        const double v = s == 0.0 ? 0.0 : fn(s);
        if (!knots.empty() && !(v > knots.back().second)) continue;
        knots.emplace_back(s, v);
    }
    return knots;
}

}  // namespace

ComparisonFunction ComparisonFunction::pointwise_max(const ComparisonFunction& a, const ComparisonFunction& b) {
    std::vector<double> args = a.args_;
    args.insert(args.end(), b.args_.begin(), b.args_.end());
    std::sort(args.begin(), args.end());
    args.erase(std::unique(args.begin(), args.end()), args.end());
    std::vector<double> crossings;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const double d0 = a(args[i - 1]) - b(args[i - 1]);
        const double d1 = a(args[i]) - b(args[i]);
        if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0))
            crossings.push_back(args[i - 1] + (args[i] - args[i - 1]) * d0 / (d0 - d1));
    }
    const double last = args.back();
    const double gap = a(last) - b(last);
    const double slope_gap = a.tail_slope_ - b.tail_slope_;
    if (gap * slope_gap < 0.0) crossings.push_back(last - gap / slope_gap);
    args.insert(args.end(), crossings.begin(), crossings.end());
    const auto fn = [&](double s) { return std::max(a(s), b(s)); };
    auto knots = clean_knots(std::move(args), fn);
    // any tail crossing is a knot, so past the last knot the steeper piece dominates
    const double tail = std::max(a.tail_slope_, b.tail_slope_);
    const GainClass cls =
        (a.cls_ == GainClass::KInfinity || b.cls_ == GainClass::KInfinity) ? GainClass::KInfinity : GainClass::K;
    return ComparisonFunction(std::move(knots), cls, tail,
                              "max(" + a.description_ + ", " + b.description_ + ")");
}

Json ComparisonFunction::to_json() const {
    Json knots = Json::array();
    for (std::size_t i = 0; i < args_.size(); ++i) knots.push_back(Json::array({args_[i], values_[i]}));
    return Json{{"class", std::string(to_string(cls_))},
                {"knots", knots},
                {"tail_slope", tail_slope_},
                {"description", description_}};
}

ComparisonFunction ComparisonFunction::from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("class") || !doc.contains("knots"))
        throw Error(ErrorKind::Usage, "comparison function JSON needs \"class\" and \"knots\"");
    const auto cls_name = doc.at("class").get<std::string>();
    GainClass cls;
    if (cls_name == "K") cls = GainClass::K;
    else if (cls_name == "Kinf") cls = GainClass::KInfinity;
    else throw Error(ErrorKind::Usage, "unknown comparison function class: " + cls_name);
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : doc.at("knots")) {
        if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number())
            throw Error(ErrorKind::Usage, "each knot must be a [s, v] pair");
        knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    std::optional<double> tail;
    if (doc.contains("tail_slope") && !doc.at("tail_slope").is_null()) tail = doc.at("tail_slope").get<double>();
    return ComparisonFunction(std::move(knots), cls, tail, doc.value("description", std::string{}));
}

ComparisonFunction compose(const ComparisonFunction& outer, const ComparisonFunction& inner) {
    std::vector<double> args = inner.args();
    for (double a : outer.args()) {
        if (a < inner.supremum() || (inner.bounded() && a == inner.supremum())) args.push_back(inner.inverse(a));
    }
    const auto fn = [&](double s) { return outer(inner(s)); };
    auto knots = clean_knots(std::move(args), fn);
    const double end = knots.back().first;
    // inner(end) may land a rounding error short of outer's last knot
    const double at = inner(end);
    const double last = outer.args().back();
    const double outer_slope = at >= last * (1.0 - 1e-9) ? outer.tail_slope() : outer.right_slope(at);
    const double tail = outer_slope * inner.tail_slope();
    const GainClass cls = (outer.cls() == GainClass::KInfinity && inner.cls() == GainClass::KInfinity)
                              ? GainClass::KInfinity
                              : GainClass::K;
    std::string desc;
    if (!outer.description().empty() || !inner.description().empty())
        desc = outer.description() + " o " + inner.description();
    return ComparisonFunction(std::move(knots), cls, tail, std::move(desc));
}

// ---------------------------------------------------------------- KLSurface

KLSurface KLSurface::exponential(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw Error(ErrorKind::Usage, "exponential KL surface needs a > 0 and b > 0");
    return KLSurface(Exponential{a, b});
}

KLSurface KLSurface::grid(std::vector<double> r, std::vector<double> t, std::vector<std::vector<double>> values,
                          double tail_rate, double floor) {
    if (r.size() < 2 || t.size() < 2) throw Error(ErrorKind::Usage, "KL grid needs at least two r and two t nodes");
    if (r.front() != 0.0 || t.front() != 0.0) throw Error(ErrorKind::Usage, "KL grid must start at r = 0 and t = 0");
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i] > r[i - 1]) || !std::isfinite(r[i])) throw Error(ErrorKind::Usage, "KL r grid must increase");
    for (std::size_t j = 1; j < t.size(); ++j)
        if (!(t[j] > t[j - 1]) || !std::isfinite(t[j])) throw Error(ErrorKind::Usage, "KL t grid must increase");
    if (values.size() != r.size()) throw Error(ErrorKind::Usage, "KL values need one row per r node");
    for (const auto& row : values) {
        if (row.size() != t.size()) throw Error(ErrorKind::Usage, "KL values need one column per t node");
        for (double v : row)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw Error(ErrorKind::Usage, "KL values must be finite and nonnegative");
    }
    for (double v : values.front())
        if (v != 0.0) throw Error(ErrorKind::Usage, "KL grid row at r = 0 must be zero");
    if (!(tail_rate > 0.0) || !std::isfinite(tail_rate)) throw Error(ErrorKind::Usage, "KL tail rate must be positive");

    const std::size_t nr = r.size(), nt = t.size();
    for (std::size_t j = 0; j < nt; ++j)
        for (std::size_t i = 1; i < nr; ++i) values[i][j] = std::max(values[i][j], values[i - 1][j]);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = nt - 1; j-- > 0;) values[i][j] = std::max(values[i][j], values[i][j + 1]);

    for (std::size_t i = 0; i < nr; ++i)
        if (values[i].back() > floor)
            throw Error(ErrorKind::Usage, "KL grid does not decay to the floor at the last time node",
                        Json{{"r", r[i]}, {"value", values[i].back()}, {"floor", floor}});
    return KLSurface(Grid{std::move(r), std::move(t), std::move(values), tail_rate});
}

double KLSurface::operator()(double r, double t) const {
    if (!(r >= 0.0) || !(t >= 0.0))
        throw Error(ErrorKind::Domain, "KL surface evaluated at a negative argument", Json{{"r", r}, {"t", t}});
    if (const auto* e = std::get_if<Exponential>(&form_)) return r * e->a * std::exp(-e->b * t);
    const auto& g = std::get<Grid>(form_);
    const double r_last = g.r.back();
    const double t_last = g.t.back();
    const double scale = r > r_last ? r / r_last : 1.0;
    const double rq = std::min(r, r_last);
    const double decay = t > t_last ? std::exp(-g.tail_rate * (t - t_last)) : 1.0;
    const double tq = std::min(t, t_last);

    const auto locate = [](const std::vector<double>& grid, double q) {
        auto k = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), q) - grid.begin());
        k = std::clamp<std::size_t>(k, 1, grid.size() - 1);
        const double w = (q - grid[k - 1]) / (grid[k] - grid[k - 1]);
        return std::pair{k, std::clamp(w, 0.0, 1.0)};
    };
    const auto [i, wr] = locate(g.r, rq);
    const auto [j, wt] = locate(g.t, tq);
    const double v00 = g.values[i - 1][j - 1], v01 = g.values[i - 1][j];
    const double v10 = g.values[i][j - 1], v11 = g.values[i][j];
    const double v = (1 - wr) * ((1 - wt) * v00 + wt * v01) + wr * ((1 - wt) * v10 + wt * v11);
    return v * scale * decay;
}

Json KLSurface::to_json() const {
    if (const auto* e = std::get_if<Exponential>(&form_))
        return Json{{"class", "KL"}, {"form", "exponential"}, {"a", e->a}, {"b", e->b}};
    const auto& g = std::get<Grid>(form_);
    Json values = Json::array();
    for (const auto& row : g.values) values.push_back(to_json_array(row));
    return Json{{"class", "KL"},
                {"r_grid", to_json_array(g.r)},
                {"t_grid", to_json_array(g.t)},
                {"values", values},
                {"tail_rate", g.tail_rate}};
}

KLSurface KLSurface::from_json(const Json& doc) {
    if (!doc.is_object() || doc.value("class", std::string{}) != "KL")
        throw Error(ErrorKind::Usage, "KL surface JSON needs \"class\": \"KL\"");
    if (doc.value("form", std::string{}) == "exponential")
        return exponential(doc.at("a").get<double>(), doc.at("b").get<double>());
    if (!doc.contains("r_grid") || !doc.contains("t_grid") || !doc.contains("values"))
        throw Error(ErrorKind::Usage, "KL grid JSON needs r_grid, t_grid and values");
    std::vector<std::vector<double>> values;
    for (const auto& row : doc.at("values")) values.push_back(doubles_from_json(row));
    return grid(doubles_from_json(doc.at("r_grid")), doubles_from_json(doc.at("t_grid")), std::move(values),
                doc.value("tail_rate", 1.0),
                doc.contains("floor") ? doc.at("floor").get<double>() : std::numeric_limits<double>::infinity());
}

// ---------------------------------------------------------------- SettlingTimeMap

double SettlingTimeMap::hat(double r, double s) const {
    if (!(r >= 0.0) || !(s > 0.0))
        throw Error(ErrorKind::Domain, "settling time needs r >= 0 and s > 0", Json{{"r", r}, {"s", s}});
    if (beta_(r, 0.0) < s) return 0.0;
    if (!(beta_(r, kHorizon) < s))
        throw Error(ErrorKind::Horizon, "KL bound does not drop below the level within the horizon",
                    Json{{"r", r}, {"s", s}, {"horizon", kHorizon}});
    // Bisection on the fixed dyadic bracket: the result is the smallest grid
    // point where the predicate holds, so it is monotone in r and s.
    double lo = 0.0, hi = kHorizon;
    for (int k = 0; k < kBisections; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (beta_(r, mid) < s) hi = mid;
        else lo = mid;
    }
    return hi;
}

double SettlingTimeMap::operator()(double r, double s) const { return hat(r, s) + r / (1.0 + s); }

SettlingTimeMap::Table SettlingTimeMap::tabulate(const std::vector<double>& r_grid,
                                                 const std::vector<double>& s_grid) const {
    for (std::size_t i = 1; i < r_grid.size(); ++i)
        if (!(r_grid[i] > r_grid[i - 1])) throw Error(ErrorKind::Usage, "r grid must increase");
    for (std::size_t j = 1; j < s_grid.size(); ++j)
        if (!(s_grid[j] > s_grid[j - 1])) throw Error(ErrorKind::Usage, "s grid must increase");
    Table table{r_grid, s_grid, {}};
    const std::size_t nr = r_grid.size(), ns = s_grid.size();
    std::vector<std::vector<double>> hats(nr, std::vector<double>(ns));
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < ns; ++j) hats[i][j] = hat(r_grid[i], s_grid[j]);
    for (std::size_t j = 0; j < ns; ++j)
        for (std::size_t i = 1; i < nr; ++i) hats[i][j] = std::max(hats[i][j], hats[i - 1][j]);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = ns - 1; j-- > 0;) hats[i][j] = std::max(hats[i][j], hats[i][j + 1]);
    table.values = std::move(hats);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < ns; ++j) table.values[i][j] += r_grid[i] / (1.0 + s_grid[j]);
    return table;
}

SettlingTimeMap settling_time_map(const KLSurface& beta) { return SettlingTimeMap(beta); }

// ---------------------------------------------------------------- time dilation

DilationResult kl_time_dilation(const ComparisonFunction& sigma, const KLSurface& beta,
                                const DilationOptions& options) {
    if (!(options.r_max > 0.0) || !(options.s_max > 0.0) || !(options.t_max > 0.0) || options.r_nodes < 2 ||
        options.s_nodes < 3 || options.t_nodes < 2 || options.verify_nodes < 1)
        throw Error(ErrorKind::Usage, "invalid time-dilation options");
    const SettlingTimeMap settle(beta);

    // γ̂(r) = T_r(1/(1+r)); strictly increasing because T is increasing in r and decreasing in s.
    const auto r_grid = linspace(0.0, options.r_max, options.r_nodes);
    std::vector<std::pair<double, double>> gamma_knots;
    for (double r : r_grid) gamma_knots.emplace_back(r, r == 0.0 ? 0.0 : settle(r, 1.0 / (1.0 + r)));
    const ComparisonFunction gamma_hat(std::move(gamma_knots), GainClass::KInfinity, std::nullopt, "dilation gain");

    // G(τ) bounds sup over r ≤ r_max of β(r, τ(1+γ̂(r))) cell by cell.
    const auto big_g = [&](double tau) {
        double g = 0.0;
        for (std::size_t k = 0; k + 1 < r_grid.size(); ++k)
            g = std::max(g, beta(r_grid[k + 1], tau * (1.0 + gamma_hat(r_grid[k]))));
        return g;
    };

    std::vector<double> s_grid{0.0};
    for (double s : logspace(1e-9 * options.s_max, options.s_max, options.s_nodes - 1)) s_grid.push_back(s);
    const auto t_grid = linspace(0.0, options.t_max, options.t_nodes);
    std::vector<double> g_prev(t_grid.size());
    for (std::size_t j = 0; j < t_grid.size(); ++j) g_prev[j] = j == 0 ? 0.0 : big_g(t_grid[j - 1]);

    std::vector<std::vector<double>> values(s_grid.size(), std::vector<double>(t_grid.size(), 0.0));
    for (std::size_t i = 1; i < s_grid.size(); ++i) {
        const double sig = sigma(s_grid[std::min(i + 1, s_grid.size() - 1)]);
        for (std::size_t j = 0; j < t_grid.size(); ++j) values[i][j] = j == 0 ? sig : std::min(sig, g_prev[j]);
    }
    // tail decay no faster than the slowest rate observed over the last cell
    double tail_rate = 1.0;
    {
        const double dt = t_grid[t_grid.size() - 1] - t_grid[t_grid.size() - 2];
        const double g1 = big_g(t_grid[t_grid.size() - 2]);
        const double g2 = big_g(t_grid.back());
        if (g1 > 0.0 && g2 > 0.0 && g2 < g1) tail_rate = std::min(1.0, std::log(g1 / g2) / dt);
        if (!(tail_rate > 0.0)) tail_rate = 1e-6;
    }
    KLSurface beta_hat = KLSurface::grid(s_grid, t_grid, std::move(values), tail_rate);

    const auto vs = linspace(0.0, options.s_max, options.verify_nodes);
    const auto vr = linspace(0.0, options.r_max, options.verify_nodes);
    const auto vt = linspace(0.0, options.t_max, options.verify_nodes);
    for (double s : vs)
        for (double r : vr)
            for (double t : vt) {
                const double lhs = std::min(sigma(s), beta(r, t));
                const double tau = t / (1.0 + gamma_hat(r));
                const double rhs = beta_hat(s, tau);
                if (lhs > rhs + 1e-12 * std::max(1.0, lhs))
                    throw Error(ErrorKind::Construction, "time-dilation inequality fails on the verification grid",
                                Json{{"s", s}, {"r", r}, {"t", t}, {"lhs", lhs}, {"rhs", rhs}});
            }
    return {std::move(beta_hat), gamma_hat};
}

}  // namespace ioslab
