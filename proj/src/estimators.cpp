#include "ioslab/estimators.hpp"

#include "ioslab/errors.hpp"
#include "ioslab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace ioslab {

std::string_view to_string(PropertyKind kind) {
    switch (kind) {
        case PropertyKind::IOS: return "IOS";
        case PropertyKind::OL: return "OLIOS_ol_part";
        case PropertyKind::SIOS: return "SIOS";
        case PropertyKind::ROS: return "ROS";
        case PropertyKind::UBIBS: return "UBIBS";
        case PropertyKind::RosSmallOutput: return "ROS_SMALL_OUTPUT";
        case PropertyKind::RosSettling: return "ROS_SETTLING";
        case PropertyKind::LyapDecrease: return "LYAP_DECREASE";
        case PropertyKind::FeedbackBound: return "FEEDBACK_BOUND";
    }
    return "?";
}

PropertyKind property_from_string(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "ios") return PropertyKind::IOS;
    if (s == "ol" || s == "olios" || s == "olios_ol_part") return PropertyKind::OL;
    if (s == "sios") return PropertyKind::SIOS;
    if (s == "ros") return PropertyKind::ROS;
    if (s == "ubibs") return PropertyKind::UBIBS;
    if (s == "lyap" || s == "lyap_decrease") return PropertyKind::LyapDecrease;
    throw Error(ErrorKind::Usage, "unknown property: " + std::string(name));
}

// ---------------------------------------------------------------- sampling

namespace {

constexpr std::uint64_t kInputStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kRosCheckStream = 0xD1B54A32D192ED03ULL;

std::vector<Vec> sphere_points(int n, const std::vector<double>& radii, int per_radius, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vec> out;
    for (double r : radii) {
        for (int k = 0; k < per_radius; ++k) {
            Vec dir(static_cast<std::size_t>(n));
            double norm = 0.0;
            while (norm < 1e-12) {
                for (double& c : dir) c = normal(rng);
                norm = euclidean_norm(dir);
            }
            for (double& c : dir) c *= r / norm;
            out.push_back(std::move(dir));
        }
    }
    return out;
}

InputSignal random_pwc(int m, int segments, double horizon, std::mt19937_64& rng,
                       const std::function<double(std::mt19937_64&)>& draw, bool unit_ball) {
    std::vector<double> bps;
    std::vector<Vec> vals;
    for (int s = 0; s < segments; ++s) {
        bps.push_back(horizon * s / segments);
        Vec v(static_cast<std::size_t>(m));
        for (double& c : v) c = draw(rng);
        vals.push_back(std::move(v));
    }
    return InputSignal(std::move(bps), std::move(vals), std::nullopt, unit_ball);
}

}  // namespace

std::vector<Vec> SampleGrid::states(int n) const {
    auto out = sphere_points(n, radii, states_per_radius, seed);
    for (const auto& x : extra_states) {
        if (static_cast<int>(x.size()) != n) throw Error(ErrorKind::Usage, "extra state has wrong dimension");
        out.push_back(x);
    }
    return out;
}

std::vector<InputSignal> SampleGrid::input_family(int m) const {
    if (!inputs.empty()) {
        for (const auto& u : inputs)
            if (u.dim() != m) throw Error(ErrorKind::Usage, "grid input has wrong dimension");
        return inputs;
    }
    if (m == 0) return {InputSignal::none()};
    std::vector<InputSignal> out{InputSignal::zero(m).with_unit_ball(false)};
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (double level : levels) {
        out.push_back(InputSignal::constant(Vec(static_cast<std::size_t>(m), level * scale)));
        out.push_back(InputSignal::constant(Vec(static_cast<std::size_t>(m), -level * scale)));
    }
    if (!levels.empty()) {
        std::mt19937_64 rng(seed ^ kInputStream);
        std::uniform_int_distribution<std::size_t> pick(0, 2 * levels.size() - 1);
        const auto draw = [&](std::mt19937_64& g) {
            const std::size_t k = pick(g);
            const double v = levels[k / 2] * scale;
            return k % 2 == 0 ? v : -v;
        };
        for (int i = 0; i < random_inputs; ++i) out.push_back(random_pwc(m, segments, horizon, rng, draw, false));
    }
    return out;
}

std::vector<InputSignal> SampleGrid::disturbance_family(int m) const {
    if (!inputs.empty()) {
        for (const auto& d : inputs) {
            if (d.dim() != m) throw Error(ErrorKind::Usage, "grid disturbance has wrong dimension");
            if (!d.unit_ball()) throw Error(ErrorKind::Usage, "disturbances must carry the unit-ball tag");
        }
        return inputs;
    }
    if (m == 0) return {InputSignal::none()};
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<InputSignal> out{InputSignal::zero(m),
                                 InputSignal::constant(Vec(static_cast<std::size_t>(m), scale), true),
                                 InputSignal::constant(Vec(static_cast<std::size_t>(m), -scale), true)};
    std::mt19937_64 rng(seed ^ kInputStream);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const auto draw = [&](std::mt19937_64& g) { return unif(g) * scale; };
    for (int i = 0; i < random_inputs; ++i) out.push_back(random_pwc(m, segments, horizon, rng, draw, true));
    return out;
}

Json SampleGrid::to_json() const {
    Json extra = Json::array();
    for (const auto& x : extra_states) extra.push_back(to_json_array(x));
    Json ins = Json::array();
    for (const auto& u : inputs) ins.push_back(u.to_json());
    return Json{{"radii", to_json_array(radii)},
                {"states_per_radius", states_per_radius},
                {"extra_states", extra},
                {"inputs", ins},
                {"levels", to_json_array(levels)},
                {"segments", segments},
                {"random_inputs", random_inputs},
                {"horizon", horizon},
                {"step", integrator.step},
                {"seed", seed}};
}

// ---------------------------------------------------------------- reports

Json EstimateReport::to_json() const {
    Json w = nullptr;
    if (witness) {
        w = Json{{"xi", to_json_array(witness->xi)},
                 {"input", witness->input},
                 {"t", witness->t},
                 {"observed", witness->observed},
                 {"bound", witness->bound}};
    }
    return Json{{"property", std::string(to_string(property))},
                {"verdict", holds() ? "holds-on-grid" : "violated"},
                {"worst_margin", worst_margin},
                {"witness", w},
                {"grid", grid},
                {"samples", samples},
                {"details", details}};
}

void MarginTracker::observe(double bound, double observed, const Vec& xi, const InputSignal* input, double t) {
    const double margin = bound - observed;
    if (margin < worst_) {
        worst_ = margin;
        at_.xi = xi;
        at_.input = input ? input->to_json() : Json(nullptr);
        at_.t = t;
        at_.observed = observed;
        at_.bound = bound;
        has_ = true;
    }
}

void MarginTracker::merge(const MarginTracker& other) {
    if (other.has_ && other.worst_ < worst_) {
        worst_ = other.worst_;
        at_ = other.at_;
        has_ = true;
    }
}

EstimateReport MarginTracker::report(PropertyKind kind, Json grid, std::size_t samples) const {
    EstimateReport r;
    r.property = kind;
    r.worst_margin = worst_;
    r.grid = std::move(grid);
    r.samples = samples;
    if (has_ && worst_ < 0.0) r.witness = at_;
    return r;
}

namespace {

// Only converts the input to JSON when the margin improves; cheap in the common case.
struct LazyTracker {
    double worst = std::numeric_limits<double>::infinity();
    double t = 0.0, observed = 0.0, bound = 0.0;
    bool seen = false;
    void observe(double b, double o, double time) {
        if (b - o < worst) {
            worst = b - o;
            t = time;
            observed = o;
            bound = b;
            seen = true;
        }
    }
};

[[noreturn]] void incomplete(const Trajectory& traj, const Vec& xi, const InputSignal& u, const std::string& what) {
    throw Error(ErrorKind::ForwardCompleteness, what + ": trajectory left the blow-up threshold",
                Json{{"xi", to_json_array(xi)},
                     {"input", u.to_json()},
                     {"blowup_time", traj.end_time},
                     {"blowup_norm", traj.blowup_norm}});
}

template <class Observe>
MarginTracker batch(const std::vector<Vec>& states, const std::vector<InputSignal>& inputs, Observe&& observe_one) {
    const std::size_t total = states.size() * inputs.size();
    std::vector<LazyTracker> results(total);
    parallel_for(total, [&](std::size_t idx) {
        const auto& xi = states[idx / inputs.size()];
        const auto& u = inputs[idx % inputs.size()];
        observe_one(xi, u, results[idx]);
    });
    MarginTracker tracker;
    for (std::size_t idx = 0; idx < total; ++idx) {
        const auto& r = results[idx];
        if (!r.seen) continue;
        MarginTracker one;
        one.observe(r.bound, r.observed, states[idx / inputs.size()], &inputs[idx % inputs.size()], r.t);
        tracker.merge(one);
    }
    return tracker;
}

const ComparisonFunction& need(const std::optional<ComparisonFunction>& f, const char* name) {
    if (!f) throw Error(ErrorKind::Usage, std::string("missing gain: ") + name);
    return *f;
}

}  // namespace

EstimateReport verify_estimate(const ControlSystem& sys, PropertyKind kind, const EstimateGains& gains,
                               const SampleGrid& grid) {
    if (kind != PropertyKind::IOS && kind != PropertyKind::OL && kind != PropertyKind::SIOS &&
        kind != PropertyKind::UBIBS)
        throw Error(ErrorKind::Usage, "verify_estimate handles IOS, OL, SIOS and UBIBS");
    if ((kind == PropertyKind::IOS || kind == PropertyKind::SIOS) && (!gains.beta || !gains.gamma))
        throw Error(ErrorKind::Usage, "IOS and SIOS need beta and gamma");
    if (kind == PropertyKind::OL) {
        need(gains.sigma1, "sigma1");
        need(gains.sigma2, "sigma2");
    }
    if (kind == PropertyKind::UBIBS) need(gains.sigma, "sigma");

    const auto states = grid.states(sys.n());
    const auto inputs = grid.input_family(sys.m());
    const auto tracker = batch(states, inputs, [&](const Vec& xi, const InputSignal& u, LazyTracker& out) {
        const auto traj = simulate(sys, xi, u, grid.horizon, grid.integrator);
        if (!traj.complete()) incomplete(traj, xi, u, "forward completeness");
        const double unorm = sup_norm(u, grid.horizon);
        const double xnorm = euclidean_norm(xi);
        const double hnorm = sys.output_norm(xi);
        double fixed = 0.0;
        switch (kind) {
            case PropertyKind::OL: fixed = std::max((*gains.sigma1)(hnorm), (*gains.sigma2)(unorm)); break;
            case PropertyKind::UBIBS: fixed = std::max((*gains.sigma)(xnorm), (*gains.sigma)(unorm)); break;
            default: fixed = (*gains.gamma)(unorm); break;
        }
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = traj.times[k];
            double bound = fixed;
            if (kind == PropertyKind::IOS) bound = std::max((*gains.beta)(xnorm, t), fixed);
            if (kind == PropertyKind::SIOS) bound = std::max((*gains.beta)(hnorm, t), fixed);
            const double observed = kind == PropertyKind::UBIBS ? traj.state_norm(k) : traj.output_norm(k);
            out.observe(bound, observed, t);
        }
    });
    auto report = tracker.report(kind, grid.to_json(), states.size() * inputs.size());
    report.details = Json{{"form", "max"}, {"input_norm_window", "[0, horizon]"}};
    return report;
}

// ---------------------------------------------------------------- ROS

RosResult verify_ros(const ControlSystem& sys, const ComparisonFunction& lambda, const KLSurface& beta,
                     const SampleGrid& grid, const RosChecks& checks) {
    if (lambda.cls() != GainClass::KInfinity) throw Error(ErrorKind::Usage, "ROS margin must be class K-infinity");
    const FeedbackLoop loop(sys, lambda);
    const auto disturbances = grid.disturbance_family(sys.m());
    const auto run = [&](const Vec& xi, const InputSignal& d) {
        auto traj = simulate_closed_loop(loop, xi, d, grid.horizon, grid.integrator);
        if (!traj.complete()) incomplete(traj, xi, d, "closed loop forward completeness");
        return traj;
    };

    RosResult result;
    const auto states = grid.states(sys.n());
    const auto decay = batch(states, disturbances, [&](const Vec& xi, const InputSignal& d, LazyTracker& out) {
        const auto traj = run(xi, d);
        const double xnorm = euclidean_norm(xi);
        for (std::size_t k = 0; k < traj.size(); ++k)
            out.observe(beta(xnorm, traj.times[k]), traj.output_norm(k), traj.times[k]);
    });
    result.decay = decay.report(PropertyKind::ROS, grid.to_json(), states.size() * disturbances.size());
    result.decay.details = Json{{"lambda", lambda.to_json()}, {"beta", beta.to_json()}};

    if (!checks.p1.empty()) {
        MarginTracker all;
        std::size_t samples = 0;
        Json levels = Json::array();
        for (const auto& [eps, delta] : checks.p1) {
            const auto pts = sphere_points(sys.n(), {delta, 0.5 * delta}, grid.states_per_radius, grid.seed ^ kRosCheckStream);
            all.merge(batch(pts, disturbances, [&](const Vec& xi, const InputSignal& d, LazyTracker& out) {
                const auto traj = run(xi, d);
                for (std::size_t k = 0; k < traj.size(); ++k) out.observe(eps, traj.output_norm(k), traj.times[k]);
            }));
            samples += pts.size() * disturbances.size();
            levels.push_back(Json::array({eps, delta}));
        }
        result.p1 = all.report(PropertyKind::RosSmallOutput, grid.to_json(), samples);
        result.p1->details = Json{{"eps_delta", levels}};
    }
    if (!checks.p2.empty()) {
        MarginTracker all;
        std::size_t samples = 0;
        Json triples = Json::array();
        for (const auto& c : checks.p2) {
            const auto pts = sphere_points(sys.n(), {c.r, 0.5 * c.r}, grid.states_per_radius, grid.seed ^ kRosCheckStream);
            all.merge(batch(pts, disturbances, [&](const Vec& xi, const InputSignal& d, LazyTracker& out) {
                const auto traj = run(xi, d);
                for (std::size_t k = 0; k < traj.size(); ++k)
                    if (traj.times[k] >= c.T) out.observe(c.eps, traj.output_norm(k), traj.times[k]);
            }));
            samples += pts.size() * disturbances.size();
            triples.push_back(Json::array({c.r, c.eps, c.T}));
        }
        result.p2 = all.report(PropertyKind::RosSettling, grid.to_json(), samples);
        result.p2->details = Json{{"r_eps_T", triples}};
    }
    return result;
}

// ---------------------------------------------------------------- empirical beta

KLSurface fit_empirical_beta(const ControlSystem& sys, const SampleGrid& grid) {
    const auto states = grid.states(sys.n());
    if (states.empty()) throw Error(ErrorKind::Usage, "empirical fit needs at least one state");
    const InputSignal zero = InputSignal::zero(sys.m());
    std::vector<Trajectory> trajs(states.size());
    parallel_for(states.size(), [&](std::size_t i) {
        trajs[i] = simulate(sys, states[i], zero, grid.horizon, grid.integrator);
        if (!trajs[i].complete()) incomplete(trajs[i], states[i], zero, "empirical fit aborted");
    });
    const auto& times = trajs.front().times;
    std::map<double, std::vector<double>> rows;  // |ξ| -> envelope of |y(t)|
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double r = euclidean_norm(states[i]);
        if (r == 0.0) continue;
        auto& row = rows[r];
        row.resize(times.size(), 0.0);
        for (std::size_t k = 0; k < times.size(); ++k) row[k] = std::max(row[k], trajs[i].output_norm(k));
    }
    std::vector<double> r_grid{0.0};
    std::vector<std::vector<double>> values{std::vector<double>(times.size(), 0.0)};
    for (auto& [r, row] : rows) {
        r_grid.push_back(r);
        values.push_back(std::move(row));
    }
    if (r_grid.size() < 2) throw Error(ErrorKind::Usage, "empirical fit needs a nonzero state");
    if (times.size() < 2) throw Error(ErrorKind::Usage, "empirical fit needs a positive horizon");
    return KLSurface::grid(std::move(r_grid), times, std::move(values));
}

// ---------------------------------------------------------------- refutation search

Json ViolationWitness::to_json() const {
    Json doc{{"kind", std::string(to_string(kind))},
             {"xi", to_json_array(xi)},
             {"t", t},
             {"observed", observed},
             {"reference", reference}};
    if (kind == PropertyKind::SIOS) {
        doc["xi_other"] = to_json_array(xi_other);
        doc["ratio"] = ratio;
    }
    return doc;
}

std::optional<double> output_half_time(const Trajectory& traj) {
    if (traj.size() == 0) return std::nullopt;
    const double target = 0.5 * traj.output_norm(0);
    if (!(target > 0.0)) return std::nullopt;
    double prev = traj.output_norm(0);
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double cur = traj.output_norm(k);
        if (cur <= target) {
            const double w = (prev - target) / (prev - cur);
            return traj.times[k - 1] + w * (traj.times[k] - traj.times[k - 1]);
        }
        prev = cur;
    }
    return std::nullopt;
}

namespace {

std::vector<Vec> axis_states(int n, const std::vector<double>& radii) {
    std::vector<Vec> out;
    for (double r : radii)
        for (int i = 0; i < n; ++i)
            for (double sgn : {1.0, -1.0}) {
                Vec x(static_cast<std::size_t>(n), 0.0);
                x[static_cast<std::size_t>(i)] = sgn * r;
                out.push_back(std::move(x));
            }
    return out;
}

bool same_vector(const Vec& a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
    return true;
}

}  // namespace

std::optional<ViolationWitness> find_estimate_violation(const ControlSystem& sys, PropertyKind kind,
                                                        const SampleGrid& grid, const ViolationOptions& options) {
    if (kind != PropertyKind::OL && kind != PropertyKind::SIOS)
        throw Error(ErrorKind::Usage, "violation search supports OL and SIOS");
    const InputSignal zero = InputSignal::zero(sys.m());
    std::vector<Vec> base = axis_states(sys.n(), grid.radii);
    for (auto& x : grid.states(sys.n())) base.push_back(std::move(x));

    if (kind == PropertyKind::OL) {
        std::vector<Vec> cands;
        for (auto& x : base)
            if (sys.output_norm(x) <= 1e-12 && euclidean_norm(x) > 0.0) cands.push_back(std::move(x));
        std::vector<std::pair<double, double>> sup(cands.size());  // (sup |y|, argmax t)
        parallel_for(cands.size(), [&](std::size_t i) {
            const auto traj = simulate(sys, cands[i], zero, grid.horizon, grid.integrator);
            if (!traj.complete()) incomplete(traj, cands[i], zero, "violation search");
            for (std::size_t k = 0; k < traj.size(); ++k)
                if (traj.output_norm(k) > sup[i].first) sup[i] = {traj.output_norm(k), traj.times[k]};
        });
        std::optional<ViolationWitness> best;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (sup[i].first > options.ol_threshold && (!best || sup[i].first > best->observed)) {
                ViolationWitness w;
                w.kind = kind;
                w.xi = cands[i];
                w.t = sup[i].second;
                w.observed = sup[i].first;
                w.reference = sys.output_norm(cands[i]);
                best = w;
            }
        }
        return best;
    }

    // SIOS: pairs with the same output value, built by moving along coordinates
    // that leave h unchanged.
    std::vector<Vec> cands;
    for (const auto& x : base) {
        if (sys.output_norm(x) <= 1e-12) continue;
        cands.push_back(x);
        const Vec hx = sys.output(x);
        for (double r : grid.radii)
            for (int i = 0; i < sys.n(); ++i) {
                Vec moved = x;
                moved[static_cast<std::size_t>(i)] += r;
                if (same_vector(sys.output(moved), hx)) cands.push_back(std::move(moved));
            }
    }
    std::vector<std::optional<double>> half(cands.size());
    parallel_for(cands.size(), [&](std::size_t i) {
        const auto traj = simulate(sys, cands[i], zero, grid.horizon, grid.integrator);
        if (!traj.complete()) incomplete(traj, cands[i], zero, "violation search");
        half[i] = output_half_time(traj);
    });
    std::optional<ViolationWitness> best;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const double hi_norm = sys.output_norm(cands[i]);
        for (std::size_t j = 0; j < cands.size(); ++j) {
            if (i == j || !half[j]) continue;
            const double hj = sys.output_norm(cands[j]);
            if (std::abs(hi_norm - hj) > 1e-9 * std::max(1.0, hj)) continue;
            // a trajectory that never halves counts with the horizon as a lower bound
            const double slow = half[i] ? *half[i] : grid.horizon;
            const double fast = *half[j];
            if (!(fast > 0.0)) continue;
            const double ratio = slow / fast;
            if (ratio > options.sios_factor && (!best || ratio > best->ratio)) {
                ViolationWitness w;
                w.kind = kind;
                w.xi = cands[i];
                w.xi_other = cands[j];
                w.observed = slow;
                w.reference = fast;
                w.ratio = ratio;
                w.t = slow;
                best = w;
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------- Lyapunov

std::vector<Vec> box_lattice(const Vec& lo, const Vec& hi, int per_dim) {
    if (lo.size() != hi.size() || lo.empty() || per_dim < 1) throw Error(ErrorKind::Usage, "invalid lattice box");
    const std::size_t n = lo.size();
    std::vector<std::vector<double>> axes;
    for (std::size_t i = 0; i < n; ++i) axes.push_back(linspace(lo[i], hi[i], per_dim));
    std::vector<Vec> out;
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        Vec x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = axes[i][idx[i]];
        out.push_back(std::move(x));
        std::size_t d = 0;
        while (d < n && ++idx[d] == axes[d].size()) idx[d++] = 0;
        if (d == n) break;
    }
    return out;
}

EstimateReport lyapunov_decrease_check(const ControlSystem& sys, const ScalarField& v, const ComparisonFunction& chi,
                                       const std::vector<Vec>& states, const std::vector<Vec>& input_values) {
    if (!v.value) throw Error(ErrorKind::Usage, "Lyapunov check needs V");
    const Vec origin(static_cast<std::size_t>(sys.n()), 0.0);
    if (std::abs(v.value(origin)) > 1e-12) throw Error(ErrorKind::Precondition, "V(0) must be 0");
    std::vector<Vec> mus = input_values;
    if (mus.empty()) mus.push_back(Vec(static_cast<std::size_t>(sys.m()), 0.0));

    MarginTracker tracker;
    std::size_t checked = 0;
    for (const auto& xi : states) {
        if (static_cast<int>(xi.size()) != sys.n()) throw Error(ErrorKind::Usage, "grid state has wrong dimension");
        const double vx = v.value(xi);
        if (vx < 0.0) throw Error(ErrorKind::Precondition, "V is negative on the grid", Json{{"xi", to_json_array(xi)}});
        if (vx == 0.0) continue;
        const double h = 1e-6 * std::max(1.0, euclidean_norm(xi));
        Vec fd(xi.size());
        for (std::size_t i = 0; i < xi.size(); ++i) {
            Vec a = xi, b = xi;
            a[i] += h;
            b[i] -= h;
            fd[i] = (v.value(a) - v.value(b)) / (2.0 * h);
        }
        Vec grad = fd;
        if (v.gradient) {
            grad = v.gradient(xi);
            if (grad.size() != xi.size()) throw Error(ErrorKind::Usage, "gradient has wrong dimension");
            for (std::size_t i = 0; i < xi.size(); ++i)
                if (std::abs(grad[i] - fd[i]) > 1e-4 * std::max(1.0, std::abs(fd[i])))
                    throw Error(ErrorKind::Numerical, "supplied gradient disagrees with finite differences",
                                Json{{"xi", to_json_array(xi)}, {"supplied", to_json_array(grad)},
                                     {"finite_difference", to_json_array(fd)}});
        }
        for (const auto& mu : mus) {
            if (static_cast<int>(mu.size()) != sys.m()) throw Error(ErrorKind::Usage, "input value has wrong dimension");
            if (vx < chi(euclidean_norm(mu))) continue;
            const Vec dx = sys.rhs(xi, mu);
            double dv = 0.0;
            for (std::size_t i = 0; i < dx.size(); ++i) dv += grad[i] * dx[i];
            const InputSignal as_input = InputSignal::constant(mu);
            tracker.observe(0.0, dv, xi, &as_input, 0.0);
            ++checked;
        }
    }
    auto report = tracker.report(PropertyKind::LyapDecrease,
                                 Json{{"states", states.size()}, {"input_values", mus.size()}}, checked);
    report.details = Json{{"margin", "-DV(xi) f(xi, mu)"}};
    return report;
}

}  // namespace ioslab
