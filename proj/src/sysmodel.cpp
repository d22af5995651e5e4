#include "ioslab/sysmodel.hpp"

#include "ioslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace ioslab {

double euclidean_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

// ---------------------------------------------------------------- ControlSystem

ControlSystem::ControlSystem(std::string name, int n, int m, int p, Dynamics f, OutputMap h, int guard_count,
                             GuardMap guards)
    : name_(std::move(name)), n_(n), m_(m), p_(p), f_(std::move(f)), h_(std::move(h)), guard_count_(guard_count),
      guards_(std::move(guards)) {
    if (n_ < 1 || p_ < 1 || m_ < 0) throw Error(ErrorKind::Usage, "invalid system dimensions");
    if (!f_ || !h_) throw Error(ErrorKind::Usage, "system needs both f and h");
    if (guard_count_ > 0 && !guards_) throw Error(ErrorKind::Usage, "guard count given without guard functions");
    const Vec zero_x(static_cast<std::size_t>(n_), 0.0), zero_u(static_cast<std::size_t>(m_), 0.0);
    const Vec dx = rhs(zero_x, zero_u);
    const Vec y = output(zero_x);
    if (euclidean_norm(dx) > 1e-12 || euclidean_norm(y) > 1e-12)
        throw Error(ErrorKind::Usage, "system " + name_ + " violates f(0,0) = 0 or h(0) = 0");
}

Vec ControlSystem::rhs(std::span<const double> x, std::span<const double> u) const {
    Vec dx(static_cast<std::size_t>(n_), 0.0);
    f_(x, u, dx);
    return dx;
}

Vec ControlSystem::output(std::span<const double> x) const {
    Vec y(static_cast<std::size_t>(p_), 0.0);
    h_(x, y);
    return y;
}

// ---------------------------------------------------------------- InputSignal

InputSignal::InputSignal(std::vector<double> breakpoints, std::vector<Vec> values, std::optional<double> domain_end,
                         bool unit_ball)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)), domain_end_(domain_end),
      unit_ball_(unit_ball) {
    if (breakpoints_.empty() || breakpoints_.front() != 0.0)
        throw Error(ErrorKind::Usage, "input breakpoints must start at 0");
    if (breakpoints_.size() != values_.size())
        throw Error(ErrorKind::Usage, "input needs one value per breakpoint");
    for (std::size_t k = 1; k < breakpoints_.size(); ++k)
        if (!(breakpoints_[k] > breakpoints_[k - 1]) || !std::isfinite(breakpoints_[k]))
            throw Error(ErrorKind::Usage, "input breakpoints must strictly increase");
    dim_ = static_cast<int>(values_.front().size());
    for (const auto& v : values_) {
        if (static_cast<int>(v.size()) != dim_) throw Error(ErrorKind::Usage, "input values differ in dimension");
        for (double c : v)
            if (!std::isfinite(c)) throw Error(ErrorKind::Usage, "input values must be finite");
        if (unit_ball_ && euclidean_norm(v) > 1.0 + 1e-12)
            throw Error(ErrorKind::Usage, "unit-ball input has a value of norm above 1");
    }
    if (domain_end_ && !(*domain_end_ > breakpoints_.back()))
        throw Error(ErrorKind::Usage, "input domain must end after the last breakpoint");
}

InputSignal InputSignal::constant(Vec value, bool unit_ball) {
    return InputSignal({0.0}, {std::move(value)}, std::nullopt, unit_ball);
}

InputSignal InputSignal::zero(int m) { return constant(Vec(static_cast<std::size_t>(m), 0.0), true); }

const Vec& InputSignal::at(double t) const {
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    const auto k = it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return values_[k];
}

InputSignal InputSignal::shifted(double tau) const {
    if (!(tau >= 0.0)) throw Error(ErrorKind::Usage, "shift must be nonnegative");
    std::vector<double> bps{0.0};
    std::vector<Vec> vals{at(tau)};
    for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
        if (breakpoints_[k] > tau) {
            bps.push_back(breakpoints_[k] - tau);
            vals.push_back(values_[k]);
        }
    }
    std::optional<double> end;
    if (domain_end_) end = *domain_end_ - tau;
    if (end && !(*end > bps.back())) throw Error(ErrorKind::Usage, "shift beyond the input domain");
    return InputSignal(std::move(bps), std::move(vals), end, unit_ball_);
}

InputSignal InputSignal::with_unit_ball(bool flag) const {
    return InputSignal(breakpoints_, values_, domain_end_, flag);
}

Json InputSignal::to_json() const {
    Json values = Json::array();
    for (const auto& v : values_) values.push_back(to_json_array(v));
    Json doc{{"breakpoints", to_json_array(breakpoints_)},
             {"values", values},
             {"hold_last", !domain_end_.has_value()},
             {"unit_ball", unit_ball_}};
    if (domain_end_) doc["domain_end"] = *domain_end_;
    return doc;
}

InputSignal InputSignal::from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("breakpoints") || !doc.contains("values"))
        throw Error(ErrorKind::Usage, "input JSON needs breakpoints and values");
    std::vector<Vec> values;
    for (const auto& v : doc.at("values")) values.push_back(v.is_array() ? doubles_from_json(v) : Vec{v.get<double>()});
    std::optional<double> end;
    if (!doc.value("hold_last", true)) {
        if (!doc.contains("domain_end")) throw Error(ErrorKind::Usage, "hold_last=false needs domain_end");
        end = doc.at("domain_end").get<double>();
    }
    return InputSignal(doubles_from_json(doc.at("breakpoints")), std::move(values), end, doc.value("unit_ball", false));
}

InputSignal concat_inputs(const InputSignal& v, double tau, const InputSignal& u) {
    if (!(tau >= 0.0)) throw Error(ErrorKind::Usage, "concatenation time must be nonnegative");
    if (v.dim() != u.dim()) throw Error(ErrorKind::Usage, "concatenated inputs differ in dimension");
    if (tau == 0.0) return u;
    std::vector<double> bps;
    std::vector<Vec> vals;
    for (std::size_t k = 0; k < v.breakpoints().size(); ++k) {
        if (v.breakpoints()[k] < tau) {
            bps.push_back(v.breakpoints()[k]);
            vals.push_back(v.values()[k]);
        }
    }
    for (std::size_t k = 0; k < u.breakpoints().size(); ++k) {
        bps.push_back(tau + u.breakpoints()[k]);
        vals.push_back(u.values()[k]);
    }
    std::optional<double> end;
    if (u.domain_end()) end = tau + *u.domain_end();
    return InputSignal(std::move(bps), std::move(vals), end, v.unit_ball() && u.unit_ball());
}

double sup_norm(const InputSignal& u, std::optional<double> t) {
    double limit = t ? *t : std::numeric_limits<double>::infinity();
    if (u.domain_end()) limit = std::min(limit, *u.domain_end());
    double best = 0.0;
    for (std::size_t k = 0; k < u.breakpoints().size(); ++k)
        if (u.breakpoints()[k] < limit) best = std::max(best, euclidean_norm(u.values()[k]));
    return best;
}

// ---------------------------------------------------------------- Trajectory

std::string Trajectory::to_csv() const {
    std::string out = "t";
    for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
    for (int i = 1; i <= p; ++i) out += ",y" + std::to_string(i);
    for (int i = 1; i <= m; ++i) out += ",u" + std::to_string(i);
    out += "\n";
    for (std::size_t k = 0; k < size(); ++k) {
        out += format_double(times[k]);
        for (double v : state(k)) out += "," + format_double(v);
        for (double v : output(k)) out += "," + format_double(v);
        for (double v : input(k)) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------- integrator

class Integrator::Impl {
public:
    Impl(const ControlSystem& sys, const IntegratorOptions& opt)
        : sys_(sys), opt_(opt), n_(static_cast<std::size_t>(sys.n())),
          guards_(static_cast<std::size_t>(sys.guard_count())) {
        refine_ = opt.refinement == Refinement::On || (opt.refinement == Refinement::Auto && sys.guard_count() > 0);
        k1_.resize(n_);
        k2_.resize(n_);
        k3_.resize(n_);
        k4_.resize(n_);
        tmp_.resize(n_);
        levels_.reserve(static_cast<std::size_t>(std::max(opt.max_depth, 0)) + 1);
    }

    // Advances x over dt with the input held at u.
    void advance(std::span<double> x, std::span<const double> u, double dt) {
        if (!refine_) {
            rk4(x, u, dt, x);
            return;
        }
        advance_refined(x, u, dt, 0);
    }

private:
    struct Level {
        Vec full, half, end, g0, g1, g2;
    };

    void rk4(std::span<const double> x, std::span<const double> u, double dt, std::span<double> out) {
        sys_.f(x, u, k1_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + 0.5 * dt * k1_[i];
        sys_.f(tmp_, u, k2_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + 0.5 * dt * k2_[i];
        sys_.f(tmp_, u, k3_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + dt * k3_[i];
        sys_.f(tmp_, u, k4_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = x[i] + dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }

    Level& level(int depth) {
        while (static_cast<int>(levels_.size()) <= depth) {
            Level l;
            l.full.resize(n_);
            l.half.resize(n_);
            l.end.resize(n_);
            l.g0.resize(guards_);
            l.g1.resize(guards_);
            l.g2.resize(guards_);
            levels_.push_back(std::move(l));
        }
        return levels_[static_cast<std::size_t>(depth)];
    }

    bool guard_crossed(std::span<const double> a, std::span<const double> b) const {
        for (std::size_t i = 0; i < guards_; ++i) {
            if ((a[i] < 0.0) != (b[i] < 0.0) && std::abs(b[i] - a[i]) > opt_.guard_resolution) return true;
        }
        return false;
    }

    // Step doubling: accept two half steps when they agree with the full step and
    // no guard surface is jumped over coarsely, otherwise split the interval.
    void advance_refined(std::span<double> x, std::span<const double> u, double dt, int depth) {
        Level& lv = level(depth);
        rk4(x, u, dt, lv.full);
        rk4(x, u, 0.5 * dt, lv.half);
        bool split = false;
        if (depth < opt_.max_depth) {
            if (guards_ > 0) {
                sys_.guards(x, lv.g0);
                sys_.guards(lv.half, lv.g1);
            }
            Vec& end = lv.end;
            rk4(lv.half, u, 0.5 * dt, end);
            if (guards_ > 0) {
                sys_.guards(end, lv.g2);
                split = guard_crossed(lv.g0, lv.g1) || guard_crossed(lv.g1, lv.g2);
            }
            if (!split) {
                double err = 0.0;
                for (std::size_t i = 0; i < n_; ++i)
                    err = std::max(err, std::abs(lv.full[i] - end[i]) / (1.0 + std::abs(end[i])));
                split = !(err <= opt_.refine_tol);
            }
            if (!split) {
                std::copy(end.begin(), end.end(), x.begin());
                return;
            }
            advance_refined(x, u, 0.5 * dt, depth + 1);
            advance_refined(x, u, 0.5 * dt, depth + 1);
            return;
        }
        std::copy(lv.full.begin(), lv.full.end(), x.begin());
    }

    const ControlSystem& sys_;
    const IntegratorOptions& opt_;
    std::size_t n_;
    std::size_t guards_;
    bool refine_ = false;
    Vec k1_, k2_, k3_, k4_, tmp_;
    std::vector<Level> levels_;
};

Integrator::Integrator(const ControlSystem& sys, const IntegratorOptions& options)
    : options_(options), impl_(std::make_unique<Impl>(sys, options_)) {}

Integrator::~Integrator() = default;

void Integrator::advance(std::span<double> x, std::span<const double> u, double dt) { impl_->advance(x, u, dt); }

namespace {


std::vector<double> time_grid(double horizon, double step, const InputSignal& u) {
    std::vector<double> grid;
    const double count = std::floor(horizon / step + 1e-9);
    const auto n_steps = static_cast<std::size_t>(count);
    grid.reserve(n_steps + 2);
    for (std::size_t k = 0; k <= n_steps; ++k) grid.push_back(std::min(static_cast<double>(k) * step, horizon));
    if (horizon - grid.back() > 1e-9 * step) grid.push_back(horizon);
    else grid.back() = horizon;
    const double snap = 1e-6 * step;
    std::vector<double> extra;
    for (double b : u.breakpoints()) {
        if (b <= 0.0 || b >= horizon) continue;
        const auto it = std::lower_bound(grid.begin(), grid.end(), b);
        const bool near_next = it != grid.end() && *it - b <= snap;
        const bool near_prev = it != grid.begin() && b - *(it - 1) <= snap;
        if (!near_next && !near_prev) extra.push_back(b);
    }
    if (!extra.empty()) {
        grid.insert(grid.end(), extra.begin(), extra.end());
        std::sort(grid.begin(), grid.end());
    }
    return grid;
}

// Value acting on [a, b): breakpoints within the snapping tolerance count as grid points.
const Vec& value_on(const InputSignal& u, double a, double b) { return u.at(0.5 * (a + b)); }

Trajectory integrate(const ControlSystem& sys, std::span<const double> xi, const InputSignal& u, double horizon,
                     const IntegratorOptions& opt, const FeedbackLoop* loop) {
    if (static_cast<int>(xi.size()) != sys.n())
        throw Error(ErrorKind::Usage, "initial state has wrong dimension",
                    Json{{"expected", sys.n()}, {"got", xi.size()}});
    if (u.dim() != sys.m())
        throw Error(ErrorKind::Usage, "input has wrong dimension", Json{{"expected", sys.m()}, {"got", u.dim()}});
    if (!(opt.step > 0.0) || !std::isfinite(opt.step)) throw Error(ErrorKind::Usage, "step must be positive");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw Error(ErrorKind::Usage, "horizon must be nonnegative");
    if (u.domain_end() && horizon > *u.domain_end())
        throw Error(ErrorKind::Usage, "horizon exceeds the input domain");
    for (double v : xi)
        if (!std::isfinite(v)) throw Error(ErrorKind::Usage, "initial state must be finite");

    const auto grid = time_grid(horizon, opt.step, u);
    const auto n = static_cast<std::size_t>(sys.n());
    const auto p = static_cast<std::size_t>(sys.p());
    const auto m = static_cast<std::size_t>(sys.m());
    Trajectory traj;
    traj.n = sys.n();
    traj.m = sys.m();
    traj.p = sys.p();
    traj.times.reserve(grid.size());
    traj.states.reserve(grid.size() * n);
    traj.outputs.reserve(grid.size() * p);
    traj.inputs.reserve(grid.size() * m);

    Vec x(xi.begin(), xi.end());
    Vec y(p);
    Integrator stepper(sys, opt);
    const auto record = [&](double t, const Vec& d) {
        traj.times.push_back(t);
        traj.states.insert(traj.states.end(), x.begin(), x.end());
        sys.h(x, y);
        traj.outputs.insert(traj.outputs.end(), y.begin(), y.end());
        if (loop) {
            const Vec eff = loop->effective_input(x, d);
            traj.inputs.insert(traj.inputs.end(), eff.begin(), eff.end());
        } else {
            traj.inputs.insert(traj.inputs.end(), d.begin(), d.end());
        }
    };

    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const Vec& d = value_on(u, grid[k], grid[k + 1]);
        record(grid[k], d);
        stepper.advance(x, d, grid[k + 1] - grid[k]);
        bool finite = true;
        for (double v : x) finite = finite && std::isfinite(v);
        if (!finite)
            throw Error(ErrorKind::Numerical, "non-finite state during integration",
                        Json{{"last_valid_time", grid[k]}, {"system", sys.name()}});
        const double norm = euclidean_norm(x);
        if (norm > opt.blowup_threshold) {
            record(grid[k + 1], d);
            traj.status = Completion::Incomplete;
            traj.end_time = grid[k + 1];
            traj.blowup_norm = norm;
            return traj;
        }
    }
    record(grid.back(), u.at(grid.back()));
    traj.status = Completion::Complete;
    traj.end_time = grid.back();
    return traj;
}

}  // namespace

Trajectory simulate(const ControlSystem& sys, std::span<const double> xi, const InputSignal& u, double horizon,
                    const IntegratorOptions& options) {
    return integrate(sys, xi, u, horizon, options, nullptr);
}

Trajectory simulate(const ControlSystem& sys, std::span<const double> xi, const InputSignal& u, double horizon,
                    double step) {
    IntegratorOptions opt;
    opt.step = step;
    return simulate(sys, xi, u, horizon, opt);
}

// ---------------------------------------------------------------- FeedbackLoop

namespace {

ControlSystem make_closed(const ControlSystem& base, const ComparisonFunction& lambda) {
    auto b = std::make_shared<const ControlSystem>(base);
    auto lam = std::make_shared<const ComparisonFunction>(lambda);
    const auto p = static_cast<std::size_t>(base.p());
    const auto m = static_cast<std::size_t>(base.m());
    Dynamics g = [b, lam, p, m](std::span<const double> x, std::span<const double> d, std::span<double> dx) {
        double y_buf[16];
        Vec y_heap;
        std::span<double> y(y_buf, std::min<std::size_t>(p, 16));
        if (p > 16) {
            y_heap.resize(p);
            y = y_heap;
        }
        b->h(x, y);
        const double gain = (*lam)(euclidean_norm(y));
        double u_buf[16];
        Vec u_heap;
        std::span<double> u(u_buf, std::min<std::size_t>(m, 16));
        if (m > 16) {
            u_heap.resize(m);
            u = u_heap;
        }
        for (std::size_t i = 0; i < m; ++i) u[i] = d[i] * gain;
        b->f(x, u, dx);
    };
    OutputMap h = [b](std::span<const double> x, std::span<double> y) { b->h(x, y); };
    GuardMap guards;
    if (base.guard_count() > 0) guards = [b](std::span<const double> x, std::span<double> g) { b->guards(x, g); };
    return ControlSystem(base.name() + "-closed", base.n(), base.m(), base.p(), std::move(g), std::move(h),
                         base.guard_count(), std::move(guards));
}

}  // namespace

FeedbackLoop::FeedbackLoop(ControlSystem base, ComparisonFunction lambda)
    : base_(std::move(base)), lambda_(std::move(lambda)), closed_(make_closed(base_, lambda_)) {}

Vec FeedbackLoop::effective_input(std::span<const double> x, std::span<const double> d) const {
    const double gain = lambda_(base_.output_norm(x));
    Vec u(d.begin(), d.end());
    for (double& v : u) v *= gain;
    return u;
}

Trajectory simulate_closed_loop(const FeedbackLoop& loop, std::span<const double> xi, const InputSignal& d,
                                double horizon, const IntegratorOptions& options) {
    if (!d.unit_ball()) throw Error(ErrorKind::Usage, "closed-loop disturbance must carry the unit-ball tag");
    return integrate(loop.system(), xi, d, horizon, options, &loop);
}

}  // namespace ioslab
