#include "ioslab/redefine.hpp"

#include "ioslab/errors.hpp"
#include "ioslab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ioslab {

RedefinitionConfig::RedefinitionConfig(ComparisonFunction gamma_, KLSurface beta_)
    : gamma(std::move(gamma_)), beta(std::move(beta_)) {
    if (gamma.cls() != GainClass::KInfinity) throw Error(ErrorKind::Usage, "redefinition needs a K-infinity gamma");
    sanity.radii = {0.5, 1.0};
    sanity.states_per_radius = 3;
    sanity.levels = {0.5, 1.0};
    sanity.random_inputs = 2;
    sanity.horizon = 5.0;
    sanity.integrator.step = 0.01;
}

double RedefinitionConfig::amplitude_cap(double xi_norm) const { return gamma.inverse(beta.at_zero(xi_norm)); }

Json RedefinitionConfig::to_json() const {
    return Json{{"gamma", gamma.to_json()},
                {"beta", beta.to_json()},
                {"search",
                 {{"segments", search.segments},
                  {"levels", search.levels},
                  {"random_restarts", search.random_restarts},
                  {"seed", search.seed}}},
                {"eps0", eps0},
                {"clamp", clamp},
                {"max_iterations", max_iterations},
                {"horizon_rel_tol", horizon_rel_tol},
                {"step", integrator.step},
                {"sanity_grid", sanity.to_json()}};
}

Json H0Result::to_json() const {
    return Json{{"value", value},
                {"searched_horizon", searched_horizon},
                {"final_horizon", final_horizon},
                {"horizons", to_json_array(horizons)},
                {"signals", signals}};
}

// ---------------------------------------------------------------- search

namespace {

class Search {
public:
    Search(const ControlSystem& sys, const RedefinitionConfig& cfg, double horizon, double cap)
        : sys_(sys), cfg_(cfg), integ_(sys, cfg.integrator), cap_(cap),
          m_(static_cast<std::size_t>(sys.m())), y_(static_cast<std::size_t>(sys.p())) {
        const int k = std::max(1, cfg.search.segments);
        segments_ = k;
        const double seg_len = horizon / k;
        steps_ = std::max(1, static_cast<int>(std::ceil(seg_len / cfg.integrator.step - 1e-9)));
        dt_ = seg_len / steps_;
        // all level combinations for one segment
        const auto axis = cap > 0.0 ? linspace(-cap, cap, std::max(1, cfg.search.levels)) : std::vector<double>{0.0};
        std::vector<std::size_t> idx(m_, 0);
        while (true) {
            Vec u(m_);
            for (std::size_t i = 0; i < m_; ++i) u[i] = axis[idx[i]];
            if (euclidean_norm(u) <= cap * (1.0 + 1e-12)) combos_.push_back(std::move(u));
            std::size_t d = 0;
            while (d < m_ && ++idx[d] == axis.size()) idx[d++] = 0;
            if (d == m_) break;
        }
        scratch_.assign(static_cast<std::size_t>(k) + 1, Vec(static_cast<std::size_t>(sys.n())));
    }

    double run(std::span<const double> xi, double horizon) {
        best_ = sys_.output_norm(xi);  // t = 0 with u ≡ 0
        if (horizon <= 0.0) return best_;
        if (m_ == 0) {
            Vec x(xi.begin(), xi.end());
            sweep(x, Vec{}, 0.0, segments_ * steps_);
            ++signals_;
            return best_;
        }
        std::copy(xi.begin(), xi.end(), scratch_[0].begin());
        dfs(0, 0.0);
        random_restarts(xi, horizon);
        return best_;
    }

    std::size_t signals() const { return signals_; }

private:
    void sweep(Vec& x, const Vec& u, double gain, int steps) {
        for (int s = 0; s < steps; ++s) {
            integ_.advance(x, u, dt_);
            const double norm = euclidean_norm(x);
            if (!std::isfinite(norm) || norm > cfg_.integrator.blowup_threshold)
                throw Error(ErrorKind::Numerical, "trajectory blew up during the h0 search",
                            Json{{"norm", norm}, {"input", to_json_array(u)}});
            sys_.h(x, y_);
            best_ = std::max(best_, euclidean_norm(y_) - gain);
        }
    }

    void dfs(int depth, double amp) {
        for (const auto& u : combos_) {
            Vec& x = scratch_[static_cast<std::size_t>(depth) + 1];
            x = scratch_[static_cast<std::size_t>(depth)];
            const double a = std::max(amp, euclidean_norm(u));
            sweep(x, u, cfg_.gamma(a), steps_);
            if (depth + 1 < segments_) dfs(depth + 1, a);
            else ++signals_;
        }
    }

    void random_restarts(std::span<const double> xi, double horizon) {
        std::mt19937_64 rng(cfg_.search.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::uniform_int_distribution<int> pieces(1, 2 * segments_);
        const double step = cfg_.integrator.step;
        for (int r = 0; r < cfg_.search.random_restarts; ++r) {
            const int k = pieces(rng);
            const double seg_len = horizon / k;
            const int steps = std::max(1, static_cast<int>(std::ceil(seg_len / step - 1e-9)));
            const double saved_dt = dt_;
            dt_ = seg_len / steps;
            Vec x(xi.begin(), xi.end());
            double amp = 0.0;
            for (int s = 0; s < k; ++s) {
                Vec u(m_);
                for (double& c : u) c = unif(rng) * cap_;
                const double norm = euclidean_norm(u);
                if (norm > cap_) for (double& c : u) c *= cap_ / norm;
                amp = std::max(amp, euclidean_norm(u));
                sweep(x, u, cfg_.gamma(amp), steps);
            }
            dt_ = saved_dt;
            ++signals_;
        }
    }

    const ControlSystem& sys_;
    const RedefinitionConfig& cfg_;
    Integrator integ_;
    double cap_;
    std::size_t m_;
    Vec y_;
    int segments_ = 1;
    int steps_ = 1;
    double dt_ = 0.0;
    std::vector<Vec> combos_;
    std::vector<Vec> scratch_;
    double best_ = 0.0;
    std::size_t signals_ = 0;
};

}  // namespace

double search_h0_on_horizon(const ControlSystem& sys, const RedefinitionConfig& config, std::span<const double> xi,
                            double horizon, std::size_t* signals) {
    if (static_cast<int>(xi.size()) != sys.n()) throw Error(ErrorKind::Usage, "state has wrong dimension");
    const double cap = config.amplitude_cap(euclidean_norm(xi));
    Search search(sys, config, horizon, cap);
    double v = search.run(xi, horizon);
    if (config.clamp) v = std::max(v, 0.0);
    if (signals) *signals = search.signals();
    return v;
}

H0Result compute_h0_detailed(const ControlSystem& sys, const RedefinitionConfig& config, std::span<const double> xi) {
    const double r = euclidean_norm(xi);
    const SettlingTimeMap settle = config.settling();
    H0Result out;
    double horizon = r == 0.0 ? 0.0 : settle(r, config.eps0);
    double best = 0.0;
    for (int it = 0; it < config.max_iterations; ++it) {
        out.horizons.push_back(horizon);
        std::size_t signals = 0;
        best = std::max(best, search_h0_on_horizon(sys, config, xi, horizon, &signals));
        out.signals += signals;
        const double next = r == 0.0 ? 0.0 : settle(r, std::max(best, config.eps0) / 2.0);
        if (std::abs(next - horizon) <= config.horizon_rel_tol * horizon) {
            out.value = best;
            out.searched_horizon = horizon;
            out.final_horizon = next;
            return out;
        }
        horizon = next;
    }
    const auto n = out.horizons.size();
    throw Error(ErrorKind::Numerical, "h0 truncation horizon did not settle",
                Json{{"xi", to_json_array(Vec(xi.begin(), xi.end()))},
                     {"last_horizons", Json::array({out.horizons[n - 1], horizon})},
                     {"value", best}});
}

double compute_h0(const ControlSystem& sys, const RedefinitionConfig& config, std::span<const double> xi) {
    return compute_h0_detailed(sys, config, xi).value;
}

// ---------------------------------------------------------------- table

H0Table::H0Table(Vec lo, Vec hi, std::vector<int> resolution, std::vector<double> values, Json provenance)
    : lo_(std::move(lo)), hi_(std::move(hi)), resolution_(std::move(resolution)), values_(std::move(values)),
      provenance_(std::move(provenance)) {
    if (lo_.empty() || lo_.size() != hi_.size() || resolution_.size() != lo_.size())
        throw Error(ErrorKind::Usage, "h0 table box and resolution must agree in dimension");
    std::size_t count = 1;
    for (std::size_t i = 0; i < lo_.size(); ++i) {
        if (!(hi_[i] > lo_[i])) throw Error(ErrorKind::Usage, "h0 table box must have positive extent");
        if (resolution_[i] < 2) throw Error(ErrorKind::Usage, "h0 table needs at least two nodes per axis");
        count *= static_cast<std::size_t>(resolution_[i]);
    }
    if (values_.size() != count) throw Error(ErrorKind::Usage, "h0 table value count does not match the lattice");
}

Vec H0Table::node(std::size_t flat) const {
    Vec x(lo_.size());
    for (std::size_t i = 0; i < lo_.size(); ++i) {
        const auto n = static_cast<std::size_t>(resolution_[i]);
        const std::size_t k = flat % n;
        flat /= n;
        x[i] = k + 1 == n ? hi_[i] : lo_[i] + (hi_[i] - lo_[i]) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return x;
}

bool H0Table::contains(std::span<const double> x) const {
    if (x.size() != lo_.size()) return false;
    for (std::size_t i = 0; i < lo_.size(); ++i)
        if (!(x[i] >= lo_[i] && x[i] <= hi_[i])) return false;
    return true;
}

double H0Table::operator()(std::span<const double> x) const {
    if (!contains(x)) throw Error(ErrorKind::Range, "point outside the h0 table box");
    const std::size_t d = lo_.size();
    std::vector<std::size_t> base(d);
    std::vector<double> w(d);
    for (std::size_t i = 0; i < d; ++i) {
        const auto n = static_cast<std::size_t>(resolution_[i]);
        const double pos = (x[i] - lo_[i]) / (hi_[i] - lo_[i]) * static_cast<double>(n - 1);
        auto k = static_cast<std::size_t>(std::floor(pos));
        k = std::min(k, n - 2);
        base[i] = k;
        w[i] = std::clamp(pos - static_cast<double>(k), 0.0, 1.0);
    }
    double acc = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
        double weight = 1.0;
        std::size_t flat = 0, stride = 1;
        for (std::size_t i = 0; i < d; ++i) {
            const bool up = (corner >> i) & 1U;
            weight *= up ? w[i] : 1.0 - w[i];
            flat += (base[i] + (up ? 1 : 0)) * stride;
            stride *= static_cast<std::size_t>(resolution_[i]);
        }
        if (weight != 0.0) acc += weight * values_[flat];
    }
    return acc;
}

Json H0Table::to_json() const {
    return Json{{"box", {{"lo", to_json_array(lo_)}, {"hi", to_json_array(hi_)}}},
                {"resolution", resolution_},
                {"values", to_json_array(values_)},
                {"layout", "first axis varies fastest"},
                {"provenance", provenance_}};
}

H0Table H0Table::from_json(const Json& doc) {
    return H0Table(doubles_from_json(doc.at("box").at("lo")), doubles_from_json(doc.at("box").at("hi")),
                   doc.at("resolution").get<std::vector<int>>(), doubles_from_json(doc.at("values")),
                   doc.value("provenance", Json::object()));
}

H0Table tabulate_h0(const ControlSystem& sys, const RedefinitionConfig& config, const Vec& lo, const Vec& hi,
                    const std::vector<int>& resolution) {
    if (static_cast<int>(lo.size()) != sys.n()) throw Error(ErrorKind::Usage, "box dimension must match the state");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= 0.0 && hi[i] >= 0.0)) throw Error(ErrorKind::Precondition, "box must contain the origin");

    EstimateGains gains;
    gains.beta = config.beta;
    gains.gamma = config.gamma;
    const auto sanity = verify_estimate(sys, PropertyKind::IOS, gains, config.sanity);
    if (!sanity.holds())
        throw Error(ErrorKind::Precondition, "system fails the IOS sanity check for the supplied gains",
                    sanity.to_json());

    H0Table shape(lo, hi, resolution,
                  std::vector<double>([&] {
                      std::size_t c = 1;
                      for (int r : resolution) c *= static_cast<std::size_t>(std::max(r, 0));
                      return c;
                  }()),
                  Json::object());
    std::vector<double> values(shape.node_count());
    parallel_for(values.size(), [&](std::size_t i) {
        const Vec xi = shape.node(i);
        try {
            values[i] = compute_h0(sys, config, xi);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string("h0 node failed: ") + e.what(),
                        Json{{"node", to_json_array(xi)}, {"detail", e.detail()}});
        }
        const double lower = sys.output_norm(xi);
        const double upper = config.beta.at_zero(euclidean_norm(xi));
        const double tol = 1e-9 * (1.0 + upper);
        if (values[i] < lower - tol || values[i] > upper + tol)
            throw Error(ErrorKind::Construction, "h0 sandwich violated at a node",
                        Json{{"node", to_json_array(xi)}, {"h0", values[i]}, {"lower", lower}, {"upper", upper}});
    });
    Json provenance{{"system", sys.name()}, {"config", config.to_json()}};
    return H0Table(lo, hi, resolution, std::move(values), std::move(provenance));
}

// ---------------------------------------------------------------- decay and Lagrange estimates

H0Estimates verify_h0_estimates(const ControlSystem& sys, const H0Table& table, const RedefinitionConfig& config,
                                const SampleGrid& grid, const Slack& slack) {
    const auto states = grid.states(sys.n());
    const auto inputs = grid.input_family(sys.m());
    const std::size_t total = states.size() * inputs.size();
    std::vector<MarginTracker> decay(total), lagrange(total);
    std::vector<char> skipped(total, 0);
    parallel_for(total, [&](std::size_t idx) {
        const auto& xi = states[idx / inputs.size()];
        const auto& v = inputs[idx % inputs.size()];
        if (!table.contains(xi)) {
            skipped[idx] = 1;
            return;
        }
        const auto traj = simulate(sys, xi, v, grid.horizon, grid.integrator);
        if (!traj.complete())
            throw Error(ErrorKind::Numerical, "trajectory blew up while checking h0 estimates",
                        Json{{"xi", to_json_array(xi)}});
        for (std::size_t k = 0; k < traj.size(); ++k)
            if (!table.contains(traj.state(k))) {
                skipped[idx] = 1;
                return;
            }
        const double r = euclidean_norm(xi);
        const double h0_xi = table(xi);
        const double vnorm = sup_norm(v, grid.horizon);
        const double lag_bound = std::max(2.0 * h0_xi, 2.0 * config.gamma(vnorm));
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = traj.times[k];
            const double h0 = table(traj.state(k));
            const double dec_bound = config.beta(r, t) + config.gamma(sup_norm(v, t));
            decay[idx].observe((1.0 + slack.rel) * dec_bound + slack.abs, h0, xi, &v, t);
            lagrange[idx].observe((1.0 + slack.rel) * lag_bound + slack.abs, h0, xi, &v, t);
        }
    });
    MarginTracker dec_all, lag_all;
    H0Estimates out;
    for (std::size_t i = 0; i < total; ++i) {
        dec_all.merge(decay[i]);
        lag_all.merge(lagrange[i]);
        out.skipped += skipped[i] ? 1 : 0;
    }
    const std::size_t used = total - out.skipped;
    const Json slack_json{{"rel", slack.rel}, {"abs", slack.abs}};
    out.decay = dec_all.report(PropertyKind::IOS, grid.to_json(), used);
    out.decay.details = Json{{"estimate", "h0(x(t)) <= beta(|xi|, t) + gamma(|v|_[0,t))"},
                             {"slack", slack_json},
                             {"skipped", out.skipped}};
    out.lagrange = lag_all.report(PropertyKind::OL, grid.to_json(), used);
    out.lagrange.details = Json{{"estimate", "h0(x(t)) <= max(2 h0(xi), 2 gamma(|v|))"},
                                {"slack", slack_json},
                                {"skipped", out.skipped}};
    return out;
}

}  // namespace ioslab
