#include "ioslab/cli.hpp"

#include "ioslab/errors.hpp"
#include "ioslab/estimators.hpp"
#include "ioslab/examples.hpp"
#include "ioslab/redefine.hpp"
#include "ioslab/smallgain.hpp"
#include "ioslab/sysmodel.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace ioslab {

namespace {

template <class T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !std::isfinite(v))
            throw Error(ErrorKind::Usage, std::string("malformed ") + what + ": '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw Error(ErrorKind::Usage, std::string("empty ") + what);
    return out;
}

Json resolve_file(const Json& ref) {
    if (ref.is_string()) return read_json_file(ref.get<std::string>());
    return ref;
}

bool counterexample_family(const std::string& name) {
    return name == "sys29" || name == "sys31" || name == "sys32" || name == "sys33";
}

IntegratorOptions integrator_for(const ScenarioSpec& spec, double default_step) {
    const double step = spec.step.value_or(default_step);
    if (!(step > 0.0)) throw Error(ErrorKind::Usage, "step must be positive");
    if (counterexample_family(spec.system)) return counterexample_integrator(step);
    IntegratorOptions opt;
    opt.step = step;
    return opt;
}

double horizon_of(const ScenarioSpec& spec, double fallback) {
    const double h = spec.horizon.value_or(fallback);
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::Usage, "horizon must be positive and finite");
    return h;
}

ControlSystem system_of(const ScenarioSpec& spec) {
    if (spec.system.empty()) throw Error(ErrorKind::Usage, "--system is required");
    return make_example(spec.system);
}

// A single constant is broadcast to every input coordinate; with m = 0 it is
// absorbed (sys31 and sys33 carry their frozen input in the right-hand side).
std::optional<InputSignal> input_of(const ScenarioSpec& spec, int m, bool unit_ball) {
    if (spec.input.is_null()) return std::nullopt;
    if (spec.input.is_object()) {
        if (!spec.input.contains("pwc")) throw Error(ErrorKind::Usage, "input object needs a 'pwc' signal");
        InputSignal u = InputSignal::from_json(spec.input.at("pwc"));
        if (u.dim() != m)
            throw Error(ErrorKind::Usage, "input dimension does not match the system",
                        Json{{"input", u.dim()}, {"system", m}});
        return unit_ball ? u.with_unit_ball(true) : u;
    }
    const auto text = spec.input.get<std::string>();
    if (text == "none") return InputSignal::zero(m).with_unit_ball(unit_ball);
    if (text.rfind("const:", 0) == 0) {
        auto values = parse_list(text.substr(6), "constant input");
        if (values.size() == 1 && m != 1) values.assign(static_cast<std::size_t>(m), values[0]);
        if (static_cast<int>(values.size()) != m)
            throw Error(ErrorKind::Usage, "constant input dimension does not match the system",
                        Json{{"input", values.size()}, {"system", m}});
        return InputSignal::constant(values, unit_ball);
    }
    throw Error(ErrorKind::Usage, "input must be const:<v>, pwc:<file> or none", Json{{"input", text}});
}

Vec xi_of(const ScenarioSpec& spec, int n) {
    if (!spec.xi) return Vec(static_cast<std::size_t>(n), 0.0);
    if (static_cast<int>(spec.xi->size()) != n)
        throw Error(ErrorKind::Usage, "xi dimension does not match the system",
                    Json{{"xi", spec.xi->size()}, {"system", n}});
    return *spec.xi;
}

SampleGrid grid_of(const ScenarioSpec& spec, const ControlSystem& sys, bool disturbances) {
    SampleGrid grid;
    grid.horizon = horizon_of(spec, 10.0);
    grid.integrator = integrator_for(spec, 1e-3);
    grid.seed = spec.seed;
    if (spec.xi) {
        grid.radii.clear();
        grid.states_per_radius = 0;
        grid.extra_states = {xi_of(spec, sys.n())};
    }
    if (auto u = input_of(spec, sys.m(), disturbances)) grid.inputs = {*u};
    return grid;
}

const Json& gains_doc(const ScenarioSpec& spec) {
    if (!spec.gains.is_object()) throw Error(ErrorKind::Usage, "--gains <file> is required for this command");
    return spec.gains;
}

ComparisonFunction gain(const ScenarioSpec& spec, const char* key) {
    const Json& g = gains_doc(spec);
    if (!g.contains(key)) throw Error(ErrorKind::Usage, std::string("gains file lacks '") + key + "'");
    return ComparisonFunction::from_json(g.at(key));
}

KLSurface beta_gain(const ScenarioSpec& spec) {
    const Json& g = gains_doc(spec);
    if (!g.contains("beta")) throw Error(ErrorKind::Usage, "gains file lacks 'beta'");
    return KLSurface::from_json(g.at("beta"));
}

ComparisonFunction lambda_of(const ScenarioSpec& spec) {
    if (spec.lambda.is_object()) return ComparisonFunction::from_json(spec.lambda);
    if (spec.gains.is_object() && spec.gains.contains("lambda"))
        return ComparisonFunction::from_json(spec.gains.at("lambda"));
    throw Error(ErrorKind::Usage, "--lambda <file> (or a 'lambda' gain) is required");
}

std::pair<Vec, Vec> box_of(const ScenarioSpec& spec, int n) {
    const std::string text = spec.box.empty() ? "-2:2" : spec.box;
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::Usage, "box must be lo:hi", Json{{"box", text}});
    auto lo = parse_list(text.substr(0, colon), "box");
    auto hi = parse_list(text.substr(colon + 1), "box");
    if (lo.size() == 1) lo.assign(static_cast<std::size_t>(n), lo[0]);
    if (hi.size() == 1) hi.assign(static_cast<std::size_t>(n), hi[0]);
    if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n)
        throw Error(ErrorKind::Usage, "box dimension does not match the system");
    return {lo, hi};
}

Json result_of(const EstimateReport& r) { return r.to_json(); }

ScenarioOutcome cmd_simulate(const ScenarioSpec& spec) {
    const auto sys = system_of(spec);
    const Vec xi = xi_of(spec, sys.n());
    const InputSignal u = input_of(spec, sys.m(), false).value_or(InputSignal::zero(sys.m()));
    const auto traj = simulate(sys, xi, u, horizon_of(spec, 10.0), integrator_for(spec, 1e-3));
    double peak = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) peak = std::max(peak, traj.output_norm(k));
    ScenarioOutcome out;
    out.exit_code = traj.complete() ? 0 : 3;
    out.csv = traj.to_csv();
    out.report = Json{{"system", sys.name()},
                      {"status", traj.complete() ? "complete" : "incomplete"},
                      {"end_time", traj.end_time},
                      {"blowup_norm", traj.complete() ? Json(nullptr) : Json(traj.blowup_norm)},
                      {"samples", traj.size()},
                      {"final_state", to_json_array(traj.state(traj.size() - 1))},
                      {"max_output_norm", peak}};
    return out;
}

ScenarioOutcome cmd_ros(const ScenarioSpec& spec) {
    const auto sys = system_of(spec);
    const auto result = verify_ros(sys, lambda_of(spec), beta_gain(spec), grid_of(spec, sys, true));
    ScenarioOutcome out;
    out.exit_code = result.decay.holds() ? 0 : 1;
    out.report = Json{{"decay", result_of(result.decay)}};
    return out;
}

ScenarioOutcome cmd_lyap(const ScenarioSpec& spec, const ControlSystem& sys) {
    const Json& g = gains_doc(spec);
    const auto chi = ComparisonFunction::from_json(g.contains("chi") ? g.at("chi") : g.at("gamma"));
    ScalarField v{[](std::span<const double> x) {
                      double s = 0.0;
                      for (double c : x) s += c * c;
                      return 0.5 * s;
                  },
                  [](std::span<const double> x) { return Vec(x.begin(), x.end()); }};
    std::vector<Vec> states;
    if (spec.xi) {
        states = {xi_of(spec, sys.n())};
    } else {
        const int per_dim = sys.n() <= 2 ? 21 : sys.n() == 3 ? 9 : 5;
        states = box_lattice(Vec(static_cast<std::size_t>(sys.n()), -2.0), Vec(static_cast<std::size_t>(sys.n()), 2.0),
                             per_dim);
    }
    std::vector<Vec> values;
    if (auto u = input_of(spec, sys.m(), false)) {
        for (const auto& piece : u->values()) values.push_back(piece);
    } else if (sys.m() == 0) {
        values = {Vec{}};
    } else {
        const double scale = 1.0 / std::sqrt(static_cast<double>(sys.m()));
        values.push_back(Vec(static_cast<std::size_t>(sys.m()), 0.0));
        for (double level : SampleGrid{}.levels)
            for (double sign : {1.0, -1.0}) values.push_back(Vec(static_cast<std::size_t>(sys.m()), sign * level * scale));
    }
    const auto report = lyapunov_decrease_check(sys, v, chi, states, values);
    ScenarioOutcome out;
    out.exit_code = report.holds() ? 0 : 1;
    out.report = result_of(report);
    out.report["details"]["V"] = "|x|^2/2";
    return out;
}

ScenarioOutcome cmd_verify(const ScenarioSpec& spec) {
    if (spec.property.empty()) throw Error(ErrorKind::Usage, "--property is required");
    const auto kind = property_from_string(spec.property);
    if (kind == PropertyKind::ROS) return cmd_ros(spec);
    const auto sys = system_of(spec);
    if (kind == PropertyKind::LyapDecrease) return cmd_lyap(spec, sys);
    EstimateGains gains;
    switch (kind) {
        case PropertyKind::IOS:
        case PropertyKind::SIOS:
            gains.beta = beta_gain(spec);
            gains.gamma = gain(spec, "gamma");
            break;
        case PropertyKind::OL:
            gains.sigma1 = gain(spec, "sigma1");
            gains.sigma2 = gain(spec, "sigma2");
            break;
        case PropertyKind::UBIBS: gains.sigma = gain(spec, "sigma"); break;
        default: throw Error(ErrorKind::Usage, "property not checkable from the command line");
    }
    const auto report = verify_estimate(sys, kind, gains, grid_of(spec, sys, false));
    ScenarioOutcome out;
    out.exit_code = report.holds() ? 0 : 1;
    out.report = result_of(report);
    return out;
}

ScenarioOutcome cmd_redefine(const ScenarioSpec& spec) {
    const auto sys = system_of(spec);
    RedefinitionConfig config(gain(spec, "gamma"), beta_gain(spec));
    if (spec.step) config.integrator = integrator_for(spec, config.integrator.step);
    config.search.seed = spec.seed;
    const auto [lo, hi] = box_of(spec, sys.n());
    const int res = spec.resolution.value_or(33);
    if (res < 2) throw Error(ErrorKind::Usage, "resolution must be at least 2");
    const auto table = tabulate_h0(sys, config, lo, hi, std::vector<int>(static_cast<std::size_t>(sys.n()), res));

    SampleGrid grid;
    grid.radii = {0.5, 1.0};
    grid.states_per_radius = 3;
    grid.levels = {0.25, 0.5, 1.0};
    grid.random_inputs = 2;
    grid.horizon = horizon_of(spec, 10.0);
    grid.integrator = config.integrator;
    grid.seed = spec.seed;
    const auto est = verify_h0_estimates(sys, table, config, grid);
    ScenarioOutcome out;
    out.exit_code = est.decay.holds() && est.lagrange.holds() ? 0 : 1;
    out.report = Json{{"table", table.to_json()},
                      {"estimates", Json{{"decay", result_of(est.decay)},
                                         {"lagrange", result_of(est.lagrange)},
                                         {"skipped", est.skipped}}}};
    return out;
}

ScenarioOutcome cmd_smallgain(const ScenarioSpec& spec) {
    const auto cert = construct_lambda(gain(spec, "sigma1"), gain(spec, "sigma2"));
    ScenarioOutcome out;
    out.report = Json{{"certificate", cert.to_json()}, {"feedback", nullptr}};
    if (!spec.system.empty()) {
        const auto sys = system_of(spec);
        const auto report = verify_feedback_bound(sys, cert, grid_of(spec, sys, true));
        out.report["feedback"] = result_of(report);
        out.exit_code = report.holds() ? 0 : 1;
    }
    return out;
}

ScenarioOutcome cmd_example(const ScenarioSpec& spec) {
    if (spec.system.empty()) throw Error(ErrorKind::Usage, "--system is required");
    ScenarioOutcome out;
    Json r{{"name", spec.system}};
    if (spec.system == "pid") {
        const auto pid = build_pid_example();
        const auto francis = solve_francis(pid.problem);
        const auto gains = linear_gain_functions(pid.problem.A, pid.problem.C, horizon_of(spec, 40.0));
        r["francis"] = francis.to_json();
        r["gains"] = Json{{"chi", gains.chi.to_json()},
                          {"sigma", gains.sigma.to_json()},
                          {"sup_norm", gains.sup_norm},
                          {"tail_factor", gains.tail_factor}};
    } else if (spec.system == "sys32" || spec.system == "sys33") {
        r["params"] = construct_counterexample_ubibs({}).to_json();
    }
    const auto sys = make_example(spec.system);
    r["n"] = sys.n();
    r["m"] = sys.m();
    r["p"] = sys.p();
    out.report = r;
    return out;
}

// The output directory is left out so a re-run elsewhere emits the same bytes.
Json provenance_of(const ScenarioSpec& resolved) {
    Json scenario = resolved.to_json();
    scenario.erase("out");
    Json modules = Json::object();
    for (const char* name : {"compfn", "sysmodel", "estimators", "redefine", "smallgain", "examples", "cli"})
        modules[name] = kVersion;
    return Json{{"tool", "ioslab"}, {"version", kVersion}, {"modules", modules}, {"scenario", scenario}};
}

Json diagnostic(const std::string& kind, const std::string& message, const Json& detail, int code) {
    return Json{{"error", Json{{"kind", kind}, {"message", message}, {"detail", detail}, {"exit_code", code}}}};
}

}  // namespace

// ---------------------------------------------------------------- spec

Json ScenarioSpec::to_json() const {
    return Json{{"command", command},
                {"system", system},
                {"property", property},
                {"gains", gains},
                {"lambda", lambda},
                {"input", input},
                {"xi", xi ? to_json_array(*xi) : Json(nullptr)},
                {"horizon", optional_json(horizon)},
                {"step", optional_json(step)},
                {"seed", seed},
                {"out", out},
                {"box", box},
                {"resolution", optional_json(resolution)}};
}

ScenarioSpec ScenarioSpec::from_json(const Json& doc) {
    if (!doc.is_object()) throw Error(ErrorKind::Usage, "scenario must be a JSON object");
    ScenarioSpec s;
    try {
        s.command = doc.value("command", std::string());
        s.system = doc.value("system", std::string());
        s.property = doc.value("property", std::string());
        s.gains = doc.value("gains", Json(nullptr));
        s.lambda = doc.value("lambda", Json(nullptr));
        s.input = doc.value("input", Json(nullptr));
        if (doc.contains("xi") && !doc.at("xi").is_null()) s.xi = doubles_from_json(doc.at("xi"));
        if (doc.contains("horizon") && !doc.at("horizon").is_null()) s.horizon = doc.at("horizon").get<double>();
        if (doc.contains("step") && !doc.at("step").is_null()) s.step = doc.at("step").get<double>();
        s.seed = doc.value("seed", std::uint64_t{1});
        s.out = doc.value("out", std::string());
        s.box = doc.value("box", std::string());
        if (doc.contains("resolution") && !doc.at("resolution").is_null())
            s.resolution = doc.at("resolution").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Usage, std::string("malformed scenario: ") + e.what());
    }
    return s;
}

ScenarioSpec resolve_scenario(const ScenarioSpec& spec) {
    ScenarioSpec r = spec;
    r.gains = resolve_file(spec.gains);
    r.lambda = resolve_file(spec.lambda);
    if (spec.input.is_string()) {
        const auto text = spec.input.get<std::string>();
        if (text.rfind("pwc:", 0) == 0) r.input = Json{{"pwc", read_json_file(text.substr(4))}};
    }
    return r;
}

ScenarioOutcome run_scenario(const ScenarioSpec& raw) {
    const ScenarioSpec spec = resolve_scenario(raw);
    ScenarioOutcome out;
    if (spec.command == "simulate") out = cmd_simulate(spec);
    else if (spec.command == "verify") out = cmd_verify(spec);
    else if (spec.command == "ros") out = cmd_ros(spec);
    else if (spec.command == "redefine") out = cmd_redefine(spec);
    else if (spec.command == "smallgain") out = cmd_smallgain(spec);
    else if (spec.command == "example") out = cmd_example(spec);
    else throw Error(ErrorKind::Usage, "unknown command: " + spec.command);
    out.report = Json{{"command", spec.command},
                      {"exit_code", out.exit_code},
                      {"result", out.report},
                      {"provenance", provenance_of(spec)}};
    return out;
}

// ---------------------------------------------------------------- front end

namespace {

struct RawFlags {
    std::string system, property, gains, lambda, input, xi, box, out, scenario;
    std::optional<double> horizon, step;
    std::optional<std::uint64_t> seed;
    std::optional<int> resolution;
};

void add_common(CLI::App* sub, RawFlags& f) {
    sub->add_option("--system", f.system, "example name: pid, sys11, sys12, sys29, sys31, sys32, sys33");
    sub->add_option("--property", f.property, "ios | ol | sios | ros | ubibs | lyap");
    sub->add_option("--gains", f.gains, "JSON file with beta, gamma, sigma1, sigma2, sigma, chi, lambda");
    sub->add_option("--lambda", f.lambda, "JSON file with the feedback gain");
    sub->add_option("--input", f.input, "const:<v>[,<v>...] | pwc:<file> | none");
    sub->add_option("--xi", f.xi, "initial state, comma separated");
    sub->add_option("--horizon", f.horizon, "simulation horizon");
    sub->add_option("--step", f.step, "integrator step");
    sub->add_option("--seed", f.seed, "sampling seed");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--box", f.box, "h0 box lo:hi (scalars or comma lists)");
    sub->add_option("--resolution", f.resolution, "h0 nodes per axis");
}

ScenarioSpec spec_from_flags(const std::string& command, const RawFlags& f) {
    ScenarioSpec s;
    s.command = command;
    s.system = f.system;
    s.property = f.property;
    if (!f.gains.empty()) s.gains = f.gains;
    if (!f.lambda.empty()) s.lambda = f.lambda;
    if (!f.input.empty()) s.input = f.input;
    if (!f.xi.empty()) s.xi = parse_list(f.xi, "xi");
    s.horizon = f.horizon;
    s.step = f.step;
    if (f.seed) s.seed = *f.seed;
    s.out = f.out;
    s.box = f.box;
    s.resolution = f.resolution;
    return s;
}

void write_artifacts(const std::string& dir, const ScenarioOutcome& outcome, const std::string& command) {
    if (dir.empty()) return;
    const std::filesystem::path base(dir);
    write_text_file(base / "report.json", canonical_json(outcome.report));
    if (!outcome.csv.empty()) write_text_file(base / "trajectory.csv", outcome.csv);
    if (command == "redefine") write_text_file(base / "h0_table.json", canonical_json(outcome.report.at("result").at("table")));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"ioslab: input-to-output stability experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    RawFlags flags;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "simulate one trajectory"},
        {"verify", "check an estimate on a sampled batch"},
        {"ros", "check the closed-loop decay estimate"},
        {"redefine", "tabulate the redefined output h0 on a box"},
        {"smallgain", "build a feedback gain margin"},
        {"example", "describe a registered example"}};
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), flags);
    auto* run = app.add_subcommand("run", "re-run a scenario (or the provenance of an emitted report)");
    run->add_option("--scenario", flags.scenario, "scenario or report JSON file")->required();
    run->add_option("--out", flags.out, "output directory");

    std::string out_dir;
    try {
        app.parse(argc, argv);
        ScenarioSpec spec;
        if (run->parsed()) {
            Json doc = read_json_file(flags.scenario);
            if (doc.contains("provenance")) doc = doc.at("provenance").at("scenario");
            spec = ScenarioSpec::from_json(doc);
            if (!flags.out.empty()) spec.out = flags.out;
        } else {
            spec = spec_from_flags(app.get_subcommands().front()->get_name(), flags);
        }
        out_dir = spec.out;
        const auto outcome = run_scenario(spec);
        write_artifacts(out_dir, outcome, spec.command);
        out << canonical_json(outcome.report);
        return outcome.exit_code;
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << canonical_json(diagnostic("usage", e.what(), nullptr, 2));
        return 2;
    } catch (const Error& e) {
        const int code = exit_code(e.kind());
        const Json diag = diagnostic(std::string(to_string(e.kind())), e.what(), e.detail(), code);
        err << canonical_json(diag);
        if (!out_dir.empty()) {
            try {
                write_text_file(std::filesystem::path(out_dir) / "error.json", canonical_json(diag));
            } catch (const Error&) {
            }
        }
        return code;
    } catch (const std::exception& e) {
        err << canonical_json(diagnostic("internal", e.what(), nullptr, 3));
        return 3;
    }
}

}  // namespace ioslab
