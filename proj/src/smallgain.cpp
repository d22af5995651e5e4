#include "ioslab/smallgain.hpp"

#include "ioslab/errors.hpp"
#include "ioslab/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace ioslab {

Json GainMarginCertificate::to_json() const {
    return Json{{"lambda", lambda.to_json()},
                {"sigma1", sigma1.to_json()},
                {"sigma2", sigma2.to_json()},
                {"grid", {{"lo", grid.empty() ? 0.0 : grid.front()},
                          {"hi", grid.empty() ? 0.0 : grid.back()},
                          {"count", grid.size()},
                          {"spacing", "log"}}},
                {"worst_margin", worst_margin},
                {"worst_relative_margin", worst_relative_margin}};
}

GainMarginCertificate construct_lambda(const ComparisonFunction& sigma1, const ComparisonFunction& sigma2,
                                       const CertificateGrid& grid) {
    if (!(grid.lo > 0.0) || !(grid.hi > grid.lo) || grid.count < 2)
        throw Error(ErrorKind::Usage, "certificate grid must be a positive increasing range");
    const ComparisonFunction s1 =
        ComparisonFunction::pointwise_max(sigma1.promoted(), ComparisonFunction::identity()).with_description(
            "max(sigma1, id)");
    const ComparisonFunction s2 = sigma2.promoted();
    const ComparisonFunction inner = s1.inverse_function().scaled(0.125);
    const ComparisonFunction lambda = compose(s2.inverse_function(), inner).with_description("feedback margin");

    GainMarginCertificate cert{lambda, s1, s2, logspace(grid.lo, grid.hi, grid.count), 0.0, 0.0};
    cert.worst_margin = std::numeric_limits<double>::infinity();
    cert.worst_relative_margin = std::numeric_limits<double>::infinity();
    if (lambda(0.0) != 0.0) throw Error(ErrorKind::Construction, "lambda(0) must be 0");
    for (double s : cert.grid) {
        const double rhs = 0.25 * s1.inverse(s);
        const double lhs = s2(lambda(s));
        if (!(lhs < rhs))
            throw Error(ErrorKind::Construction, "gain margin inequality fails",
                        Json{{"s", s}, {"sigma2_lambda", lhs}, {"quarter_sigma1_inv", rhs}});
        cert.worst_margin = std::min(cert.worst_margin, rhs - lhs);
        cert.worst_relative_margin = std::min(cert.worst_relative_margin, (rhs - lhs) / rhs);
    }
    return cert;
}

EstimateReport verify_feedback_bound(const ControlSystem& sys, const GainMarginCertificate& cert,
                                     const SampleGrid& grid, const FeedbackCheckOptions& options) {
    if (options.sanity) {
        EstimateGains gains;
        gains.sigma1 = cert.sigma1;
        gains.sigma2 = cert.sigma2;
        const auto ol = verify_estimate(sys, PropertyKind::OL, gains, *options.sanity);
        if (!ol.holds())
            throw Error(ErrorKind::Precondition, "system fails the output-Lagrange sanity check", ol.to_json());
    }
    const FeedbackLoop loop(sys, cert.lambda);
    const auto states = grid.states(sys.n());
    const auto disturbances = grid.disturbance_family(sys.m());
    const std::size_t total = states.size() * disturbances.size();
    std::vector<MarginTracker> main(total), output(total);
    std::vector<char> zero_case(total, 0);
    parallel_for(total, [&](std::size_t idx) {
        const auto& xi = states[idx / disturbances.size()];
        const auto& d = disturbances[idx % disturbances.size()];
        const auto traj = simulate_closed_loop(loop, xi, d, grid.horizon, grid.integrator);
        if (!traj.complete())
            throw Error(ErrorKind::ForwardCompleteness,
                        "closed loop with the certified margin is not forward complete; this contradicts the "
                        "output-Lagrange assumption",
                        Json{{"xi", to_json_array(xi)}, {"input", d.to_json()}, {"blowup_time", traj.end_time}});
        const double h = sys.output_norm(xi);
        zero_case[idx] = h == 0.0;
        const double out_bound = cert.sigma1(h);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double y = traj.output_norm(k);
            const double t = traj.times[k];
            if (h == 0.0) main[idx].observe(options.zero_tolerance, y, xi, &d, t);
            else main[idx].observe(0.5 * h, cert.sigma2(cert.lambda(y)), xi, &d, t);
            output[idx].observe(h == 0.0 ? options.zero_tolerance : out_bound, y, xi, &d, t);
        }
    });
    MarginTracker all, out_all;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < total; ++i) {
        all.merge(main[i]);
        out_all.merge(output[i]);
        zeros += zero_case[i] ? 1 : 0;
    }
    auto report = all.report(PropertyKind::FeedbackBound, grid.to_json(), total);
    report.details = Json{{"bound", "sigma2(lambda(|y|)) <= |h(xi)|/2; |y| <= zero_tolerance when h(xi) = 0"},
                          {"zero_tolerance", options.zero_tolerance},
                          {"zero_output_samples", zeros},
                          {"output_bound_worst_margin", out_all.worst()},
                          {"lambda", cert.lambda.to_json()}};
    return report;
}

ComparisonFunction compose_lambda_for_ios(const ComparisonFunction& lambda0, const ComparisonFunction& chi,
                                          const ControlSystem* sys, const H0Table* table) {
    if (lambda0.cls() != GainClass::KInfinity || chi.cls() != GainClass::KInfinity)
        throw Error(ErrorKind::Usage, "composition needs two K-infinity functions");
    ComparisonFunction lambda = compose(lambda0, chi);
    if (table) {
        if (!sys) throw Error(ErrorKind::Usage, "domination check needs the system");
        for (std::size_t i = 0; i < table->node_count(); ++i) {
            const Vec xi = table->node(i);
            const double lhs = lambda(sys->output_norm(xi));
            const double rhs = lambda0(table->values()[i]);
            if (lhs > rhs + 1e-12 * std::max(1.0, rhs))
                throw Error(ErrorKind::Construction, "composed margin is not dominated at a table node",
                            Json{{"node", to_json_array(xi)}, {"lambda_h", lhs}, {"lambda0_h0", rhs}});
        }
    }
    return lambda;
}

}  // namespace ioslab
