#include "cyclofeed/error.hpp"
#include "cyclofeed/limits.hpp"
#include "cyclofeed/models.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace cyclofeed;

namespace {

// Decoupled periodically forced decay; the periodic solution of
// x' = -x + a sin(2 pi t) + b is known in closed form.
ModelSpec forced_decay() {
    return ModelSpec(3, 1.0,
                     {parse_expression("-x1 + 0.5*sin(2*pi*t)"), parse_expression("-x2 + 0.5*sin(2*pi*t) + 1"),
                      parse_expression("-x3 + 0.5*sin(2*pi*t) - 2")},
                     {}, false);
}

double forced_fixed_point(double b) {
    const double w = 2 * std::numbers::pi;
    return -0.5 * w / (1 + w * w) + b;
}

double max_angular_gap(const OmegaSetApprox& om) {
    std::vector<double> angles;
    for (const auto& p : om.points) angles.push_back(std::atan2(p[1], p[0]));
    std::sort(angles.begin(), angles.end());
    double gap = angles.front() + 2 * std::numbers::pi - angles.back();
    for (size_t k = 1; k < angles.size(); ++k) gap = std::max(gap, angles[k] - angles[k - 1]);
    return gap;
}

} // namespace

TEST_CASE("Poincare map") {
    const ModelSpec still(2, 1.0, {Expression::constant(0), Expression::constant(0)}, {}, false);
    const std::vector<double> x{0.3, -2};
    CHECK(poincare_map(still, x) == x);

    const ModelSpec decay(2, 1.0, {parse_expression("-x1"), parse_expression("-x2")}, {}, false);
    const auto p = poincare_map(decay, x);
    CHECK(std::abs(p[0] - 0.3 * std::exp(-1.0)) < 1e-8);
    CHECK(std::abs(p[1] + 2 * std::exp(-1.0)) < 1e-8);

    const auto lv = builtin_model("lv-oscillating");
    const std::vector<double> y{1, 1, 1, 1};
    const auto end_run = integrate(lv, y, 0, lv.period(), Adaptive{});
    const auto end = end_run.final_state();
    CHECK(poincare_map(lv, y) == std::vector<double>(end.begin(), end.end()));
}

TEST_CASE("omega limit of a globally attracting periodic orbit") {
    const auto m = forced_decay();
    OmegaOptions o;
    o.burn_in = 40;
    o.window = 20;
    const auto om = omega_limit_approx(m, std::vector<double>{5, -5, 0}, o);
    REQUIRE(om.points.size() == 1);
    CHECK(om.converged);
    CHECK(std::abs(om.points[0][0] - forced_fixed_point(0)) < o.eps);
    CHECK(std::abs(om.points[0][1] - forced_fixed_point(1)) < o.eps);
    CHECK(std::abs(om.points[0][2] - forced_fixed_point(-2)) < o.eps);
    CHECK(om.iterates[0] == 41);
}

TEST_CASE("omega limit of a global sink") {
    const ModelSpec decay(2, 1.0, {parse_expression("-x1"), parse_expression("-x2")}, {}, false);
    OmegaOptions o;
    o.burn_in = 30;
    o.window = 10;
    const auto om = omega_limit_approx(decay, std::vector<double>{1, 1}, o);
    REQUIRE(om.points.size() == 1);
    CHECK(std::hypot(om.points[0][0], om.points[0][1]) < o.eps);
}

TEST_CASE("irrational rotation fills the circle") {
    const double alpha = std::numbers::sqrt2 - 1;
    const ModelSpec rot(2, 1.0, {parse_expression("-w*x2"), parse_expression("w*x1")},
                        {{"w", 2 * std::numbers::pi * alpha}}, false);
    OmegaOptions o;
    o.burn_in = 0;
    o.eps = 1e-6;
    o.window = 50;
    const double coarse = max_angular_gap(omega_limit_approx(rot, std::vector<double>{1, 0}, o));
    o.window = 400;
    const auto fine_om = omega_limit_approx(rot, std::vector<double>{1, 0}, o);
    const double fine = max_angular_gap(fine_om);
    CHECK(fine < coarse);
    CHECK(fine < 0.05);
    CHECK(fine_om.points.size() == 400);
}

TEST_CASE("omega options are validated") {
    const ModelSpec decay(1, 1.0, {parse_expression("-x1")}, {}, false);
    OmegaOptions o;
    o.max_iterations = 100;
    CHECK_THROWS_AS(omega_limit_approx(decay, std::vector<double>{1}, o), DomainError);
    o = {};
    o.eps = 0;
    CHECK_THROWS_AS(omega_limit_approx(decay, std::vector<double>{1}, o), DomainError);
}

TEST_CASE("greedy net and Hausdorff distance") {
    const std::vector<StateVector> pts{{0, 0}, {0.5, 0}, {1.2, 0}, {1.3, 0}, {0, 2}};
    CHECK(greedy_net(pts, 1.0) == std::vector<size_t>{0, 2, 4});
    CHECK(hausdorff_distance({{0, 0}}, {{3, 4}}) == 5.0);
    CHECK(hausdorff_distance({{0, 0}, {1, 0}}, {{0, 0}}) == 1.0);
}

TEST_CASE("sigma traces of linear 2-positive systems never increase") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const int n = 3 + static_cast<int>(seed % 5);
        const auto m = random_two_positive_linear(n, seed % 2 == 1, seed);
        std::vector<double> x(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = std::sin(3.7 * (i + 1) + static_cast<double>(seed));
        TraceOptions o;
        o.t1 = 20;
        o.control = FixedStep{1.0 / 2000};
        const auto tr = sigma_trace_pair(m, x, std::vector<double>(static_cast<size_t>(n), 0.0), o);
        CHECK(tr.increases.empty());
        CHECK(tr.hypothesis_ok());
        for (int s : tr.sigma) CHECK((s == SigmaTrace::kOffLambda || s % 2 == 1));
        for (const auto& d : tr.drops) CHECK(d.crossing);
        const auto rep = verify_sigma_monotone(tr);
        CHECK(rep.verdict == Verdict::Pass);
    }
}

TEST_CASE("sigma traces with adaptive integration") {
    const auto m = builtin_model("antithetic");
    TraceOptions o;
    o.t1 = 10;
    o.control = Adaptive{1e-10, 1e-12};
    const auto tr = sigma_trace_pair(m, std::vector<double>{0.5, 1, 2, 1}, std::vector<double>{1.5, 0.2, 1, 2}, o);
    CHECK(tr.times.size() == static_cast<size_t>(o.samples + 1));
    CHECK(verify_sigma_monotone(tr).verdict == Verdict::Pass);
}

TEST_CASE("trace without crossings is constant") {
    const ModelSpec m = random_two_positive_linear(3, false, 2);
    TraceOptions o;
    o.t1 = 1e-3;
    o.control = FixedStep{1e-4};
    const auto tr = sigma_trace_pair(m, std::vector<double>{1, 1, 1}, std::vector<double>{0, 0, 0}, o);
    CHECK(tr.drops.empty());
    CHECK(tr.eventual_constant == 1);
}

TEST_CASE("hypothesis gate") {
    // Cooperative (positive feedback) cycle.
    const ModelSpec coop(3, 1.0, {parse_expression("x3 - x1"), parse_expression("x1 - x2"), parse_expression("x2 - x3")},
                         {}, true);
    TraceOptions o;
    o.t1 = 5;
    const auto tr = sigma_trace_pair(coop, std::vector<double>{1, -1, 0.5}, std::vector<double>{0, 0, 0}, o);
    CHECK_FALSE(tr.hypothesis_ok());
    CHECK(tr.times.size() > 10);
    const auto rep = verify_sigma_monotone(tr);
    CHECK(rep.verdict == Verdict::Inconclusive);
    CHECK(rep.messages.front().rfind("hypothesis gate", 0) == 0);

    OmegaSetApprox om;
    om.points = {{1, 0, 0}, {0, 1, 0}};
    om.cluster_radius = 1e-4;
    const auto refuse = verify_sigma_constancy_on_omega(coop, om);
    CHECK(refuse.verdict == Verdict::Inconclusive);
    CHECK(refuse.messages.front().rfind("hypothesis gate", 0) == 0);
}

TEST_CASE("identical initial states are rejected") {
    const auto m = builtin_model("antithetic");
    const std::vector<double> x{1, 1, 1, 1};
    CHECK_THROWS_AS(sigma_trace_pair(m, x, x), DomainError);
}

TEST_CASE("monotonicity verdicts from synthetic traces") {
    SigmaTrace tr;
    tr.delta = DeltaVector::canonical(4);
    for (int k = 0; k < 20; ++k) {
        tr.times.push_back(k);
        tr.sigma.push_back(k < 5 ? 3 : 1);
        tr.pair_margin.push_back(1.0);
    }
    tr.drops.push_back({4, 5, 3, 1, 4.5});
    tr.eventual_constant = 1;
    CHECK(verify_sigma_monotone(tr).verdict == Verdict::Pass);

    auto unexplained = tr;
    unexplained.drops[0].crossing.reset();
    CHECK(verify_sigma_monotone(unexplained).verdict == Verdict::Inconclusive);

    auto up = tr;
    up.increases.push_back({10, 11, 1, 3, 10.5});
    CHECK(verify_sigma_monotone(up).verdict == Verdict::Fail);

    auto wobbly = tr;
    wobbly.eventual_constant.reset();
    CHECK(verify_sigma_monotone(wobbly).verdict == Verdict::Fail);

    SigmaTrace few = tr;
    few.sigma.assign(20, SigmaTrace::kOffLambda);
    few.sigma[0] = 1;
    CHECK(verify_sigma_monotone(few).verdict == Verdict::Inconclusive);

    std::ostringstream os;
    few.write_csv(os);
    CHECK(os.str().rfind("t,sigma\n0,1\n1,\n", 0) == 0);
}

TEST_CASE("pair selection") {
    CHECK(select_pairs(3, 50).size() == 3);
    const auto p = select_pairs(20, 50);
    CHECK(p.size() == 50);
    CHECK(p.front() == std::pair<size_t, size_t>{0, 1});
    CHECK(std::is_sorted(p.begin(), p.end()));
}

TEST_CASE("constancy on omega: vacuous and empty cases") {
    const auto m = builtin_model("lv-oscillating");
    OmegaSetApprox om;
    om.cluster_radius = 1e-4;
    CHECK(verify_sigma_constancy_on_omega(m, om).verdict == Verdict::Inconclusive);
    om.points = {{1, 1, 1, 1}};
    CHECK(verify_sigma_constancy_on_omega(m, om).verdict == Verdict::Pass);
}

TEST_CASE("embedding") {
    OmegaSetApprox om;
    om.cluster_radius = 1e-4;
    CHECK(embed_projection(om).empty());
    CHECK(verify_embedding_injectivity(om).verdict == Verdict::Inconclusive);
    om.points = {{1, 2, 3, 4}};
    CHECK(embed_projection(om) == std::vector<std::array<double, 2>>{{1, 2}});
    CHECK(verify_embedding_injectivity(om).verdict == Verdict::Pass);
    om.points.push_back({1, 2, 5, 6});
    CHECK(embed_projection(om).size() == 2);
    const auto rep = verify_embedding_injectivity(om);
    CHECK(rep.verdict == Verdict::Fail);
    CHECK(rep.statistics["m_sep"] == 0.0);
    om.points[1] = {1.5, 2, 5, 6};
    CHECK(verify_embedding_injectivity(om).verdict == Verdict::Pass);
}

TEST_CASE("conjugacy on a fixed point") {
    const auto m = forced_decay();
    OmegaOptions o;
    o.burn_in = 40;
    o.window = 10;
    const auto om = omega_limit_approx(m, std::vector<double>{0, 0, 0}, o);
    const auto rep = verify_conjugacy(om, m);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.statistics["matched"] == 1);
}

TEST_CASE("report serialization") {
    VerificationReport r;
    r.verdict = Verdict::Fail;
    r.statistics["x"] = 1;
    const auto j = nlohmann::json::parse(r.dump());
    CHECK(j["verdict"] == "fail");
    CHECK(j.contains("statistics"));
    CHECK(j.contains("config"));
    CHECK(j.contains("artifacts"));
    CHECK(exit_code(Verdict::Pass) == 0);
    CHECK(exit_code(Verdict::Fail) == 2);
    CHECK(exit_code(Verdict::Inconclusive) == 3);
}
