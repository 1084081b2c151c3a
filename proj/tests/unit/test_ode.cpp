#include "cyclofeed/error.hpp"
#include "cyclofeed/models.hpp"
#include "cyclofeed/ode.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace cyclofeed;

namespace {

ModelSpec scalar(const std::string& rhs) { return ModelSpec(1, 1.0, {parse_expression(rhs)}, {}, false); }

ModelSpec linear(const Eigen::MatrixXd& A) {
    std::vector<Expression> rhs;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        Expression row = Expression::constant(0.0);
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            row = fold_add(row, fold_mul(Expression::constant(A(i, j)), Expression::state(static_cast<int>(j) + 1)));
        rhs.push_back(row);
    }
    return ModelSpec(static_cast<int>(A.rows()), 1.0, rhs, {}, false);
}

} // namespace

TEST_CASE("exponential decay") {
    const auto m = scalar("-x1");
    const std::vector<double> x0{1.0};
    const auto fixed = integrate(m, x0, 0, 1, FixedStep{1e-3});
    CHECK(std::abs(fixed.final_state()[0] - std::exp(-1.0)) < 1e-8);
    CHECK(fixed.size() == 1001);
    CHECK(fixed.time(fixed.size() - 1) == 1.0);
    const auto adaptive = integrate(m, x0, 0, 1, Adaptive{1e-10, 1e-12});
    CHECK(std::abs(adaptive.final_state()[0] - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("linear systems match the matrix exponential") {
    Eigen::MatrixXd A(3, 3);
    A << -0.5, 0.3, -1.0, 1.2, -0.4, 0.6, 0.0, 0.9, -0.2;
    const auto m = linear(A);
    const std::vector<double> x0{1.0, -0.5, 2.0};
    const Eigen::VectorXd exact = oracle::expm(A * 2.0) * Eigen::Map<const Eigen::VectorXd>(x0.data(), 3);
    for (const StepControl c : {StepControl{FixedStep{1e-3}}, StepControl{Adaptive{1e-10, 1e-12}}}) {
        const auto tr = integrate(m, x0, 0, 2, c);
        const auto xf = tr.final_state();
        for (int i = 0; i < 3; ++i) CHECK(std::abs(xf[static_cast<size_t>(i)] - exact(i)) <= 1e-6 * exact.norm());
    }
}

TEST_CASE("rk4 is fourth order") {
    Eigen::MatrixXd A(2, 2);
    A << -0.3, -2.0, 2.0, -0.3;
    const auto m = linear(A);
    const std::vector<double> x0{1.0, 0.0};
    const Eigen::VectorXd exact = oracle::expm(A * 3.0) * Eigen::Vector2d(1, 0);
    auto error = [&](double h) {
        const auto xf_run = integrate(m, x0, 0, 3, FixedStep{h});
        const auto xf = xf_run.final_state();
        return std::hypot(xf[0] - exact(0), xf[1] - exact(1));
    };
    const double ratio = error(0.02) / error(0.01);
    CHECK(ratio >= 12);
    CHECK(ratio <= 20);
}

TEST_CASE("backward integration retraces the forward run") {
    const auto m = builtin_model("antithetic");
    const std::vector<double> x0{0.5, 1.5, 1.0, 2.0};
    const auto fwd = integrate(m, x0, 0, 1, FixedStep{1e-3});
    const auto back = integrate(m, fwd.final_state(), 1, 0, FixedStep{1e-3});
    CHECK(back.time(1) < back.time(0));
    for (size_t i = 0; i < 4; ++i) CHECK(std::abs(back.final_state()[i] - x0[i]) < 1e-6);
}

TEST_CASE("fixed step is adjusted to divide the span") {
    const auto tr = integrate(scalar("-x1"), std::vector<double>{1.0}, 0, 1, FixedStep{0.3});
    CHECK(tr.size() == 5);
    CHECK(tr.time(1) == doctest::Approx(0.25));
}

TEST_CASE("blow-up is reported") {
    CHECK_THROWS_AS(integrate(scalar("x1^2"), std::vector<double>{1.0}, 0, 2, FixedStep{1e-3}), BlowUpError);
    CHECK_THROWS_AS(integrate(scalar("x1^2"), std::vector<double>{1.0}, 0, 2, Adaptive{}), Error);
}

TEST_CASE("dense output reproduces samples and interpolates") {
    const auto tr = integrate(scalar("cos(t)"), std::vector<double>{0.0}, 0, 3, FixedStep{0.05});
    CHECK(tr.component_at(0, tr.time(7)) == tr.state(7)[0]);
    CHECK(std::abs(tr.component_at(0, 1.234) - std::sin(1.234)) < 1e-6);
    CHECK_THROWS(tr.at(3.5));
}

TEST_CASE("trajectory CSV") {
    const auto tr = integrate(scalar("-x1"), std::vector<double>{1.0}, 0, 0.5, FixedStep{0.25});
    std::ostringstream os;
    tr.write_csv(os);
    CHECK(os.str().rfind("t,x1\n0,1\n0.25,", 0) == 0);
}

TEST_CASE("zero crossings") {
    const auto c = integrate(scalar("-sin(t)"), std::vector<double>{1.0}, 0, 3.2, FixedStep{0.01});
    const auto roots = locate_zero_crossings(c, 0, 1e-10);
    REQUIRE(roots.size() == 1);
    CHECK(std::abs(roots[0] - std::numbers::pi / 2) < 1e-8);

    const auto pos = integrate(scalar("0*x1"), std::vector<double>{2.0}, 0, 1, FixedStep{0.01});
    CHECK(locate_zero_crossings(pos, 0).empty());

    // (t - 1)^2 touches zero at t = 1 without changing sign.
    const auto touch = integrate(scalar("2*(t - 1)"), std::vector<double>{1.0}, 0, 2, FixedStep{0.03});
    CHECK(locate_zero_crossings(touch, 0).empty());

    const auto back = integrate(scalar("-sin(t)"), std::vector<double>{std::cos(3.2)}, 3.2, 0, FixedStep{0.01});
    const auto broots = locate_zero_crossings(back, 0);
    REQUIRE(broots.size() == 1);
    CHECK(std::abs(broots[0] - std::numbers::pi / 2) < 1e-7);
}

TEST_CASE("Gauss-Legendre rule") {
    const auto [x, w] = gauss_legendre_unit(8);
    double sum = 0, m15 = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sum += w[i];
        m15 += w[i] * std::pow(x[i], 15);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m15 == doctest::Approx(1.0 / 16).epsilon(1e-13));
}

TEST_CASE("difference matrix") {
    const auto lin = random_two_positive_linear(4, false, 9);
    const std::vector<double> x{1, 2, -1, 0.3}, y{-2, 0.1, 4, 1};
    CHECK((difference_matrix(lin, x, y, 0.2) - lin.eval_jacobian(0.2, x)).cwiseAbs().maxCoeff() < 1e-13);

    const auto m = builtin_model("antithetic");
    const std::vector<double> p{0.8, 1.1, 0.6, 1.7};
    CHECK((difference_matrix(m, p, p, 0.0) - m.eval_jacobian(0.0, p)).cwiseAbs().maxCoeff() < 1e-13);

    // z' = A~ z reproduces the difference of the two vector fields exactly.
    const std::vector<double> q{1.4, 0.5, 1.2, 0.9};
    const Eigen::MatrixXd At = difference_matrix(m, p, q, 0.0);
    const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(p.data(), 4) - Eigen::Map<const Eigen::VectorXd>(q.data(), 4);
    CHECK((At * z - (m.eval_rhs(0.0, p) - m.eval_rhs(0.0, q))).norm() < 1e-12);

    // Over one step the difference moves by A~ z dt to first order.
    const double dt = 1e-3;
    const auto xp_run = integrate(m, p, 0, dt, FixedStep{dt});
    const auto xp = xp_run.final_state();
    const auto xq_run = integrate(m, q, 0, dt, FixedStep{dt});
    const auto xq = xq_run.final_state();
    for (int i = 0; i < 4; ++i) {
        const double moved = xp[static_cast<size_t>(i)] - xq[static_cast<size_t>(i)] - z(i);
        CHECK(std::abs(moved - (At * z)(i) * dt) < 1e-5);
    }
}
