#include "cyclofeed/error.hpp"
#include "cyclofeed/model.hpp"
#include "cyclofeed/ode.hpp"
#include "cyclofeed/models.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace cyclofeed;

namespace {

const char* kAntithetic = R"({
  "n": 4, "period": 1.0, "cyclic": true,
  "equations": ["a1 - a2*x1*x4", "a3*x1 - a4*x2", "a5*x2 - a6*x3", "a7*x3 - a8*x1*x4"],
  "params": {"a1": 1, "a2": 1, "a3": 1, "a4": 1, "a5": 1, "a6": 1, "a7": 1, "a8": 1},
  "domain": {"lower": [0, 0, 0, 0], "upper": [null, null, null, null]}
})";

} // namespace

TEST_CASE("model files parse") {
    const ModelSpec m = parse_model_file(kAntithetic);
    CHECK(m.n() == 4);
    CHECK(m.cyclic());
    REQUIRE(m.domain());
    CHECK(std::isinf(m.domain()->upper[2]));
    CHECK(unparse(m.jacobian()[0][3]) == "-a2*x1");
    CHECK(m.jacobian()[1][3].is_constant(0.0));
    const std::vector<double> x{2, 1, 0, 0};
    CHECK(m.eval_rhs(0.0, x)(1) == 1.0);
}

TEST_CASE("model file errors") {
    CHECK_THROWS_AS(parse_model_file("{"), FormatError);
    CHECK_THROWS_AS(parse_model_file(R"({"n": 3, "period": 1})"), FormatError);
    CHECK_THROWS_AS(parse_model_file(R"({"n": 3, "period": 1, "equations": ["x1", "x2"]})"), DimensionError);
    CHECK_THROWS_AS(parse_model_file(R"({"n": 2, "period": 1, "equations": ["x1 +", "x2"]})"), FormatError);
    CHECK_THROWS_AS(parse_model_file(R"({"n": 4, "period": 1, "cyclic": true,
        "equations": ["x3", "x2", "x3", "x4"]})"),
                    FormatError);
    CHECK_THROWS_AS(parse_model_file(R"({"n": 1, "period": 0, "equations": ["x1"]})"), DomainError);
    CHECK_THROWS_AS(parse_model_file(R"({"n": 1, "period": 1, "equations": ["k*x1"]})"), BindError);
}

TEST_CASE("model files round-trip") {
    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        const ModelSpec m = builtin_model(name);
        const ModelSpec back = parse_model_file(to_model_file(m));
        CHECK(to_model_file(back) == to_model_file(m));
        CHECK(back.hash() == m.hash());
        const std::vector<double> x0{0.7, 1.2, 0.9, 1.4};
        const auto a = integrate(m, x0, 0, 2, FixedStep{1e-3});
        const auto b = integrate(back, x0, 0, 2, FixedStep{1e-3});
        const auto fa = a.final_state(), fb = b.final_state();
        CHECK(std::equal(fa.begin(), fa.end(), fb.begin()));
    }
}

TEST_CASE("symbolic Jacobian matches central differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (const auto& name : builtin_names()) {
        const ModelSpec m = builtin_model(name);
        for (int k = 0; k < 20; ++k) {
            std::vector<double> x{u(rng), u(rng), u(rng), u(rng)};
            const double t = u(rng);
            const Eigen::MatrixXd J = m.eval_jacobian(t, x);
            const Eigen::MatrixXd F = oracle::finite_difference_jacobian(m, t, x);
            CAPTURE(name);
            CHECK((J - F).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, F.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("linear models have a constant Jacobian") {
    const ModelSpec m = random_two_positive_linear(5, false, 3);
    const std::vector<double> x{1, -2, 3, 0.5, 0}, y{-4, 0, 1, 2, 9};
    CHECK((m.eval_jacobian(0.1, x) - m.eval_jacobian(0.7, y)).cwiseAbs().maxCoeff() == 0.0);
}
