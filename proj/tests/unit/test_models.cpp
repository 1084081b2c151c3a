#include "cyclofeed/error.hpp"
#include "cyclofeed/models.hpp"
#include "cyclofeed/structure.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace cyclofeed;

TEST_CASE("antithetic controller") {
    const auto m = antithetic_controller();
    CHECK(m.cyclic());
    CHECK(m.n() == 4);
    CHECK(m.eval_rhs(0, std::vector<double>{2, 1, 0, 0})(1) == 1.0);
    CHECK(m.jacobian()[1][3].is_constant(0.0));
    CHECK(extract_feedback_signs(m, Box::uniform(4, 1e-3, 10)).Delta == -1);
    CHECK_THROWS_AS(antithetic_controller({1, 1, 1, 0, 1, 1, 1, 1}), DomainError);
    const auto custom = antithetic_controller({2, 3, 1, 1, 1, 1, 1, 1});
    CHECK(custom.eval_rhs(0, std::vector<double>{1, 1, 1, 1})(0) == -1.0);
}

TEST_CASE("periodic Lotka-Volterra") {
    auto co = LotkaVolterraCoefficients::uniform();
    co.a14 = "1 + 0.5*sin(2*pi*t)";
    const auto m = periodic_lotka_volterra(co);
    CHECK(extract_feedback_signs(m, Box::uniform(4, 1e-3, 10)).Delta == -1);

    co.a21 = "0.5*sin(2*pi*t)";
    CHECK_THROWS_AS(periodic_lotka_volterra(co), DomainError);
    co.a21 = "x1";
    CHECK_THROWS_AS(periodic_lotka_volterra(co), DomainError);
    co.a21 = "0.5";
    co.a14 = "sin(2*pi*t)^2";
    CHECK_THROWS_AS(periodic_lotka_volterra(co), DomainError);

    // Constant coefficients give an autonomous model.
    auto flat = LotkaVolterraCoefficients::uniform();
    flat.g.fill("1");
    const auto a = periodic_lotka_volterra(flat);
    const std::vector<double> x{0.4, 0.8, 1.2, 0.6};
    CHECK((a.eval_rhs(0.1, x) - a.eval_rhs(0.7, x)).norm() == 0.0);
    CHECK(a.eval_rhs(0, x)(0) == doctest::Approx(0.4 * (1 - 0.4 - 0.5 * 0.6)));
}

TEST_CASE("Lotka-Volterra keeps the open orthant invariant") {
    const auto m = builtin_model("lv-oscillating");
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int k = 0; k < 5; ++k) {
        const std::vector<double> x0{u(rng), u(rng), u(rng), u(rng)};
        const auto tr = integrate(m, x0, 0, 30, Adaptive{});
        double lo = 1e300;
        for (size_t s = 0; s < tr.size(); ++s)
            for (double v : tr.state(s)) lo = std::min(lo, v);
        CHECK(lo > 0.0);
    }
}

TEST_CASE("random 2-positive linear systems") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const int n = 3 + static_cast<int>(seed % 5);
        const bool periodic = seed % 2 == 1;
        const auto m = random_two_positive_linear(n, periodic, seed);
        const std::vector<double> zero(static_cast<size_t>(n), 0.0);
        for (double t : {0.0, 0.3, 0.77}) {
            const auto A = m.eval_jacobian(t, zero);
            CHECK(check_linear_two_positive(A).ok);
            CHECK(is_irreducible(A));
        }
        CHECK(to_model_file(random_two_positive_linear(n, periodic, seed)) == to_model_file(m));
    }
    CHECK(to_model_file(random_two_positive_linear(4, false, 1)) != to_model_file(random_two_positive_linear(4, false, 2)));
}

TEST_CASE("random linear systems neither grow nor decay") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const int n = 3 + static_cast<int>(seed % 4);
        const auto m = random_two_positive_linear(n, seed % 2 == 1, seed);
        std::vector<double> x0(static_cast<size_t>(n), 1.0);
        const auto tr = integrate(m, x0, 0, 20, Adaptive{1e-10, 1e-12});
        double norm = 0;
        for (double v : tr.final_state()) norm = std::max(norm, std::abs(v));
        CHECK(norm < 1e3);
        CHECK(norm > 1e-3);
    }
}

TEST_CASE("built-in registry") {
    for (const auto& name : builtin_names()) {
        CHECK(is_builtin(name));
        CHECK(builtin_model(name).name() == name);
    }
    CHECK_FALSE(is_builtin("nope"));
    CHECK_THROWS_AS(builtin_model("nope"), DomainError);
}

TEST_CASE("shipped model files match the factories") {
    for (const auto& name : builtin_names()) {
        const std::filesystem::path p = std::filesystem::path(CYCLOFEED_SOURCE_DIR) / "models" / (name + ".json");
        std::ifstream f(p);
        REQUIRE_MESSAGE(f, p.string());
        std::stringstream ss;
        ss << f.rdbuf();
        const auto parsed = parse_model_file(ss.str());
        CHECK(to_model_file(parsed) == to_model_file(builtin_model(name)));
        CHECK(parsed.hash() == builtin_model(name).hash());
    }
}
