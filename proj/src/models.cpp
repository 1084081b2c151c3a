#include "cyclofeed/models.hpp"

#include "cyclofeed/error.hpp"
#include "cyclofeed/ode.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace cyclofeed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Box positive_orthant(int n) { return Box::uniform(n, 0.0, kInf); }

Expression x(int i) { return Expression::state(i); }
Expression c(double v) { return Expression::constant(v); }
Expression mul(Expression a, Expression b) { return Expression::binary(Op::Mul, std::move(a), std::move(b)); }
Expression add(Expression a, Expression b) { return Expression::binary(Op::Add, std::move(a), std::move(b)); }
Expression sub(Expression a, Expression b) { return Expression::binary(Op::Sub, std::move(a), std::move(b)); }

} // namespace

ModelSpec antithetic_controller(const std::array<double, 8>& a) {
    ParamTable p;
    for (size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0) || !std::isfinite(a[i]))
            throw DomainError("antithetic controller rate a" + std::to_string(i + 1) + " must be positive");
        p["a" + std::to_string(i + 1)] = a[i];
    }
    std::vector<Expression> rhs = {
        parse_expression("a1 - a2*x1*x4"),
        parse_expression("a3*x1 - a4*x2"),
        parse_expression("a5*x2 - a6*x3"),
        parse_expression("a7*x3 - a8*x1*x4"),
    };
    return ModelSpec(4, 1.0, std::move(rhs), std::move(p), true, positive_orthant(4), "antithetic");
}

LotkaVolterraCoefficients LotkaVolterraCoefficients::uniform() {
    LotkaVolterraCoefficients c;
    c.g.fill("1 + 0.2*sin(2*pi*t)");
    c.a11 = c.a22 = c.a33 = c.a44 = "1";
    c.a14 = c.a21 = c.a23 = c.a32 = c.a34 = c.a43 = "0.5";
    c.period = 1.0;
    return c;
}

LotkaVolterraCoefficients LotkaVolterraCoefficients::oscillating() {
    LotkaVolterraCoefficients c;
    c.g = {"10 + sin(2*pi*t)", "0.1", "0.1", "0.1"};
    c.a11 = c.a22 = c.a33 = c.a44 = "1";
    c.a14 = "10 + cos(2*pi*t)";
    c.a21 = c.a32 = c.a43 = "0.9";
    c.a23 = c.a34 = "0.02";
    c.period = 1.0;
    return c;
}

ModelSpec periodic_lotka_volterra(const LotkaVolterraCoefficients& co, const std::string& name) {
    if (!(co.period > 0) || !std::isfinite(co.period)) throw DomainError("period must be positive and finite");

    auto coefficient = [&](const std::string& label, const std::string& text, bool may_vanish) {
        Expression e;
        try {
            e = parse_expression(text);
        } catch (const ParseError& err) {
            throw DomainError("coefficient " + label + ": " + err.what());
        }
        if (max_state_index(e) > 0 || !param_names(e).empty())
            throw DomainError("coefficient " + label + " may depend on t only");
        const Program prog(e, {}, 4);
        bool all_zero = true;
        const std::array<double, 4> origin{};
        for (int k = 0; k <= 256; ++k) {
            const double t = co.period * k / 256.0;
            const double v = prog.run(t, origin);
            if (v != 0.0) all_zero = false;
            if (!(v > 0) && !(may_vanish && v == 0.0))
                throw DomainError("coefficient " + label + " is not positive at t = " + std::to_string(t));
        }
        if (may_vanish && !all_zero) {
            for (int k = 0; k <= 256; ++k)
                if (!(prog.run(co.period * k / 256.0, origin) > 0))
                    throw DomainError("coefficient " + label + " must be positive or identically zero");
        }
        return e;
    };

    const Expression g1 = coefficient("g1", co.g[0], false), g2 = coefficient("g2", co.g[1], false),
                     g3 = coefficient("g3", co.g[2], false), g4 = coefficient("g4", co.g[3], false);
    const Expression a11 = coefficient("a11", co.a11, false), a14 = coefficient("a14", co.a14, true),
                     a21 = coefficient("a21", co.a21, false), a22 = coefficient("a22", co.a22, false),
                     a23 = coefficient("a23", co.a23, false), a32 = coefficient("a32", co.a32, false),
                     a33 = coefficient("a33", co.a33, false), a34 = coefficient("a34", co.a34, false),
                     a43 = coefficient("a43", co.a43, false), a44 = coefficient("a44", co.a44, false);

    std::vector<Expression> rhs;
    if (a14.is_constant(0.0))
        rhs.push_back(mul(x(1), sub(g1, mul(a11, x(1)))));
    else
        rhs.push_back(mul(x(1), sub(sub(g1, mul(a11, x(1))), mul(a14, x(4)))));
    rhs.push_back(mul(x(2), add(sub(add(g2, mul(a21, x(1))), mul(a22, x(2))), mul(a23, x(3)))));
    rhs.push_back(mul(x(3), add(sub(add(g3, mul(a32, x(2))), mul(a33, x(3))), mul(a34, x(4)))));
    rhs.push_back(mul(x(4), sub(add(g4, mul(a43, x(3))), mul(a44, x(4)))));
    return ModelSpec(4, co.period, std::move(rhs), {}, true, positive_orthant(4), name);
}

ModelSpec random_two_positive_linear(int n, bool periodic, std::uint64_t seed) {
    if (n < 3) throw DimensionError("cyclic systems need n >= 3");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) A(i, i) = uniform(-1.0, 1.0);
    for (int i = 1; i < n; ++i) A(i, i - 1) = uniform(0.2, 1.5);
    A(0, n - 1) = -uniform(0.2, 1.5);
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = unit(rng) < 0.3 ? 0.0 : uniform(0.0, 1.0);
    A(n - 1, 0) = unit(rng) < 0.3 ? 0.0 : -uniform(0.0, 1.0);

    const double T = 1.0;
    Eigen::MatrixXd phase = Eigen::MatrixXd::Zero(n, n);
    if (periodic)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && A(i, j) != 0.0) phase(i, j) = uniform(0.0, 2.0 * std::numbers::pi);

    auto build = [&](const Eigen::MatrixXd& M) {
        const Expression modulation_time = mul(c(2.0 * std::numbers::pi / T), Expression::time());
        std::vector<Expression> rhs;
        for (int i = 0; i < n; ++i) {
            Expression row;
            bool first = true;
            for (int j : {(i + n - 1) % n, i, (i + 1) % n}) {
                const double a = M(i, j);
                if (a == 0.0) continue;
                Expression coeff = c(a);
                if (periodic && i != j) {
                    const Expression s = Expression::unary(Op::Sin, add(modulation_time, c(phase(i, j))));
                    coeff = mul(coeff, add(c(1.0), mul(c(0.5), s)));
                }
                Expression term = mul(coeff, x(j + 1));
                row = first ? term : add(row, term);
                first = false;
            }
            rhs.push_back(first ? c(0.0) : row);
        }
        return ModelSpec(n, T, std::move(rhs), {}, true, std::nullopt,
                         "random-linear-n" + std::to_string(n) + (periodic ? "-periodic" : "-constant") + "-s" +
                             std::to_string(seed));
    };

    double exponent = 0.0;
    if (!periodic) {
        exponent = Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().real().maxCoeff();
    } else {
        const ModelSpec raw = build(A);
        Eigen::MatrixXd monodromy(n, n);
        for (int j = 0; j < n; ++j) {
            std::vector<double> e(static_cast<size_t>(n), 0.0);
            e[static_cast<size_t>(j)] = 1.0;
            const Trajectory tr = integrate(raw, e, 0.0, T, Adaptive{1e-12, 1e-14});
            const auto xf = tr.final_state();
            for (int i = 0; i < n; ++i) monodromy(i, j) = xf[static_cast<size_t>(i)];
        }
        const auto mult = Eigen::EigenSolver<Eigen::MatrixXd>(monodromy, false).eigenvalues();
        exponent = std::log(mult.cwiseAbs().maxCoeff()) / T;
    }
    for (int i = 0; i < n; ++i) A(i, i) -= exponent;
    return build(A);
}

std::vector<std::string> builtin_names() { return {"antithetic", "lv-oscillating", "lv-tridiagonal", "lv-uniform"}; }

bool is_builtin(const std::string& name) {
    const auto names = builtin_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

ModelSpec builtin_model(const std::string& name) {
    if (name == "antithetic") return antithetic_controller();
    if (name == "lv-oscillating") return periodic_lotka_volterra(LotkaVolterraCoefficients::oscillating(), name);
    if (name == "lv-uniform") return periodic_lotka_volterra(LotkaVolterraCoefficients::uniform(), name);
    if (name == "lv-tridiagonal") {
        auto co = LotkaVolterraCoefficients::uniform();
        co.a14 = "0";
        return periodic_lotka_volterra(co, name);
    }
    std::string list;
    for (const auto& n : builtin_names()) list += (list.empty() ? "" : ", ") + n;
    throw DomainError("unknown model '" + name + "'; built-in models: " + list);
}

} // namespace cyclofeed
