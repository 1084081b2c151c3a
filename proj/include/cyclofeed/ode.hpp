#pragma once

#include "cyclofeed/model.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cyclofeed {

/// Classical fourth-order Runge-Kutta on a uniform grid. The step is adjusted
/// down so that the span is an integer number of steps.
struct FixedStep {
    double h = 1e-3;
};

/// Dormand-Prince 5(4) with PI step-size control and error-per-step norm
/// max_i |e_i| / (atol + rtol * max(|y_i|, |y_new_i|)).
struct Adaptive {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h0 = 0.0;  // 0 selects an initial step automatically
    long max_steps = 10'000'000;
};

using StepControl = std::variant<FixedStep, Adaptive>;

/// States with norm above this abort integration.
inline constexpr double kBlowUpBound = 1e12;

/// x' = f(t, x) written into dx.
using RhsFunction = std::function<void(double, std::span<const double>, std::span<double>)>;

/// Solution samples with their derivatives, stored in integration order.
///
/// Times are strictly monotone in the direction of integration (decreasing for
/// backward runs). Dense output is cubic Hermite and reproduces the stored
/// samples exactly at grid times.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(int n, std::string model_hash, std::string method, double step);

    int dimension() const noexcept { return n_; }
    size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }

    const std::vector<double>& times() const noexcept { return times_; }
    double time(size_t k) const { return times_[k]; }
    std::span<const double> state(size_t k) const;
    std::span<const double> derivative(size_t k) const;
    std::span<const double> final_state() const { return state(size() - 1); }

    const std::string& model_hash() const noexcept { return model_hash_; }
    const std::string& method() const noexcept { return method_; }
    /// Fixed step size, or the requested rtol for adaptive runs.
    double step() const noexcept { return step_; }

    /// Dense evaluation at any t within the covered interval.
    Eigen::VectorXd at(double t) const;
    /// Single component of the dense evaluation (0-based).
    double component_at(int i, double t) const;

    void append(double t, std::span<const double> x, std::span<const double> dx);

    /// CSV with header `t,x1,...,xn` and 17 significant digits.
    void write_csv(std::ostream& os) const;

private:
    size_t locate(double t) const;

    int n_ = 0;
    std::string model_hash_;
    std::string method_;
    double step_ = 0.0;
    std::vector<double> times_;
    std::vector<double> states_;
    std::vector<double> derivs_;
};

/// Integrates the model from (t0, x0) to t1; t1 < t0 integrates backward.
/// Throws BlowUpError (non-finite state or norm above kBlowUpBound) and
/// StepUnderflowError (adaptive mode).
Trajectory integrate(const ModelSpec& m, std::span<const double> x0, double t0, double t1,
                     const StepControl& control = FixedStep{});

/// Same as above for an arbitrary right-hand side of dimension n.
Trajectory integrate(const RhsFunction& f, int n, std::span<const double> x0, double t0, double t1,
                     const StepControl& control, const std::string& tag = "rhs");

/// Gauss-Legendre nodes and weights on [0, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre_unit(int nodes);

/// A~(t) with entries int_0^1 d f_i / d x_j (t, r x + (1 - r) y) dr, by
/// Gauss-Legendre quadrature. The difference z = x - y of two solutions
/// satisfies z' = A~(t) z.
Eigen::MatrixXd difference_matrix(const ModelSpec& m, std::span<const double> x, std::span<const double> y,
                                  double t, int quad_nodes = 8);

/// Times where the given component (0-based) changes sign, localized by
/// bisection on the dense interpolant to within refine_tol. Tangential
/// contacts without a sign change are not reported.
std::vector<double> locate_zero_crossings(const Trajectory& traj, int component, double refine_tol = 1e-10);

} // namespace cyclofeed
