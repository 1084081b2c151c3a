#pragma once

// Sign-change machinery for cyclic feedback systems: the integer-valued
// Lyapunov function sigma, the admissible set Lambda on which it extends
// continuously, and its lower/upper neighborhood values.
//
// All indices are cyclic: x_0 = x_n and x_{n+1} = x_1.

#include <span>
#include <utility>
#include <vector>

namespace cyclofeed {

/// Feedback signs delta_i in {-1, +1}, one per equation.
class DeltaVector {
public:
    DeltaVector() = default;
    /// Throws DomainError on entries other than -1/+1 and DimensionError when n < 3.
    explicit DeltaVector(std::vector<int> signs);

    /// delta_1 = -1, delta_i = +1 for i >= 2.
    static DeltaVector canonical(int n);

    int size() const noexcept { return static_cast<int>(signs_.size()); }
    /// 0-based access.
    int operator[](int i) const { return signs_[static_cast<size_t>(i)]; }
    const std::vector<int>& signs() const noexcept { return signs_; }

    /// Delta = delta_1 * ... * delta_n.
    int product() const noexcept;
    bool is_canonical() const noexcept;

    /// Cumulative products mu_i = delta_1 * ... * delta_i (mu_n = Delta).
    std::vector<int> mu() const;

    bool operator==(const DeltaVector&) const = default;

private:
    std::vector<int> signs_;
};

struct SignOptions {
    /// A component is zero iff |x_i| <= zero_tol * max(1, ||x||_inf).
    double zero_tol = 1e-9;
};

/// n for odd n, n - 1 for even n. Throws DimensionError when n < 3.
int ntilde(int n);

/// Threshold-aware componentwise sign in {-1, 0, +1}.
std::vector<int> sign_pattern(std::span<const double> x, const SignOptions& opts = {});

/// card{ i : delta_i x_i x_{i-1} <= 0 }. Requires every component nonzero;
/// throws DomainError otherwise (use sigma_extended or sigma_min_max there).
int sigma(std::span<const double> x, const DeltaVector& d, const SignOptions& opts = {});

/// Same count evaluated on a pure sign vector (entries in {-1, +1}).
int sigma_of_signs(std::span<const int> s, const DeltaVector& d);

/// True iff every zero component x_i satisfies delta_i delta_{i+1} x_{i+1} x_{i-1} < 0.
bool in_lambda(std::span<const double> x, const DeltaVector& d, const SignOptions& opts = {});

/// (sigma_m(x), sigma_M(x)) by exhaustive resolution of the signs of the zero
/// components. The zero vector throws DomainError unless `allow_zero_vector`
/// is set, in which case (1, ntilde(n)) is returned.
std::pair<int, int> sigma_min_max(std::span<const double> x, const DeltaVector& d,
                                  const SignOptions& opts = {}, bool allow_zero_vector = false);

/// The continuous extension of sigma to Lambda. Throws DomainError when x is not in Lambda.
int sigma_extended(std::span<const double> x, const DeltaVector& d, const SignOptions& opts = {});

} // namespace cyclofeed
