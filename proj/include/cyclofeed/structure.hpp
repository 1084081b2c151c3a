#pragma once

// Structural hypotheses of cyclic feedback systems: feedback signs, the
// sign-flip transformation to canonical form, the linear 2-positive sign
// pattern, additive compound matrices, irreducibility, and the dissipative
// condition (H).

#include "cyclofeed/model.hpp"
#include "cyclofeed/ode.hpp"
#include "cyclofeed/sign.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cyclofeed {

/// Deterministic sampling of [0, T] x region.
struct SamplingSpec {
    int time_samples = 8;     // t_k = k T / time_samples
    int state_samples = 256;  // uniform draws per time sample
    std::uint64_t seed = 1;
};

struct SignViolation {
    int equation = 0;  // 1-based i
    int variable = 0;  // 1-based j
    double t = 0.0;
    std::vector<double> x;
    double value = 0.0;  // sampled d f_i / d x_j
};

struct FeedbackSignature {
    DeltaVector delta;
    int Delta = 0;
    std::vector<SignViolation> violations;
    long samples_checked = 0;
    long inconclusive = 0;

    bool certified() const noexcept { return violations.empty(); }
};

/// Samples below this magnitude are inconclusive and never count as violations.
inline constexpr double kSignThreshold = 1e-10;

/// Reads delta_i from the sign of d f_i / d x_{i-1} at the first conclusive
/// sample, then records every sample where delta_i d f_i / d x_{i-1} <= 0 or
/// delta_{i+1} d f_i / d x_{i+1} < 0 (cyclic, including i = 1 and i = n).
/// Throws IndeterminateSignError when some d f_i / d x_{i-1} is inconclusive
/// at every sample.
FeedbackSignature extract_feedback_signs(const ModelSpec& m, const Box& region, const SamplingSpec& grid = {},
                                         double tau_sign = kSignThreshold);

/// y_i = mu_i x_i with mu_i = delta_1 ... delta_i. The returned model has
/// g_i(y) = mu_i f_i(mu_{i-1} y_{i-1}, mu_i y_i, mu_{i+1} y_{i+1}).
/// Throws HypothesisError when the signature carries violations.
ModelSpec canonical_transform(const ModelSpec& m, const FeedbackSignature& sig);

struct PatternViolation {
    int i = 0;  // 1-based
    int j = 0;  // 1-based; (0, 0) marks the cycle-product condition
    double value = 0.0;
    std::string rule;
};

struct LinearPatternReport {
    bool ok = false;
    double sub_product = 0.0;    // prod_i a_{i,i-1}
    double super_product = 0.0;  // prod_i a_{i,i+1}
    std::vector<PatternViolation> violations;

    /// True when only the sign-pattern rules hold (ignoring the product condition).
    bool sign_pattern_ok() const;
};

/// Corners a_{1n}, a_{n1} <= 0, cyclic neighbours >= 0, zero outside the
/// tridiagonal-plus-corners band, and prod a_{i,i-1} + prod a_{i,i+1} < 0.
LinearPatternReport check_linear_two_positive(const Eigen::MatrixXd& A);

/// k-th additive compound, indexed by k-subsets in lexicographic order.
Eigen::MatrixXd additive_compound(const Eigen::MatrixXd& A, int k);

/// The k-subsets of {1..n} in the order used by additive_compound.
std::vector<std::vector<int>> k_subsets(int n, int k);

bool is_metzler(const Eigen::MatrixXd& M);

/// Strong connectivity of the digraph with an edge i -> j when |a_ij| > tol, i != j.
bool is_irreducible(const Eigen::MatrixXd& A, double tol = 0.0);

struct DissipativeSampling {
    int time_samples = 8;
    int samples_per_index = 200;
    double radius_factor = 4.0;  // |x_i| drawn from [C, radius_factor * C]
    std::uint64_t seed = 1;
};

struct HViolation {
    int index = 0;  // 1-based i
    double t = 0.0;
    std::vector<double> x;
    double value = 0.0;  // f_i(t, x) * x_i
};

struct BoxEntry {
    std::vector<double> x0;
    bool entered = false;
    double entry_time = 0.0;
    bool retained = false;
};

struct DissipativityReport {
    double C = 0.0;
    long samples_checked = 0;
    std::vector<HViolation> violations;
    std::vector<BoxEntry> absorbing_box_entries;

    bool holds() const noexcept { return violations.empty(); }
};

/// Probes f_i(t, x) x_i < 0 on samples with |x_i| >= C and |x_{i+-1}| <= |x_i|,
/// restricted to the model's domain when it declares one.
DissipativityReport check_dissipative_H(const ModelSpec& m, double C, const DissipativeSampling& grid = {});

/// As above, then integrates each initial state over [0, horizon] and records
/// when it enters the box [-C, C]^n and whether it stays.
DissipativityReport check_dissipative_H(const ModelSpec& m, double C, const DissipativeSampling& grid,
                                        const std::vector<std::vector<double>>& initial_states, double horizon,
                                        const StepControl& control = Adaptive{});

/// Smallest C (to bisection precision) for which the sampled condition holds.
/// Returns nullopt when no C up to c_max passes.
std::optional<double> find_dissipative_bound(const ModelSpec& m, const DissipativeSampling& grid = {},
                                             double c_max = 1e6);

} // namespace cyclofeed
