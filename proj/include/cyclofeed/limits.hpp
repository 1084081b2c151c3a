#pragma once

// Poincare map, omega-limit approximation, sigma traces along differences of
// solutions, and the numerical verifications built on them.

#include "cyclofeed/model.hpp"
#include "cyclofeed/ode.hpp"
#include "cyclofeed/sign.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cyclofeed {

using StateVector = std::vector<double>;

/// phi(T, x), integrating over one period from t = 0.
StateVector poincare_map(const ModelSpec& m, std::span<const double> x, const StepControl& control = Adaptive{});

struct OmegaOptions {
    int burn_in = 500;  // K
    int window = 200;   // M
    double eps = 1e-4;  // cluster radius
    StepControl control = Adaptive{};
    long max_iterations = 1'000'000;
};

struct OmegaSetApprox {
    std::vector<StateVector> points;
    std::vector<long> iterates;  // k with points[j] = P^k(x0)
    StateVector base_point;
    int burn_in = 0;
    int collected = 0;
    double cluster_radius = 0.0;
    bool converged = false;
    double net_change = 0.0;  // Hausdorff distance between the half-window and full-window nets
};

OmegaSetApprox omega_limit_approx(const ModelSpec& m, std::span<const double> x0, const OmegaOptions& opts = {});

/// Greedy eps-net in the given order: a point is kept when it is at least eps
/// from every point kept before it.
std::vector<size_t> greedy_net(const std::vector<StateVector>& pts, double eps);

double hausdorff_distance(const std::vector<StateVector>& a, const std::vector<StateVector>& b);

struct DropEvent {
    double t_before = 0.0;  // last valid sample before the drop
    double t_after = 0.0;   // first valid sample after it
    int sigma_before = 0;
    int sigma_after = 0;
    std::optional<double> crossing;  // refined zero crossing of some component inside the bracket
};

struct TraceOptions {
    double t0 = 0.0;
    double t1 = 1.0;
    StepControl control = FixedStep{5e-4};
    int samples = 4000;  // uniform samples for adaptive runs; fixed-step runs use their own grid
    double zero_tol = 1e-9;
    double refine_tol = 1e-10;
    double bracket_tol = 1e-6;
    int gate_every = 50;  // difference-matrix sign-pattern checks, every this many samples
    std::optional<DeltaVector> delta;  // canonical when empty
    double trailing_fraction = 0.2;
};

struct SigmaTrace {
    static constexpr int kOffLambda = 0;

    DeltaVector delta;
    std::vector<double> times;
    std::vector<int> sigma;          // kOffLambda where the sample is not safely inside Lambda
    std::vector<double> pair_margin;  // min_i |(z_i, z_{i+1})|_2 per sample
    std::vector<DropEvent> drops;
    std::vector<DropEvent> increases;
    std::optional<int> eventual_constant;  // constant value on the trailing window
    double onset_time = 0.0;
    long gate_checks = 0;
    long gate_violations = 0;
    std::string gate_message;

    long valid_samples() const;
    bool hypothesis_ok() const noexcept { return gate_violations == 0; }
    /// `t,sigma` with an empty sigma field at off-Lambda samples.
    void write_csv(std::ostream& os) const;
};

/// Traces sigma(phi(t, x) - phi(t, y)). Throws DomainError when x = y.
SigmaTrace sigma_trace_pair(const ModelSpec& m, std::span<const double> x, std::span<const double> y,
                            const TraceOptions& opts = {});

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);
/// 0 pass, 2 fail, 3 inconclusive.
int exit_code(Verdict v);

struct VerificationReport {
    Verdict verdict = Verdict::Inconclusive;
    nlohmann::ordered_json statistics = nlohmann::ordered_json::object();
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<std::string> messages;
    std::vector<std::string> artifacts;

    nlohmann::ordered_json to_json() const;
    std::string dump() const;
};

/// Pass when in-Lambda samples never increase, each drop is bracketed by a
/// component zero crossing, every value is odd, and the trailing window is
/// constant. Unexplained drops, a failed hypothesis gate, or fewer than
/// min_valid samples give an inconclusive verdict.
VerificationReport verify_sigma_monotone(const SigmaTrace& trace, int min_valid = 10);

struct PairOptions {
    int pair_budget = 50;
    double periods = 5.0;
    StepControl control = FixedStep{5e-4};
    double zero_tol = 1e-9;
    int threads = 0;  // 0 uses the hardware concurrency
};

/// Traces pairs of net points and checks that each trace is constant with no
/// off-Lambda sample after the first period. Traces are returned through
/// `traces` in pair order when it is non-null.
VerificationReport verify_sigma_constancy_on_omega(const ModelSpec& m, const OmegaSetApprox& omega,
                                                   const PairOptions& opts = {},
                                                   std::vector<SigmaTrace>* traces = nullptr);

/// Pairs (i, j), i < j, chosen for a budget: all of them when they fit, else
/// evenly spaced in lexicographic order.
std::vector<std::pair<size_t, size_t>> select_pairs(size_t count, int budget);

std::vector<std::array<double, 2>> embed_projection(const OmegaSetApprox& omega);

VerificationReport verify_embedding_injectivity(const OmegaSetApprox& omega);

VerificationReport verify_conjugacy(const OmegaSetApprox& omega, const ModelSpec& m,
                                    const StepControl& control = Adaptive{});

} // namespace cyclofeed
