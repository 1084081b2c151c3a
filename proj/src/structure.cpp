#include "cyclofeed/structure.hpp"

#include "cyclofeed/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>

namespace cyclofeed {

namespace {

struct Sample {
    double t;
    std::vector<double> x;
};

std::vector<Sample> sample_region(const ModelSpec& m, const Box& region, const SamplingSpec& grid) {
    if (region.size() != m.n()) throw DimensionError("sampling region has the wrong dimension");
    if (!region.bounded()) throw DomainError("sampling region must be bounded");
    for (int i = 0; i < region.size(); ++i)
        if (!(region.upper[static_cast<size_t>(i)] > region.lower[static_cast<size_t>(i)]))
            throw DomainError("sampling region must have positive volume");
    if (grid.time_samples < 1 || grid.state_samples < 1) throw DomainError("sampling grid is empty");

    std::mt19937_64 rng(grid.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Sample> out;
    out.reserve(static_cast<size_t>(grid.time_samples) * static_cast<size_t>(grid.state_samples));
    for (int k = 0; k < grid.time_samples; ++k) {
        const double t = m.period() * k / grid.time_samples;
        for (int s = 0; s < grid.state_samples; ++s) {
            std::vector<double> x(static_cast<size_t>(m.n()));
            for (size_t i = 0; i < x.size(); ++i)
                x[i] = region.lower[i] + unit(rng) * (region.upper[i] - region.lower[i]);
            out.push_back({t, std::move(x)});
        }
    }
    return out;
}

int sgn(double v) { return v > 0 ? 1 : -1; }

} // namespace

FeedbackSignature extract_feedback_signs(const ModelSpec& m, const Box& region, const SamplingSpec& grid,
                                         double tau_sign) {
    if (!m.cyclic()) throw HypothesisError("feedback signs are defined for cyclic models only");
    const int n = m.n();
    const auto samples = sample_region(m, region, grid);

    std::vector<int> delta(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const int prev = (i + n - 1) % n;
        for (const auto& s : samples) {
            const double v = m.eval_jacobian_entry(i, prev, s.t, s.x);
            if (std::abs(v) > tau_sign) {
                delta[static_cast<size_t>(i)] = sgn(v);
                break;
            }
        }
        if (delta[static_cast<size_t>(i)] == 0)
            throw IndeterminateSignError("sign of d f" + std::to_string(i + 1) + "/d x" + std::to_string(prev + 1) +
                                             " is indeterminate on every sample",
                                         i + 1);
    }

    FeedbackSignature sig;
    sig.delta = DeltaVector(delta);
    sig.Delta = sig.delta.product();
    for (const auto& s : samples) {
        for (int i = 0; i < n; ++i) {
            const int prev = (i + n - 1) % n;
            const int next = (i + 1) % n;
            const double lower = m.eval_jacobian_entry(i, prev, s.t, s.x);
            if (std::abs(lower) <= tau_sign)
                ++sig.inconclusive;
            else if (delta[static_cast<size_t>(i)] * lower <= 0)
                sig.violations.push_back({i + 1, prev + 1, s.t, s.x, lower});
            ++sig.samples_checked;

            const double upper = m.eval_jacobian_entry(i, next, s.t, s.x);
            if (std::abs(upper) > tau_sign && delta[static_cast<size_t>(next)] * upper < 0)
                sig.violations.push_back({i + 1, next + 1, s.t, s.x, upper});
            ++sig.samples_checked;
        }
    }
    return sig;
}

ModelSpec canonical_transform(const ModelSpec& m, const FeedbackSignature& sig) {
    if (!sig.certified())
        throw HypothesisError("refusing to transform: the feedback signature has " +
                              std::to_string(sig.violations.size()) + " violations");
    if (sig.delta.size() != m.n()) throw DimensionError("signature dimension does not match the model");
    const auto mu = sig.delta.mu();

    std::vector<Expression> subs;
    for (int j = 0; j < m.n(); ++j) {
        Expression xj = Expression::state(j + 1);
        subs.push_back(mu[static_cast<size_t>(j)] == 1 ? xj : Expression::unary(Op::Neg, xj));
    }
    std::vector<Expression> rhs;
    for (int i = 0; i < m.n(); ++i) {
        Expression g = substitute_states(m.rhs()[static_cast<size_t>(i)], subs);
        rhs.push_back(mu[static_cast<size_t>(i)] == 1 ? g : Expression::unary(Op::Neg, g));
    }

    std::optional<Box> domain;
    if (m.domain()) {
        Box b = *m.domain();
        for (size_t j = 0; j < mu.size(); ++j)
            if (mu[j] == -1) {
                const double lo = b.lower[j];
                b.lower[j] = -b.upper[j];
                b.upper[j] = -lo;
            }
        domain = std::move(b);
    }
    std::string name = m.name().empty() ? std::string{} : m.name() + "-canonical";
    return ModelSpec(m.n(), m.period(), std::move(rhs), m.params(), m.cyclic(), std::move(domain), std::move(name));
}

// ---------------------------------------------------------------------------
// Linear pattern and compounds

bool LinearPatternReport::sign_pattern_ok() const {
    return std::none_of(violations.begin(), violations.end(),
                        [](const PatternViolation& v) { return v.i != 0 || v.j != 0; });
}

LinearPatternReport check_linear_two_positive(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw DimensionError("matrix must be square");
    const int n = static_cast<int>(A.rows());
    if (n < 3) throw DimensionError("cyclic patterns need n >= 3");

    LinearPatternReport rep;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double a = A(i, j);
            const bool corner = (i == 0 && j == n - 1) || (i == n - 1 && j == 0);
            const int gap = std::abs(i - j);
            if (corner) {
                if (a > 0) rep.violations.push_back({i + 1, j + 1, a, "corner entry must be <= 0"});
            } else if (gap == 1) {
                if (a < 0) rep.violations.push_back({i + 1, j + 1, a, "neighbour entry must be >= 0"});
            } else if (a != 0) {
                rep.violations.push_back({i + 1, j + 1, a, "entry outside the cyclic band must be 0"});
            }
        }
    }
    double sub = 1.0, super = 1.0;
    for (int i = 0; i < n; ++i) {
        sub *= A(i, (i + n - 1) % n);
        super *= A(i, (i + 1) % n);
    }
    rep.sub_product = sub;
    rep.super_product = super;
    if (!(sub + super < 0)) rep.violations.push_back({0, 0, sub + super, "cycle products must sum to < 0"});
    rep.ok = rep.violations.empty();
    return rep;
}

std::vector<std::vector<int>> k_subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) cur[static_cast<size_t>(i)] = i + 1;
    for (;;) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<size_t>(i)] == n - k + i + 1) --i;
        if (i < 0) break;
        ++cur[static_cast<size_t>(i)];
        for (int j = i + 1; j < k; ++j) cur[static_cast<size_t>(j)] = cur[static_cast<size_t>(j - 1)] + 1;
    }
    return out;
}

Eigen::MatrixXd additive_compound(const Eigen::MatrixXd& A, int k) {
    if (A.rows() != A.cols()) throw DimensionError("matrix must be square");
    const int n = static_cast<int>(A.rows());
    if (k < 1 || k > n) throw DomainError("compound order k must satisfy 1 <= k <= n");

    const auto subsets = k_subsets(n, k);
    std::map<std::vector<int>, int> index;
    for (size_t s = 0; s < subsets.size(); ++s) index[subsets[s]] = static_cast<int>(s);

    const auto N = static_cast<Eigen::Index>(subsets.size());
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N, N);
    for (size_t r = 0; r < subsets.size(); ++r) {
        const auto& S = subsets[r];
        for (int i : S) C(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) += A(i - 1, i - 1);
        for (int i : S) {
            for (int j = 1; j <= n; ++j) {
                if (std::find(S.begin(), S.end(), j) != S.end()) continue;
                std::vector<int> T = S;
                std::replace(T.begin(), T.end(), i, j);
                std::sort(T.begin(), T.end());
                int p = 0;
                for (int s : S)
                    if (s > std::min(i, j) && s < std::max(i, j)) ++p;
                const double sign = p % 2 == 0 ? 1.0 : -1.0;
                C(static_cast<Eigen::Index>(r), index.at(T)) = sign * A(i - 1, j - 1);
            }
        }
    }
    return C;
}

bool is_metzler(const Eigen::MatrixXd& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            if (i != j && M(i, j) < 0) return false;
    return true;
}

bool is_irreducible(const Eigen::MatrixXd& A, double tol) {
    if (A.rows() != A.cols()) throw DimensionError("matrix must be square");
    const auto n = A.rows();
    if (n <= 1) return true;
    auto reaches_all = [&](bool transpose) {
        std::vector<char> seen(static_cast<size_t>(n), 0);
        std::queue<Eigen::Index> q;
        q.push(0);
        seen[0] = 1;
        Eigen::Index count = 1;
        while (!q.empty()) {
            const auto u = q.front();
            q.pop();
            for (Eigen::Index v = 0; v < n; ++v) {
                if (v == u || seen[static_cast<size_t>(v)]) continue;
                const double a = transpose ? A(v, u) : A(u, v);
                if (std::abs(a) > tol) {
                    seen[static_cast<size_t>(v)] = 1;
                    ++count;
                    q.push(v);
                }
            }
        }
        return count == n;
    };
    return reaches_all(false) && reaches_all(true);
}

// ---------------------------------------------------------------------------
// Dissipativity

namespace {

struct Interval {
    double lo;
    double hi;
    bool empty() const { return !(hi >= lo); }
};

Interval intersect(Interval a, double lo, double hi) { return {std::max(a.lo, lo), std::min(a.hi, hi)}; }

} // namespace

DissipativityReport check_dissipative_H(const ModelSpec& m, double C, const DissipativeSampling& grid) {
    if (!(C > 0)) throw DomainError("dissipativity bound C must be positive");
    const int n = m.n();
    const Box domain = m.domain() ? *m.domain() : Box::uniform(n, -INFINITY, INFINITY);
    std::mt19937_64 rng(grid.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    DissipativityReport rep;
    rep.C = C;
    auto dom = [&](int j) { return Interval{domain.lower[static_cast<size_t>(j)], domain.upper[static_cast<size_t>(j)]}; };
    auto draw = [&](Interval iv) { return iv.lo + unit(rng) * (iv.hi - iv.lo); };

    auto test = [&](int i, double t, const std::vector<double>& x) {
        const double v = m.eval_rhs(t, x)(i) * x[static_cast<size_t>(i)];
        ++rep.samples_checked;
        if (v >= 0) rep.violations.push_back({i + 1, t, x, v});
    };

    for (int k = 0; k < grid.time_samples; ++k) {
        const double t = m.period() * k / std::max(1, grid.time_samples);
        for (int i = 0; i < n; ++i) {
            const int prev = (i + n - 1) % n;
            const int next = (i + 1) % n;
            std::vector<int> signs;
            if (domain.upper[static_cast<size_t>(i)] >= C) signs.push_back(1);
            if (domain.lower[static_cast<size_t>(i)] <= -C) signs.push_back(-1);
            if (signs.empty()) continue;

            // Extreme configurations: |x_i| at both ends of the band, neighbours at {-r, 0, r}.
            for (double r : {C, grid.radius_factor * C}) {
                for (int s : signs) {
                    const double xi = s * r;
                    if (xi < domain.lower[static_cast<size_t>(i)] || xi > domain.upper[static_cast<size_t>(i)]) continue;
                    for (double a : {-r, 0.0, r}) {
                        for (double b : {-r, 0.0, r}) {
                            std::vector<double> x(static_cast<size_t>(n));
                            for (int j = 0; j < n; ++j)
                                x[static_cast<size_t>(j)] = std::clamp(0.0, domain.lower[static_cast<size_t>(j)],
                                                                       domain.upper[static_cast<size_t>(j)]);
                            x[static_cast<size_t>(prev)] = a;
                            x[static_cast<size_t>(next)] = b;
                            x[static_cast<size_t>(i)] = xi;
                            if (!domain.contains(x)) continue;
                            test(i, t, x);
                        }
                    }
                }
            }

            for (int s = 0; s < grid.samples_per_index; ++s) {
                const double r = C * (1.0 + unit(rng) * (grid.radius_factor - 1.0));
                const int sign = signs[static_cast<size_t>(s) % signs.size()];
                std::vector<double> x(static_cast<size_t>(n));
                bool ok = true;
                for (int j = 0; j < n; ++j) {
                    const Interval iv = intersect(dom(j), -r, r);
                    if (iv.empty()) {
                        ok = false;
                        break;
                    }
                    x[static_cast<size_t>(j)] = draw(iv);
                }
                x[static_cast<size_t>(i)] = sign * r;
                if (!ok || !domain.contains(x)) continue;
                test(i, t, x);
            }
        }
    }
    return rep;
}

DissipativityReport check_dissipative_H(const ModelSpec& m, double C, const DissipativeSampling& grid,
                                        const std::vector<std::vector<double>>& initial_states, double horizon,
                                        const StepControl& control) {
    DissipativityReport rep = check_dissipative_H(m, C, grid);
    const double inside = C * (1.0 + 1e-9);
    for (const auto& x0 : initial_states) {
        BoxEntry entry;
        entry.x0 = x0;
        const Trajectory traj = integrate(m, x0, 0.0, horizon, control);
        long first = -1;
        bool stays = true;
        for (size_t k = 0; k < traj.size(); ++k) {
            const auto x = traj.state(k);
            const bool in = std::all_of(x.begin(), x.end(), [&](double v) { return std::abs(v) <= inside; });
            if (in && first < 0) first = static_cast<long>(k);
            if (!in && first >= 0) stays = false;
        }
        entry.entered = first >= 0;
        entry.entry_time = entry.entered ? traj.time(static_cast<size_t>(first)) : 0.0;
        entry.retained = entry.entered && stays;
        rep.absorbing_box_entries.push_back(std::move(entry));
    }
    return rep;
}

std::optional<double> find_dissipative_bound(const ModelSpec& m, const DissipativeSampling& grid, double c_max) {
    auto passes = [&](double C) { return check_dissipative_H(m, C, grid).holds(); };
    double hi = 1.0;
    while (!passes(hi)) {
        hi *= 2.0;
        if (hi > c_max) return std::nullopt;
    }
    double lo = hi / 2.0;
    while (lo > 1e-6 && passes(lo)) {
        hi = lo;
        lo /= 2.0;
    }
    for (int it = 0; it < 40 && hi - lo > 1e-9 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (passes(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

} // namespace cyclofeed
