#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include "cyclofeed/model.hpp"
#include "cyclofeed/sign.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

// (min, max) of sigma over random nonzero perturbations of x. Perturbed
// vectors have no zero component, so every sample lies in the open set where
// sigma is locally constant.
inline std::pair<int, int> sigma_by_perturbation(std::span<const double> x, const cyclofeed::DeltaVector& d,
                                                 int samples = 10000, std::uint64_t seed = 42) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double scale = 1.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    const double r = 1e-3 * scale;
    int lo = 1 << 30, hi = -1;
    std::vector<double> y(x.size());
    for (int s = 0; s < samples; ++s) {
        for (size_t i = 0; i < x.size(); ++i) {
            double p = u(rng) * r;
            if (std::abs(p) < 1e-6 * r) p = r * 0.5;
            y[i] = x[i] + p;
        }
        // Count directly from the definition.
        const int n = static_cast<int>(y.size());
        int count = 0;
        for (int i = 0; i < n; ++i)
            if (d[i] * y[static_cast<size_t>(i)] * y[static_cast<size_t>((i + n - 1) % n)] <= 0) ++count;
        lo = std::min(lo, count);
        hi = std::max(hi, count);
    }
    return {lo, hi};
}

inline Eigen::MatrixXd finite_difference_jacobian(const cyclofeed::ModelSpec& m, double t,
                                                  std::span<const double> x) {
    const int n = m.n();
    Eigen::MatrixXd J(n, n);
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
    for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[static_cast<size_t>(j)]));
        xp[static_cast<size_t>(j)] = x[static_cast<size_t>(j)] + h;
        xm[static_cast<size_t>(j)] = x[static_cast<size_t>(j)] - h;
        J.col(j) = (m.eval_rhs(t, xp) - m.eval_rhs(t, xm)) / (2.0 * h);
        xp[static_cast<size_t>(j)] = xm[static_cast<size_t>(j)] = x[static_cast<size_t>(j)];
    }
    return J;
}

// exp(A) by scaling and squaring with a 20-term Taylor polynomial.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
    const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Eigen::MatrixXd B = A / std::ldexp(1.0, s);
    const auto n = A.rows();
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n), sum = term;
    for (int k = 1; k <= 20; ++k) {
        term = term * B / k;
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

// Second multiplicative compound: 2x2 minors over lexicographic index pairs.
inline Eigen::MatrixXd multiplicative_compound2(const Eigen::MatrixXd& M) {
    const int n = static_cast<int>(M.rows());
    std::vector<std::pair<int, int>> idx;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) idx.emplace_back(i, j);
    const auto N = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd C(N, N);
    for (Eigen::Index r = 0; r < N; ++r)
        for (Eigen::Index c = 0; c < N; ++c) {
            const auto [a, b] = idx[static_cast<size_t>(r)];
            const auto [p, q] = idx[static_cast<size_t>(c)];
            C(r, c) = M(a, p) * M(b, q) - M(a, q) * M(b, p);
        }
    return C;
}

// A^[2] from the exact identity C2(I + A) = I + A^[2] + C2(A).
inline Eigen::MatrixXd additive_compound2(const Eigen::MatrixXd& A) {
    const auto n = A.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd C = multiplicative_compound2(I + A);
    return C - Eigen::MatrixXd::Identity(C.rows(), C.cols()) - multiplicative_compound2(A);
}

} // namespace oracle
