#include "cyclofeed/sign.hpp"

#include "cyclofeed/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cyclofeed {

namespace {

void require_same_size(size_t n, const DeltaVector& d) {
    if (static_cast<int>(n) != d.size())
        throw DimensionError("vector has " + std::to_string(n) + " components but delta has " +
                             std::to_string(d.size()));
    if (n < 3) throw DimensionError("cyclic feedback systems need n >= 3");
}

// Enumerating more than this many zero components is refused.
constexpr int kMaxZeroComponents = 24;

} // namespace

DeltaVector::DeltaVector(std::vector<int> signs) : signs_(std::move(signs)) {
    if (signs_.size() < 3) throw DimensionError("delta vector needs n >= 3");
    for (int s : signs_)
        if (s != 1 && s != -1) throw DomainError("delta entries must be -1 or +1");
}

DeltaVector DeltaVector::canonical(int n) {
    if (n < 3) throw DimensionError("delta vector needs n >= 3");
    std::vector<int> s(static_cast<size_t>(n), 1);
    s[0] = -1;
    return DeltaVector(std::move(s));
}

int DeltaVector::product() const noexcept {
    int p = 1;
    for (int s : signs_) p *= s;
    return p;
}

bool DeltaVector::is_canonical() const noexcept {
    if (signs_.empty() || signs_[0] != -1) return false;
    return std::all_of(signs_.begin() + 1, signs_.end(), [](int s) { return s == 1; });
}

std::vector<int> DeltaVector::mu() const {
    std::vector<int> m(signs_.size());
    int acc = 1;
    for (size_t i = 0; i < signs_.size(); ++i) {
        acc *= signs_[i];
        m[i] = acc;
    }
    return m;
}

int ntilde(int n) {
    if (n < 3) throw DimensionError("ntilde requires n >= 3, got " + std::to_string(n));
    return n % 2 == 1 ? n : n - 1;
}

std::vector<int> sign_pattern(std::span<const double> x, const SignOptions& opts) {
    double norm = 0.0;
    for (double v : x) norm = std::max(norm, std::abs(v));
    const double thresh = opts.zero_tol * std::max(1.0, norm);
    std::vector<int> s(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) <= thresh)
            s[i] = 0;
        else
            s[i] = x[i] > 0 ? 1 : -1;
    }
    return s;
}

int sigma_of_signs(std::span<const int> s, const DeltaVector& d) {
    require_same_size(s.size(), d);
    const size_t n = s.size();
    int count = 0;
    for (size_t i = 0; i < n; ++i) {
        const int prev = s[(i + n - 1) % n];
        if (d[static_cast<int>(i)] * s[i] * prev <= 0) ++count;
    }
    return count;
}

int sigma(std::span<const double> x, const DeltaVector& d, const SignOptions& opts) {
    require_same_size(x.size(), d);
    const auto s = sign_pattern(x, opts);
    for (size_t i = 0; i < s.size(); ++i)
        if (s[i] == 0)
            throw DomainError("sigma is undefined: component x" + std::to_string(i + 1) +
                              " is zero; use sigma_extended or sigma_min_max");
    return sigma_of_signs(s, d);
}

bool in_lambda(std::span<const double> x, const DeltaVector& d, const SignOptions& opts) {
    require_same_size(x.size(), d);
    const auto s = sign_pattern(x, opts);
    const size_t n = s.size();
    for (size_t i = 0; i < n; ++i) {
        if (s[i] != 0) continue;
        const size_t next = (i + 1) % n;
        const size_t prev = (i + n - 1) % n;
        if (d[static_cast<int>(i)] * d[static_cast<int>(next)] * s[next] * s[prev] >= 0) return false;
    }
    return true;
}

std::pair<int, int> sigma_min_max(std::span<const double> x, const DeltaVector& d,
                                  const SignOptions& opts, bool allow_zero_vector) {
    require_same_size(x.size(), d);
    auto s = sign_pattern(x, opts);
    std::vector<size_t> zeros;
    for (size_t i = 0; i < s.size(); ++i)
        if (s[i] == 0) zeros.push_back(i);

    if (zeros.size() == s.size()) {
        if (!allow_zero_vector)
            throw DomainError("sigma_m/sigma_M are degenerate at the zero vector");
        return {1, ntilde(static_cast<int>(s.size()))};
    }
    if (zeros.size() > static_cast<size_t>(kMaxZeroComponents))
        throw DomainError("too many zero components to enumerate sign resolutions");

    int lo = static_cast<int>(s.size()) + 1;
    int hi = -1;
    const unsigned long long branches = 1ULL << zeros.size();
    for (unsigned long long mask = 0; mask < branches; ++mask) {
        for (size_t k = 0; k < zeros.size(); ++k) s[zeros[k]] = (mask >> k) & 1ULL ? 1 : -1;
        const int v = sigma_of_signs(s, d);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

int sigma_extended(std::span<const double> x, const DeltaVector& d, const SignOptions& opts) {
    if (!in_lambda(x, d, opts)) throw DomainError("sigma_extended: vector is not in Lambda");
    return sigma_min_max(x, d, opts).first;
}

} // namespace cyclofeed
