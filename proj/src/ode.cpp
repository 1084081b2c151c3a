#include "cyclofeed/ode.hpp"

#include "cyclofeed/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

namespace cyclofeed {

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(int n, std::string model_hash, std::string method, double step)
    : n_(n), model_hash_(std::move(model_hash)), method_(std::move(method)), step_(step) {}

std::span<const double> Trajectory::state(size_t k) const {
    return {states_.data() + k * static_cast<size_t>(n_), static_cast<size_t>(n_)};
}

std::span<const double> Trajectory::derivative(size_t k) const {
    return {derivs_.data() + k * static_cast<size_t>(n_), static_cast<size_t>(n_)};
}

void Trajectory::append(double t, std::span<const double> x, std::span<const double> dx) {
    if (static_cast<int>(x.size()) != n_ || static_cast<int>(dx.size()) != n_)
        throw DimensionError("trajectory sample has the wrong dimension");
    if (!times_.empty()) {
        const double dir = times_.size() > 1 ? times_[1] - times_[0] : t - times_.back();
        if (!((t - times_.back()) * dir > 0.0)) throw DomainError("trajectory times must be strictly monotone");
    }
    times_.push_back(t);
    states_.insert(states_.end(), x.begin(), x.end());
    derivs_.insert(derivs_.end(), dx.begin(), dx.end());
}

size_t Trajectory::locate(double t) const {
    // Returns k such that t lies in [times_[k], times_[k+1]] (direction aware).
    if (times_.size() < 2) throw DomainError("dense output needs at least two samples");
    const bool forward = times_.back() > times_.front();
    const double lo = forward ? times_.front() : times_.back();
    const double hi = forward ? times_.back() : times_.front();
    const double slack = 1e-12 * std::max(1.0, std::abs(hi - lo));
    if (t < lo - slack || t > hi + slack) throw DomainError("time outside the trajectory span");
    size_t k;
    if (forward)
        k = static_cast<size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
    else
        k = static_cast<size_t>(std::upper_bound(times_.begin(), times_.end(), t, std::greater<>()) - times_.begin());
    k = std::clamp<size_t>(k, 1, times_.size() - 1);
    return k - 1;
}

double Trajectory::component_at(int i, double t) const {
    const size_t k = locate(t);
    const size_t n = static_cast<size_t>(n_);
    const size_t c = static_cast<size_t>(i);
    const double t0 = times_[k];
    const double t1 = times_[k + 1];
    if (t == t0) return states_[k * n + c];
    if (t == t1) return states_[(k + 1) * n + c];
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * states_[k * n + c] + h10 * h * derivs_[k * n + c] + h01 * states_[(k + 1) * n + c] +
           h11 * h * derivs_[(k + 1) * n + c];
}

Eigen::VectorXd Trajectory::at(double t) const {
    Eigen::VectorXd out(n_);
    for (int i = 0; i < n_; ++i) out(i) = component_at(i, t);
    return out;
}

void Trajectory::write_csv(std::ostream& os) const {
    os << 't';
    for (int i = 1; i <= n_; ++i) os << ",x" << i;
    os << '\n';
    char buf[40];
    for (size_t k = 0; k < times_.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", times_[k]);
        os << buf;
        for (double v : state(k)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << ',' << buf;
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Integration

namespace {

void check_state(std::span<const double> x, double t) {
    for (double v : x) {
        if (!std::isfinite(v)) throw BlowUpError("non-finite state at t = " + std::to_string(t), t);
        if (std::abs(v) > kBlowUpBound)
            throw BlowUpError("state norm exceeded blow-up bound at t = " + std::to_string(t), t);
    }
}

Trajectory integrate_rk4(const RhsFunction& f, int n, std::span<const double> x0, double t0, double t1,
                         double h, const std::string& tag) {
    if (!(h > 0.0)) throw DomainError("fixed step must be positive");
    const double span = t1 - t0;
    const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / h - 1e-9)));
    const double hh = span / static_cast<double>(steps);

    Trajectory traj(n, tag, "rk4", std::abs(hh));
    const size_t N = static_cast<size_t>(n);
    std::vector<double> x(x0.begin(), x0.end()), tmp(N), k1(N), k2(N), k3(N), k4(N);
    check_state(x, t0);
    f(t0, x, k1);
    traj.append(t0, x, k1);
    for (long s = 0; s < steps; ++s) {
        const double t = t0 + static_cast<double>(s) * hh;
        for (size_t i = 0; i < N; ++i) tmp[i] = x[i] + 0.5 * hh * k1[i];
        f(t + 0.5 * hh, tmp, k2);
        for (size_t i = 0; i < N; ++i) tmp[i] = x[i] + 0.5 * hh * k2[i];
        f(t + 0.5 * hh, tmp, k3);
        for (size_t i = 0; i < N; ++i) tmp[i] = x[i] + hh * k3[i];
        f(t + hh, tmp, k4);
        for (size_t i = 0; i < N; ++i) x[i] += hh / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        const double tn = s + 1 == steps ? t1 : t0 + static_cast<double>(s + 1) * hh;
        check_state(x, tn);
        f(tn, x, k1);
        traj.append(tn, x, k1);
    }
    return traj;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

Trajectory integrate_dopri(const RhsFunction& f, int n, std::span<const double> x0, double t0, double t1,
                           const Adaptive& ctl, const std::string& tag) {
    if (!(ctl.rtol > 0.0) || !(ctl.atol > 0.0)) throw DomainError("tolerances must be positive");
    const size_t N = static_cast<size_t>(n);
    const double dir = t1 > t0 ? 1.0 : -1.0;
    Trajectory traj(n, tag, "dopri5", ctl.rtol);

    std::vector<double> x(x0.begin(), x0.end()), xn(N), tmp(N);
    std::vector<double> k1(N), k2(N), k3(N), k4(N), k5(N), k6(N), k7(N);
    check_state(x, t0);
    f(t0, x, k1);
    traj.append(t0, x, k1);

    auto scale = [&](double a, double b) { return ctl.atol + ctl.rtol * std::max(std::abs(a), std::abs(b)); };

    double h = ctl.h0;
    if (h <= 0.0) {
        // Initial step heuristic from Hairer, Norsett & Wanner.
        double d0 = 0, d1 = 0;
        for (size_t i = 0; i < N; ++i) {
            const double sc = scale(x[i], x[i]);
            d0 = std::max(d0, std::abs(x[i]) / sc);
            d1 = std::max(d1, std::abs(k1[i]) / sc);
        }
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, std::abs(t1 - t0));
        for (size_t i = 0; i < N; ++i) tmp[i] = x[i] + dir * h0 * k1[i];
        f(t0 + dir * h0, tmp, k2);
        double d2 = 0;
        for (size_t i = 0; i < N; ++i) d2 = std::max(d2, std::abs(k2[i] - k1[i]) / scale(x[i], x[i]) / h0);
        const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                    : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        h = std::min(100 * h0, h1);
    }
    h = std::min(h, std::abs(t1 - t0));

    double t = t0;
    double err_prev = 1e-4;
    long steps = 0;
    bool last_rejected = false;
    while ((t1 - t) * dir > 0.0) {
        if (++steps > ctl.max_steps) throw StepUnderflowError("adaptive integration exceeded max_steps", t);
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
            throw StepUnderflowError("adaptive step size underflow at t = " + std::to_string(t), t);
        bool last = false;
        if ((t + dir * h - t1) * dir >= 0.0) {
            h = std::abs(t1 - t);
            last = true;
        }
        const double hs = dir * h;
        for (size_t i = 0; i < N; ++i) tmp[i] = x[i] + hs * a21 * k1[i];
        f(t + c2 * hs, tmp, k2);
        for (size_t i = 0; i < N; ++i) tmp[i] = x[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * hs, tmp, k3);
        for (size_t i = 0; i < N; ++i) tmp[i] = x[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * hs, tmp, k4);
        for (size_t i = 0; i < N; ++i) tmp[i] = x[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * hs, tmp, k5);
        for (size_t i = 0; i < N; ++i)
            tmp[i] = x[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + hs, tmp, k6);
        for (size_t i = 0; i < N; ++i)
            xn[i] = x[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        const double tn = last ? t1 : t + hs;
        bool finite = true;
        for (double v : xn) finite = finite && std::isfinite(v);
        if (finite) f(tn, xn, k7);

        double err = 0.0;
        if (finite) {
            for (size_t i = 0; i < N; ++i) {
                const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                err = std::max(err, std::abs(e) / scale(x[i], xn[i]));
            }
        } else {
            err = std::numeric_limits<double>::infinity();
        }

        if (err <= 1.0) {
            // PI controller (beta = 0.04).
            double fac = std::isfinite(err) && err > 0 ? 0.9 * std::pow(err, -0.17) * std::pow(err_prev, 0.04) : 10.0;
            fac = std::clamp(fac, 0.2, 10.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            err_prev = std::max(err, 1e-4);
            t = tn;
            x.swap(xn);
            k1.swap(k7);
            check_state(x, t);
            traj.append(t, x, k1);
            h *= fac;
            last_rejected = false;
        } else {
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= fac;
            last_rejected = true;
        }
    }
    return traj;
}

} // namespace

Trajectory integrate(const RhsFunction& f, int n, std::span<const double> x0, double t0, double t1,
                     const StepControl& control, const std::string& tag) {
    if (static_cast<int>(x0.size()) != n) throw DimensionError("initial state has the wrong dimension");
    if (t1 == t0) throw DomainError("integration span is empty");
    if (!std::isfinite(t0) || !std::isfinite(t1)) throw DomainError("integration bounds must be finite");
    if (const auto* fixed = std::get_if<FixedStep>(&control)) return integrate_rk4(f, n, x0, t0, t1, fixed->h, tag);
    return integrate_dopri(f, n, x0, t0, t1, std::get<Adaptive>(control), tag);
}

Trajectory integrate(const ModelSpec& m, std::span<const double> x0, double t0, double t1,
                     const StepControl& control) {
    RhsFunction f = [&m](double t, std::span<const double> x, std::span<double> dx) { m.eval_rhs(t, x, dx); };
    return integrate(f, m.n(), x0, t0, t1, control, m.hash());
}

// ---------------------------------------------------------------------------
// Difference matrix

std::pair<std::vector<double>, std::vector<double>> gauss_legendre_unit(int nodes) {
    if (nodes < 1) throw DomainError("quadrature needs at least one node");
    const size_t m = static_cast<size_t>(nodes);
    std::vector<double> r(m), w(m);
    for (int i = 0; i < nodes; ++i) {
        // Newton iteration for the i-th root of P_n on [-1, 1].
        double z = std::cos(std::numbers::pi * (i + 0.75) / (nodes + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= nodes; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = nodes == 1 ? z : p1;
            const double pm = nodes == 1 ? 1.0 : p0;
            dp = nodes * (z * pn - pm) / (z * z - 1.0);
            const double dz = pn / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        if (nodes == 1) {
            z = 0.0;
            dp = 1.0;
        }
        r[static_cast<size_t>(i)] = 0.5 * (1.0 - z);
        w[static_cast<size_t>(i)] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    return {r, w};
}

Eigen::MatrixXd difference_matrix(const ModelSpec& m, std::span<const double> x, std::span<const double> y,
                                  double t, int quad_nodes) {
    const int n = m.n();
    if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
        throw DimensionError("difference_matrix: state dimension mismatch");
    for (size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("difference_matrix: non-finite state");
    const auto [r, w] = gauss_legendre_unit(quad_nodes);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> p(static_cast<size_t>(n));
    for (size_t q = 0; q < r.size(); ++q) {
        for (size_t i = 0; i < p.size(); ++i) p[i] = r[q] * x[i] + (1.0 - r[q]) * y[i];
        m.accumulate_jacobian(t, p, w[q], acc);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Zero crossings

std::vector<double> locate_zero_crossings(const Trajectory& traj, int component, double refine_tol) {
    if (component < 0 || component >= traj.dimension()) throw DimensionError("component out of range");
    if (!(refine_tol > 0.0)) throw DomainError("refine_tol must be positive");
    std::vector<double> out;
    const size_t c = static_cast<size_t>(component);
    long last = -1;  // index of the last sample with a nonzero value
    for (size_t k = 0; k < traj.size(); ++k) {
        const double v = traj.state(k)[c];
        if (v == 0.0) continue;
        if (last >= 0) {
            const double u = traj.state(static_cast<size_t>(last))[c];
            if ((u < 0.0) != (v < 0.0)) {
                double lo = traj.time(static_cast<size_t>(last));
                double hi = traj.time(k);
                double flo = u;
                while (std::abs(hi - lo) > refine_tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid == lo || mid == hi) break;
                    const double fm = traj.component_at(component, mid);
                    if (fm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                out.push_back(0.5 * (lo + hi));
            }
        }
        last = static_cast<long>(k);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace cyclofeed
