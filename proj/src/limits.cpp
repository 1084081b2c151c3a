#include "cyclofeed/limits.hpp"

#include "cyclofeed/error.hpp"
#include "cyclofeed/structure.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <thread>

namespace cyclofeed {

using nlohmann::ordered_json;

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double step_value(const StepControl& c) {
    if (const auto* f = std::get_if<FixedStep>(&c)) return f->h;
    return std::get<Adaptive>(c).rtol;
}

ordered_json control_json(const StepControl& c) {
    if (const auto* f = std::get_if<FixedStep>(&c)) return {{"method", "rk4"}, {"step", f->h}};
    const auto& a = std::get<Adaptive>(c);
    return {{"method", "dopri5"}, {"rtol", a.rtol}, {"atol", a.atol}};
}

} // namespace

StateVector poincare_map(const ModelSpec& m, std::span<const double> x, const StepControl& control) {
    const Trajectory tr = integrate(m, x, 0.0, m.period(), control);
    const auto xf = tr.final_state();
    return {xf.begin(), xf.end()};
}

// ---------------------------------------------------------------------------
// Omega-limit approximation

std::vector<size_t> greedy_net(const std::vector<StateVector>& pts, double eps) {
    std::vector<size_t> kept;
    for (size_t k = 0; k < pts.size(); ++k) {
        const bool far = std::all_of(kept.begin(), kept.end(),
                                     [&](size_t j) { return distance(pts[k], pts[j]) >= eps; });
        if (far) kept.push_back(k);
    }
    return kept;
}

double hausdorff_distance(const std::vector<StateVector>& a, const std::vector<StateVector>& b) {
    if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    auto directed = [](const std::vector<StateVector>& p, const std::vector<StateVector>& q) {
        double worst = 0.0;
        for (const auto& u : p) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& v : q) best = std::min(best, distance(u, v));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

OmegaSetApprox omega_limit_approx(const ModelSpec& m, std::span<const double> x0, const OmegaOptions& opts) {
    if (static_cast<int>(x0.size()) != m.n()) throw DimensionError("initial state has the wrong dimension");
    if (opts.burn_in < 0 || opts.window < 1) throw DomainError("burn-in must be >= 0 and window >= 1");
    if (!(opts.eps > 0)) throw DomainError("cluster radius must be positive");
    if (static_cast<long>(opts.burn_in) + opts.window > opts.max_iterations)
        throw DomainError("burn-in plus window exceeds the iteration budget of " +
                          std::to_string(opts.max_iterations));

    StateVector x(x0.begin(), x0.end());
    for (int k = 0; k < opts.burn_in; ++k) x = poincare_map(m, x, opts.control);
    std::vector<StateVector> window;
    window.reserve(static_cast<size_t>(opts.window));
    for (int k = 0; k < opts.window; ++k) {
        x = poincare_map(m, x, opts.control);
        window.push_back(x);
    }

    OmegaSetApprox out;
    out.base_point.assign(x0.begin(), x0.end());
    out.burn_in = opts.burn_in;
    out.collected = opts.window;
    out.cluster_radius = opts.eps;
    for (size_t k : greedy_net(window, opts.eps)) {
        out.points.push_back(window[k]);
        out.iterates.push_back(opts.burn_in + 1 + static_cast<long>(k));
    }

    const size_t half = window.size() / 2;
    std::vector<StateVector> tail(window.end() - static_cast<long>(std::max<size_t>(half, 1)), window.end());
    std::vector<StateVector> tail_net;
    for (size_t k : greedy_net(tail, opts.eps)) tail_net.push_back(tail[k]);
    out.net_change = hausdorff_distance(tail_net, out.points);
    out.converged = out.net_change <= opts.eps;
    return out;
}

// ---------------------------------------------------------------------------
// Sigma traces

long SigmaTrace::valid_samples() const {
    return std::count_if(sigma.begin(), sigma.end(), [](int s) { return s != kOffLambda; });
}

void SigmaTrace::write_csv(std::ostream& os) const {
    os << "t,sigma\n";
    char buf[64];
    for (size_t k = 0; k < times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", times[k]);
        os << buf << ',';
        if (sigma[k] != kOffLambda) os << sigma[k];
        os << '\n';
    }
}

namespace {

struct Classification {
    int sigma;
    double pair_margin;
};

Classification classify(std::span<const double> z, const DeltaVector& d, double tau) {
    const int n = static_cast<int>(z.size());
    double scale = 1.0;
    for (double v : z) scale = std::max(scale, std::abs(v));
    const double tiny = 10.0 * tau * scale;
    const double margin = tau * tau * scale;

    double pm = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) pm = std::min(pm, std::hypot(z[static_cast<size_t>(i)], z[static_cast<size_t>((i + 1) % n)]));

    std::vector<int> s(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double v = z[static_cast<size_t>(i)];
        s[static_cast<size_t>(i)] = std::abs(v) <= tiny ? 0 : (v > 0 ? 1 : -1);
    }
    for (int i = 0; i < n; ++i) {
        if (s[static_cast<size_t>(i)] != 0) continue;
        const int prev = (i + n - 1) % n, next = (i + 1) % n;
        if (s[static_cast<size_t>(prev)] == 0 || s[static_cast<size_t>(next)] == 0) return {SigmaTrace::kOffLambda, pm};
        const double val = d[i] * d[next] * z[static_cast<size_t>(next)] * z[static_cast<size_t>(prev)];
        if (!(val < -margin)) return {SigmaTrace::kOffLambda, pm};
    }
    for (auto& v : s)
        if (v == 0) v = 1;
    return {sigma_of_signs(s, d), pm};
}

std::string describe_pattern_failure(const LinearPatternReport& rep, double t) {
    const auto& v = rep.violations.front();
    char buf[160];
    if (v.i == 0)
        std::snprintf(buf, sizeof buf, "difference matrix at t = %.6g: %s (sum %.3g)", t, v.rule.c_str(), v.value);
    else
        std::snprintf(buf, sizeof buf, "difference matrix at t = %.6g: entry (%d,%d) = %.3g, %s", t, v.i, v.j, v.value,
                      v.rule.c_str());
    return buf;
}

} // namespace

SigmaTrace sigma_trace_pair(const ModelSpec& m, std::span<const double> x, std::span<const double> y,
                            const TraceOptions& opts) {
    const int n = m.n();
    if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
        throw DimensionError("initial states have the wrong dimension");
    if (std::equal(x.begin(), x.end(), y.begin())) throw DomainError("sigma trace needs two distinct initial states");
    if (opts.t1 == opts.t0) throw DomainError("trace span is empty");

    SigmaTrace tr;
    tr.delta = opts.delta ? *opts.delta : DeltaVector::canonical(n);
    if (tr.delta.size() != n) throw DimensionError("delta has the wrong dimension");

    const Trajectory a = integrate(m, x, opts.t0, opts.t1, opts.control);
    const Trajectory b = integrate(m, y, opts.t0, opts.t1, opts.control);

    Trajectory zt(n, m.hash(), "difference", step_value(opts.control));
    std::vector<StateVector> xs, ys;
    std::vector<double> z(static_cast<size_t>(n)), dz(static_cast<size_t>(n));
    auto push = [&](double t, std::span<const double> xa, std::span<const double> dxa, std::span<const double> yb,
                    std::span<const double> dyb) {
        for (int i = 0; i < n; ++i) {
            z[static_cast<size_t>(i)] = xa[static_cast<size_t>(i)] - yb[static_cast<size_t>(i)];
            dz[static_cast<size_t>(i)] = dxa[static_cast<size_t>(i)] - dyb[static_cast<size_t>(i)];
        }
        zt.append(t, z, dz);
        xs.emplace_back(xa.begin(), xa.end());
        ys.emplace_back(yb.begin(), yb.end());
    };

    if (std::holds_alternative<FixedStep>(opts.control) && a.size() == b.size()) {
        for (size_t k = 0; k < a.size(); ++k) push(a.time(k), a.state(k), a.derivative(k), b.state(k), b.derivative(k));
    } else {
        const int N = std::max(opts.samples, 2);
        for (int k = 0; k <= N; ++k) {
            const double t = k == N ? opts.t1 : opts.t0 + (opts.t1 - opts.t0) * k / N;
            const Eigen::VectorXd xa = a.at(t), yb = b.at(t);
            const std::span<const double> xs_(xa.data(), static_cast<size_t>(n)), ys_(yb.data(), static_cast<size_t>(n));
            const Eigen::VectorXd fa = m.eval_rhs(t, xs_), fb = m.eval_rhs(t, ys_);
            push(t, xs_, {fa.data(), static_cast<size_t>(n)}, ys_, {fb.data(), static_cast<size_t>(n)});
        }
    }

    const size_t K = zt.size();
    tr.times = zt.times();
    tr.sigma.resize(K);
    tr.pair_margin.resize(K);
    for (size_t k = 0; k < K; ++k) {
        const auto c = classify(zt.state(k), tr.delta, opts.zero_tol);
        tr.sigma[k] = c.sigma;
        tr.pair_margin[k] = c.pair_margin;
    }

    // Hypothesis gate: canonical negative feedback and the linear 2-positive
    // pattern of the difference matrix along the pair.
    if (!tr.delta.is_canonical()) {
        tr.gate_violations = 1;
        tr.gate_message = "delta is not canonical; sigma monotonicity requires canonical negative feedback";
    }
    const int every = std::max(opts.gate_every, 1);
    for (size_t k = 0; k < K; k += static_cast<size_t>(every)) {
        ++tr.gate_checks;
        const auto rep = check_linear_two_positive(difference_matrix(m, xs[k], ys[k], tr.times[k]));
        if (!rep.ok) {
            if (tr.gate_message.empty()) tr.gate_message = describe_pattern_failure(rep, tr.times[k]);
            ++tr.gate_violations;
        }
    }

    std::vector<std::vector<double>> crossings(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) crossings[static_cast<size_t>(i)] = locate_zero_crossings(zt, i, opts.refine_tol);
    auto find_crossing = [&](double ta, double tb) -> std::optional<double> {
        const double lo = std::min(ta, tb) - opts.bracket_tol, hi = std::max(ta, tb) + opts.bracket_tol;
        for (const auto& list : crossings) {
            auto it = std::lower_bound(list.begin(), list.end(), lo);
            if (it != list.end() && *it <= hi) return *it;
        }
        return std::nullopt;
    };

    long last = -1;
    for (size_t k = 0; k < K; ++k) {
        if (tr.sigma[k] == SigmaTrace::kOffLambda) continue;
        if (last >= 0 && tr.sigma[k] != tr.sigma[static_cast<size_t>(last)]) {
            DropEvent e{tr.times[static_cast<size_t>(last)], tr.times[k], tr.sigma[static_cast<size_t>(last)],
                        tr.sigma[k], find_crossing(tr.times[static_cast<size_t>(last)], tr.times[k])};
            (e.sigma_after < e.sigma_before ? tr.drops : tr.increases).push_back(e);
        }
        last = static_cast<long>(k);
    }

    const double span = std::abs(opts.t1 - opts.t0);
    std::optional<int> value;
    bool constant = true;
    for (size_t k = 0; k < K; ++k) {
        if (tr.sigma[k] == SigmaTrace::kOffLambda) continue;
        if (std::abs(tr.times[k] - opts.t0) < (1.0 - opts.trailing_fraction) * span) continue;
        if (!value)
            value = tr.sigma[k];
        else if (*value != tr.sigma[k])
            constant = false;
    }
    if (value && constant) tr.eventual_constant = value;

    double onset = opts.t0;
    bool found = false;
    for (const auto* events : {&tr.drops, &tr.increases})
        for (const auto& e : *events)
            if (!found || std::abs(e.t_after - opts.t0) > std::abs(onset - opts.t0)) {
                onset = e.t_after;
                found = true;
            }
    if (!found)
        for (size_t k = 0; k < K; ++k)
            if (tr.sigma[k] != SigmaTrace::kOffLambda) {
                onset = tr.times[k];
                break;
            }
    tr.onset_time = onset;
    return tr;
}

// ---------------------------------------------------------------------------
// Reports

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

int exit_code(Verdict v) {
    switch (v) {
    case Verdict::Pass: return 0;
    case Verdict::Fail: return 2;
    case Verdict::Inconclusive: return 3;
    }
    return 3;
}

ordered_json VerificationReport::to_json() const {
    ordered_json j;
    j["verdict"] = to_string(verdict);
    j["statistics"] = statistics;
    j["config"] = config;
    j["messages"] = messages;
    j["artifacts"] = artifacts;
    return j;
}

std::string VerificationReport::dump() const { return to_json().dump(2) + "\n"; }

VerificationReport verify_sigma_monotone(const SigmaTrace& trace, int min_valid) {
    VerificationReport rep;
    const long valid = trace.valid_samples();
    const int n = trace.delta.size();
    long even = 0;
    int lo = std::numeric_limits<int>::max(), hi = 0;
    for (int s : trace.sigma) {
        if (s == SigmaTrace::kOffLambda) continue;
        if (s % 2 == 0) ++even;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    const long unexplained =
        std::count_if(trace.drops.begin(), trace.drops.end(), [](const DropEvent& e) { return !e.crossing; });
    double min_margin = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < trace.sigma.size(); ++k)
        if (trace.sigma[k] != SigmaTrace::kOffLambda) min_margin = std::min(min_margin, trace.pair_margin[k]);

    auto& st = rep.statistics;
    st["samples"] = trace.sigma.size();
    st["valid_samples"] = valid;
    st["off_lambda_samples"] = static_cast<long>(trace.sigma.size()) - valid;
    st["drops"] = trace.drops.size();
    st["unexplained_drops"] = unexplained;
    st["increases"] = trace.increases.size();
    st["even_values"] = even;
    if (valid > 0) {
        st["sigma_first"] = trace.sigma[static_cast<size_t>(std::distance(
            trace.sigma.begin(),
            std::find_if(trace.sigma.begin(), trace.sigma.end(), [](int s) { return s != SigmaTrace::kOffLambda; })))];
        st["sigma_min"] = lo;
        st["sigma_max"] = hi;
        st["min_pair_margin"] = min_margin;
    }
    st["eventual_constant"] = trace.eventual_constant ? ordered_json(*trace.eventual_constant) : ordered_json(nullptr);
    st["onset_time"] = trace.onset_time;
    st["gate_checks"] = trace.gate_checks;
    st["gate_violations"] = trace.gate_violations;
    const long max_drops = n >= 3 ? (ntilde(n) - 1) / 2 : 0;
    st["max_possible_drops"] = max_drops;

    if (!trace.hypothesis_ok()) {
        rep.verdict = Verdict::Inconclusive;
        rep.messages.push_back("hypothesis gate: " + trace.gate_message);
        return rep;
    }
    if (valid < min_valid) {
        rep.verdict = Verdict::Inconclusive;
        rep.messages.push_back("only " + std::to_string(valid) + " in-Lambda samples (need " +
                               std::to_string(min_valid) + ")");
        return rep;
    }
    bool failed = false;
    if (!trace.increases.empty()) {
        char buf[128];
        const auto& e = trace.increases.front();
        std::snprintf(buf, sizeof buf, "sigma increased from %d to %d between t = %.9g and t = %.9g", e.sigma_before,
                      e.sigma_after, e.t_before, e.t_after);
        rep.messages.push_back(buf);
        failed = true;
    }
    if (even > 0) {
        rep.messages.push_back(std::to_string(even) + " samples with an even sigma value");
        failed = true;
    }
    if (static_cast<long>(trace.drops.size()) > max_drops) {
        rep.messages.push_back("more drops than sigma values allow");
        failed = true;
    }
    if (!trace.eventual_constant) {
        rep.messages.push_back("sigma is not constant on the trailing window");
        failed = true;
    }
    if (failed) {
        rep.verdict = Verdict::Fail;
    } else if (unexplained > 0) {
        rep.verdict = Verdict::Inconclusive;
        rep.messages.push_back(std::to_string(unexplained) +
                               " drops without a bracketing zero crossing (likely integration error)");
    } else {
        rep.verdict = Verdict::Pass;
    }
    return rep;
}

std::vector<std::pair<size_t, size_t>> select_pairs(size_t count, int budget) {
    std::vector<std::pair<size_t, size_t>> all;
    for (size_t i = 0; i < count; ++i)
        for (size_t j = i + 1; j < count; ++j) all.emplace_back(i, j);
    if (budget <= 0 || all.size() <= static_cast<size_t>(budget)) return all;
    std::vector<std::pair<size_t, size_t>> out;
    const auto b = static_cast<size_t>(budget);
    for (size_t k = 0; k < b; ++k) out.push_back(all[k * all.size() / b]);
    return out;
}

VerificationReport verify_sigma_constancy_on_omega(const ModelSpec& m, const OmegaSetApprox& omega,
                                                   const PairOptions& opts, std::vector<SigmaTrace>* traces) {
    VerificationReport rep;
    rep.config["pair_budget"] = opts.pair_budget;
    rep.config["periods"] = opts.periods;
    rep.config["control"] = control_json(opts.control);
    rep.statistics["points"] = omega.points.size();

    if (omega.points.empty()) {
        rep.verdict = Verdict::Inconclusive;
        rep.messages.push_back("omega approximation has no points");
        return rep;
    }
    if (omega.points.size() == 1) {
        rep.verdict = Verdict::Pass;
        rep.statistics["pairs_checked"] = 0;
        rep.messages.push_back("single-point omega set: the statement holds vacuously");
        return rep;
    }

    const auto pairs = select_pairs(omega.points.size(), opts.pair_budget);
    for (const auto& [i, j] : pairs) {
        const auto pat = check_linear_two_positive(difference_matrix(m, omega.points[i], omega.points[j], 0.0));
        if (!pat.ok) {
            rep.verdict = Verdict::Inconclusive;
            rep.messages.push_back("hypothesis gate: refusing, " + describe_pattern_failure(pat, 0.0) + " for pair (" +
                                   std::to_string(i) + "," + std::to_string(j) + ")");
            return rep;
        }
    }

    TraceOptions topt;
    topt.t0 = 0.0;
    topt.t1 = opts.periods * m.period();
    topt.control = opts.control;
    topt.zero_tol = opts.zero_tol;

    std::vector<SigmaTrace> results(pairs.size());
    std::vector<std::string> errors(pairs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t k = next++; k < pairs.size(); k = next++) {
            try {
                results[k] = sigma_trace_pair(m, omega.points[pairs[k].first], omega.points[pairs[k].second], topt);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned count = std::min<unsigned>(opts.threads > 0 ? static_cast<unsigned>(opts.threads) : hw,
                                              static_cast<unsigned>(pairs.size()));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < count; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    long constant_pairs = 0, drops = 0, increases = 0, late_off = 0, early_off = 0, gate = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    std::map<int, long> histogram;
    bool errored = false;
    for (size_t k = 0; k < pairs.size(); ++k) {
        const std::string tag = "pair (" + std::to_string(pairs[k].first) + "," + std::to_string(pairs[k].second) + ")";
        if (!errors[k].empty()) {
            rep.messages.push_back(tag + ": " + errors[k]);
            errored = true;
            continue;
        }
        const auto& tr = results[k];
        long off_after = 0, off_before = 0;
        std::optional<int> value;
        bool constant = true;
        for (size_t s = 0; s < tr.times.size(); ++s) {
            if (tr.sigma[s] == SigmaTrace::kOffLambda) {
                (tr.times[s] > m.period() ? off_after : off_before)++;
                continue;
            }
            min_margin = std::min(min_margin, tr.pair_margin[s]);
            if (!value)
                value = tr.sigma[s];
            else if (*value != tr.sigma[s])
                constant = false;
        }
        drops += static_cast<long>(tr.drops.size());
        increases += static_cast<long>(tr.increases.size());
        late_off += off_after;
        early_off += off_before;
        gate += tr.gate_violations;
        const bool ok = value && constant && off_after == 0 && tr.drops.empty() && tr.increases.empty();
        if (ok) {
            ++constant_pairs;
            ++histogram[*value];
        } else if (rep.messages.size() < 20) {
            rep.messages.push_back(tag + ": " + std::to_string(tr.drops.size()) + " drops, " +
                                   std::to_string(tr.increases.size()) + " increases, " + std::to_string(off_after) +
                                   " off-Lambda samples after the first period");
        }
    }
    if (traces) *traces = std::move(results);

    auto& st = rep.statistics;
    st["pairs_checked"] = pairs.size();
    st["pairs_constant"] = constant_pairs;
    st["drops"] = drops;
    st["increases"] = increases;
    st["off_lambda_first_period"] = early_off;
    st["off_lambda_after_first_period"] = late_off;
    st["gate_violations"] = gate;
    st["min_pair_margin"] = min_margin;
    ordered_json hist = ordered_json::object();
    for (const auto& [v, c] : histogram) hist[std::to_string(v)] = c;
    st["constants"] = hist;
    st["distinct_constants"] = histogram.size();

    if (errored)
        rep.verdict = Verdict::Inconclusive;
    else if (gate > 0) {
        rep.verdict = Verdict::Inconclusive;
        rep.messages.push_back("hypothesis gate: difference matrix left the 2-positive pattern along some pair");
    } else
        rep.verdict = constant_pairs == static_cast<long>(pairs.size()) ? Verdict::Pass : Verdict::Fail;
    return rep;
}

// ---------------------------------------------------------------------------
// Embedding

std::vector<std::array<double, 2>> embed_projection(const OmegaSetApprox& omega) {
    std::vector<std::array<double, 2>> out;
    out.reserve(omega.points.size());
    for (const auto& p : omega.points) {
        if (p.size() < 2) throw DimensionError("embedding needs at least two coordinates");
        out.push_back({p[0], p[1]});
    }
    return out;
}

VerificationReport verify_embedding_injectivity(const OmegaSetApprox& omega) {
    VerificationReport rep;
    const auto& pts = omega.points;
    rep.statistics["points"] = pts.size();
    rep.config["cluster_radius"] = omega.cluster_radius;
    if (pts.empty()) {
        rep.verdict = Verdict::Inconclusive;
        rep.messages.push_back("omega approximation has no points");
        return rep;
    }
    if (pts.size() == 1) {
        rep.verdict = Verdict::Pass;
        rep.messages.push_back("single-point omega set: injective vacuously");
        return rep;
    }
    const size_t n = pts.front().size();
    const auto h = embed_projection(omega);
    double m_sep = std::numeric_limits<double>::infinity(), full = m_sep;
    std::vector<double> pair_min(n, std::numeric_limits<double>::infinity());
    for (size_t a = 0; a < pts.size(); ++a) {
        for (size_t b = a + 1; b < pts.size(); ++b) {
            m_sep = std::min(m_sep, std::hypot(h[a][0] - h[b][0], h[a][1] - h[b][1]));
            full = std::min(full, distance(pts[a], pts[b]));
            for (size_t i = 0; i < n; ++i) {
                const size_t j = (i + 1) % n;
                pair_min[i] = std::min(pair_min[i], std::hypot(pts[a][i] - pts[b][i], pts[a][j] - pts[b][j]));
            }
        }
    }
    auto& st = rep.statistics;
    st["m_sep"] = m_sep;
    st["min_full_distance"] = full;
    st["ratio"] = m_sep / full;
    st["threshold"] = omega.cluster_radius / 10.0;
    ordered_json margins = ordered_json::object();
    bool pairs_ok = true;
    for (size_t i = 0; i < n; ++i) {
        margins["(" + std::to_string(i + 1) + "," + std::to_string((i + 1) % n + 1) + ")"] = pair_min[i];
        if (!(pair_min[i] > 0)) pairs_ok = false;
    }
    st["consecutive_pair_margins"] = margins;

    if (!(m_sep > omega.cluster_radius / 10.0)) {
        rep.messages.push_back("projection to (x1, x2) brings two net points within cluster_radius/10");
        rep.verdict = Verdict::Fail;
    } else if (!pairs_ok) {
        rep.messages.push_back("some consecutive coordinate pair coincides for two net points");
        rep.verdict = Verdict::Fail;
    } else {
        rep.verdict = Verdict::Pass;
    }
    return rep;
}

VerificationReport verify_conjugacy(const OmegaSetApprox& omega, const ModelSpec& m, const StepControl& control) {
    VerificationReport rep;
    const auto& pts = omega.points;
    rep.statistics["points"] = pts.size();
    rep.config["control"] = control_json(control);
    long matched = 0, violations = 0;
    double max_planar = 0.0, max_full = 0.0;
    for (const auto& x : pts) {
        const StateVector px = poincare_map(m, x, control);
        size_t best = 0;
        double dbest = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < pts.size(); ++k) {
            const double d = distance(px, pts[k]);
            if (d < dbest) {
                dbest = d;
                best = k;
            }
        }
        if (!(dbest <= omega.cluster_radius)) continue;
        ++matched;
        const double planar = std::hypot(px[0] - pts[best][0], px[1] - pts[best][1]);
        max_planar = std::max(max_planar, planar);
        max_full = std::max(max_full, dbest);
        if (planar > dbest * (1.0 + 1e-12) + 1e-300) ++violations;
    }
    auto& st = rep.statistics;
    st["matched"] = matched;
    st["unmatched"] = static_cast<long>(pts.size()) - matched;
    st["violations"] = violations;
    st["max_discrepancy"] = max_planar;
    st["max_full_distance"] = max_full;
    if (pts.size() <= 1 && matched == static_cast<long>(pts.size())) {
        rep.verdict = Verdict::Pass;
    } else if (violations > 0) {
        rep.verdict = Verdict::Fail;
    } else if (matched == 0) {
        rep.verdict = Verdict::Inconclusive;
        rep.messages.push_back("no image P(x) lands within cluster_radius of the net");
    } else {
        rep.verdict = max_planar <= omega.cluster_radius ? Verdict::Pass : Verdict::Fail;
    }
    return rep;
}

} // namespace cyclofeed
