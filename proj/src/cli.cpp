#include "cyclofeed/cli.hpp"

#include "cyclofeed/error.hpp"
#include "cyclofeed/limits.hpp"
#include "cyclofeed/models.hpp"
#include "cyclofeed/sign.hpp"
#include "cyclofeed/structure.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace cyclofeed {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct UsageError : Error {
    using Error::Error;
};

struct RunConfig {
    std::string command;
    std::string model;
    std::string x0, y0, x, delta, region, out;
    std::string C = "auto";
    double t0 = 0.0;
    std::optional<double> t1;
    std::optional<double> step;
    std::optional<double> rtol;
    double atol = 1e-10;
    int burn_in = 500;
    int window = 200;
    double eps = 1e-4;
    int pairs = 50;
    double periods = 5.0;
    std::uint64_t seed = 1;
};

std::vector<double> parse_vector(const std::string& text, const char* flag) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
        v.push_back(d);
    }
    if (v.empty()) throw UsageError(std::string(flag) + " is empty");
    return v;
}

std::vector<double> require_state(const std::string& text, const char* flag, int n) {
    if (text.empty()) throw UsageError(std::string(flag) + " is required");
    auto v = parse_vector(text, flag);
    if (static_cast<int>(v.size()) != n)
        throw UsageError(std::string(flag) + " has " + std::to_string(v.size()) + " entries but the model has n = " +
                         std::to_string(n));
    return v;
}

ModelSpec load_model(const std::string& name) {
    if (name.empty()) throw UsageError("--model is required");
    if (fs::is_regular_file(name)) {
        std::ifstream in(name);
        if (!in) throw UsageError("cannot read model file '" + name + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_model_file(buf.str());
    }
    if (is_builtin(name)) return builtin_model(name);
    std::string list;
    for (const auto& n : builtin_names()) list += "\n  " + n;
    throw UsageError("unknown model '" + name + "' (not a file and not built in); built-in models:" + list);
}

StepControl control_for(const RunConfig& c, double period, bool adaptive_default) {
    if (c.rtol) return Adaptive{*c.rtol, c.atol};
    if (c.step) return FixedStep{*c.step};
    if (adaptive_default) return Adaptive{1e-8, c.atol};
    return FixedStep{period / 2000.0};
}

ordered_json control_json(const StepControl& s) {
    if (const auto* f = std::get_if<FixedStep>(&s)) return {{"method", "rk4"}, {"step", f->h}};
    const auto& a = std::get<Adaptive>(s);
    return {{"method", "dopri5"}, {"rtol", a.rtol}, {"atol", a.atol}};
}

ordered_json base_config(const RunConfig& c, const ModelSpec* m) {
    ordered_json j;
    j["command"] = c.command;
    if (m) {
        j["model"] = c.model;
        j["model_name"] = m->name();
        j["model_hash"] = m->hash();
        j["n"] = m->n();
        j["period"] = m->period();
    }
    j["seed"] = c.seed;
    return j;
}

void validate(const RunConfig& c) {
    auto positive = [](std::optional<double> v, const char* flag) {
        if (v && !(*v > 0)) throw UsageError(std::string(flag) + " must be positive");
    };
    positive(c.step, "--step");
    positive(c.rtol, "--rtol");
    positive(c.atol, "--atol");
    positive(c.eps, "--eps");
    positive(c.periods, "--periods");
    if (c.burn_in < 0) throw UsageError("--burn-in must be >= 0");
    if (c.window < 1) throw UsageError("--window must be >= 1");
    if (c.pairs < 1) throw UsageError("--pairs must be >= 1");
}

class Output {
public:
    Output(const RunConfig& c, std::ostream& out) : dir_(c.out), out_(out) {
        if (!dir_.empty()) {
            std::error_code ec;
            fs::create_directories(dir_, ec);
            if (ec || !fs::is_directory(dir_)) throw UsageError("cannot create output directory '" + dir_ + "'");
        }
    }

    bool enabled() const { return !dir_.empty(); }

    /// Writes an artifact under the output directory and returns its path.
    template <typename Writer>
    std::string write(const std::string& name, Writer&& w) {
        const fs::path p = fs::path(dir_) / name;
        fs::create_directories(p.parent_path());
        std::ofstream f(p);
        if (!f) throw UsageError("cannot write '" + p.string() + "'");
        w(f);
        if (!f) throw UsageError("error writing '" + p.string() + "'");
        return p.string();
    }

    int report(VerificationReport& rep) {
        if (enabled()) {
            rep.artifacts.push_back((fs::path(dir_) / "report.json").string());
            write("report.json", [&](std::ostream& os) { os << rep.dump(); });
        }
        out_ << rep.dump();
        return exit_code(rep.verdict);
    }

private:
    std::string dir_;
    std::ostream& out_;
};

Box resolve_region(const RunConfig& c, const ModelSpec& m) {
    if (!c.region.empty()) {
        const auto v = parse_vector(c.region, "--region");
        if (v.size() == 2) return Box::uniform(m.n(), v[0], v[1]);
        if (static_cast<int>(v.size()) == 2 * m.n()) {
            Box b;
            for (int i = 0; i < m.n(); ++i) {
                b.lower.push_back(v[static_cast<size_t>(2 * i)]);
                b.upper.push_back(v[static_cast<size_t>(2 * i + 1)]);
            }
            return b;
        }
        throw UsageError("--region takes lo,hi or lo1,hi1,...,lon,hin");
    }
    if (m.domain()) return m.domain()->clipped(10.0);
    return Box::uniform(m.n(), -10.0, 10.0);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_sigma(const RunConfig& c, std::ostream& out) {
    if (c.x.empty()) throw UsageError("--x is required");
    const auto x = parse_vector(c.x, "--x");
    const int n = static_cast<int>(x.size());
    if (n < 3) throw UsageError("--x needs at least 3 entries");
    DeltaVector d = DeltaVector::canonical(n);
    if (!c.delta.empty()) {
        std::vector<int> s;
        for (double v : parse_vector(c.delta, "--delta")) s.push_back(static_cast<int>(v));
        if (static_cast<int>(s.size()) != n) throw UsageError("--delta must have as many entries as --x");
        d = DeltaVector(s);
    }
    ordered_json j;
    j["x"] = x;
    j["delta"] = d.signs();
    const auto pattern = sign_pattern(x);
    const bool has_zero = std::find(pattern.begin(), pattern.end(), 0) != pattern.end();
    j["sigma"] = has_zero ? ordered_json(nullptr) : ordered_json(sigma(x, d));
    const bool lam = in_lambda(x, d);
    j["in_lambda"] = lam;
    const auto [lo, hi] = sigma_min_max(x, d, {}, true);
    j["sigma_min"] = lo;
    j["sigma_max"] = hi;
    j["sigma_extended"] = lam ? ordered_json(sigma_extended(x, d)) : ordered_json(nullptr);
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
    const ModelSpec m = load_model(c.model);
    const auto x0 = require_state(c.x0, "--x0", m.n());
    const double t1 = c.t1.value_or(c.t0 + 10.0 * m.period());
    const Trajectory tr = integrate(m, x0, c.t0, t1, control_for(c, m.period(), false));
    Output o(c, out);
    if (o.enabled())
        out << o.write("trajectory.csv", [&](std::ostream& os) { tr.write_csv(os); }) << "\n";
    else
        tr.write_csv(out);
    return 0;
}

int cmd_verify_structure(const RunConfig& c, std::ostream& out) {
    const ModelSpec m = load_model(c.model);
    const Box region = resolve_region(c, m);
    SamplingSpec grid;
    grid.seed = c.seed;

    VerificationReport rep;
    rep.config = base_config(c, &m);
    rep.config["region"] = {{"lower", region.lower}, {"upper", region.upper}};
    rep.config["time_samples"] = grid.time_samples;
    rep.config["state_samples"] = grid.state_samples;
    rep.config["sign_threshold"] = kSignThreshold;
    Output o(c, out);

    FeedbackSignature sig;
    try {
        sig = extract_feedback_signs(m, region, grid);
    } catch (const IndeterminateSignError& e) {
        rep.verdict = Verdict::Fail;
        rep.statistics["indeterminate_index"] = e.index();
        rep.messages.push_back(std::string("degenerate feedback: ") + e.what());
        return o.report(rep);
    }
    auto& st = rep.statistics;
    st["delta"] = sig.delta.signs();
    st["Delta"] = sig.Delta;
    st["mu"] = sig.delta.mu();
    st["samples_checked"] = sig.samples_checked;
    st["inconclusive_samples"] = sig.inconclusive;
    st["sign_violations"] = sig.violations.size();
    for (size_t k = 0; k < std::min<size_t>(sig.violations.size(), 5); ++k) {
        const auto& v = sig.violations[k];
        char buf[160];
        std::snprintf(buf, sizeof buf, "d f%d / d x%d = %.3g at t = %.4g", v.equation, v.variable, v.value, v.t);
        rep.messages.push_back(buf);
    }
    if (!sig.certified()) {
        rep.verdict = Verdict::Fail;
        return o.report(rep);
    }

    // Difference matrices of the canonical system on random pairs from the
    // mapped region, checked both by sign pattern and by the compound.
    const ModelSpec canon = canonical_transform(m, sig);
    Box mapped = region;
    const auto mu = sig.delta.mu();
    for (size_t j = 0; j < mu.size(); ++j)
        if (mu[j] == -1) {
            mapped.lower[j] = -region.upper[j];
            mapped.upper[j] = -region.lower[j];
        }
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long pattern_ok = 0, metzler = 0, disagreements = 0, irreducible = 0;
    const int samples = 200;
    for (int s = 0; s < samples; ++s) {
        std::vector<double> x(static_cast<size_t>(m.n())), y(x.size());
        for (size_t i = 0; i < x.size(); ++i) {
            x[i] = mapped.lower[i] + unit(rng) * (mapped.upper[i] - mapped.lower[i]);
            y[i] = mapped.lower[i] + unit(rng) * (mapped.upper[i] - mapped.lower[i]);
        }
        const double t = m.period() * unit(rng);
        const Eigen::MatrixXd A = difference_matrix(canon, x, y, t);
        const auto pat = check_linear_two_positive(A);
        const bool comp = is_metzler(additive_compound(A, 2));
        if (pat.ok) ++pattern_ok;
        if (comp) ++metzler;
        if (pat.sign_pattern_ok() != comp) ++disagreements;
        if (is_irreducible(A)) ++irreducible;
    }
    st["difference_samples"] = samples;
    st["two_positive_pattern"] = pattern_ok;
    st["compound_metzler"] = metzler;
    st["pattern_compound_disagreements"] = disagreements;
    st["irreducible"] = irreducible;
    st["canonical_model_hash"] = canon.hash();

    if (sig.Delta != -1) {
        rep.messages.push_back("Delta = +1: positive feedback, outside the negative-feedback hypothesis");
        rep.verdict = Verdict::Fail;
    } else if (disagreements > 0) {
        rep.messages.push_back("sign pattern and compound Metzler check disagree");
        rep.verdict = Verdict::Fail;
    } else if (pattern_ok < samples) {
        rep.messages.push_back("some difference matrices leave the 2-positive pattern");
        rep.verdict = Verdict::Fail;
    } else {
        rep.verdict = Verdict::Pass;
    }
    return o.report(rep);
}

int cmd_transform(const RunConfig& c, std::ostream& out) {
    const ModelSpec m = load_model(c.model);
    SamplingSpec grid;
    grid.seed = c.seed;
    const auto sig = extract_feedback_signs(m, resolve_region(c, m), grid);
    const ModelSpec canon = canonical_transform(m, sig);
    Output o(c, out);
    if (o.enabled())
        out << o.write("canonical.json", [&](std::ostream& os) { os << to_model_file(canon); }) << "\n";
    else
        out << to_model_file(canon);
    return 0;
}

int cmd_sigma_trace(const RunConfig& c, std::ostream& out) {
    const ModelSpec m = load_model(c.model);
    const auto x0 = require_state(c.x0, "--x0", m.n());
    const auto y0 = require_state(c.y0, "--y0", m.n());
    TraceOptions opt;
    opt.t0 = c.t0;
    opt.t1 = c.t1.value_or(c.t0 + 20.0 * m.period());
    opt.control = control_for(c, m.period(), false);
    const SigmaTrace tr = sigma_trace_pair(m, x0, y0, opt);

    VerificationReport rep = verify_sigma_monotone(tr);
    rep.config = base_config(c, &m);
    rep.config["x0"] = x0;
    rep.config["y0"] = y0;
    rep.config["t0"] = opt.t0;
    rep.config["t1"] = opt.t1;
    rep.config["control"] = control_json(opt.control);
    rep.config["zero_tol"] = opt.zero_tol;
    ordered_json drops = ordered_json::array();
    for (const auto& e : tr.drops)
        drops.push_back({{"t_before", e.t_before},
                         {"t_after", e.t_after},
                         {"sigma_before", e.sigma_before},
                         {"sigma_after", e.sigma_after},
                         {"crossing", e.crossing ? ordered_json(*e.crossing) : ordered_json(nullptr)}});
    rep.statistics["drop_events"] = drops;
    Output o(c, out);
    if (o.enabled()) rep.artifacts.push_back(o.write("sigma_trace.csv", [&](std::ostream& os) { tr.write_csv(os); }));
    return o.report(rep);
}

OmegaSetApprox run_omega(const RunConfig& c, const ModelSpec& m, const std::vector<double>& x0) {
    OmegaOptions opt;
    opt.burn_in = c.burn_in;
    opt.window = c.window;
    opt.eps = c.eps;
    opt.control = control_for(c, m.period(), true);
    return omega_limit_approx(m, x0, opt);
}

void omega_config(ordered_json& j, const RunConfig& c, const ModelSpec& m, const std::vector<double>& x0) {
    j["x0"] = x0;
    j["burn_in"] = c.burn_in;
    j["window"] = c.window;
    j["eps"] = c.eps;
    j["poincare_control"] = control_json(control_for(c, m.period(), true));
}

void write_points(std::ostream& os, const std::vector<StateVector>& pts, int n) {
    for (int i = 0; i < n; ++i) os << (i ? "," : "") << 'x' << i + 1;
    os << '\n';
    char buf[64];
    for (const auto& p : pts) {
        for (size_t i = 0; i < p.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", p[i]);
            os << (i ? "," : "") << buf;
        }
        os << '\n';
    }
}

int cmd_omega(const RunConfig& c, std::ostream& out) {
    const ModelSpec m = load_model(c.model);
    const auto x0 = require_state(c.x0, "--x0", m.n());
    const auto om = run_omega(c, m, x0);
    VerificationReport rep;
    rep.config = base_config(c, &m);
    omega_config(rep.config, c, m, x0);
    rep.statistics["points"] = om.points.size();
    rep.statistics["converged"] = om.converged;
    rep.statistics["net_change"] = om.net_change;
    rep.statistics["iterates"] = om.iterates;
    rep.verdict = om.converged ? Verdict::Pass : Verdict::Inconclusive;
    if (!om.converged) rep.messages.push_back("net changed by more than eps between the half and full windows");
    Output o(c, out);
    if (o.enabled())
        rep.artifacts.push_back(o.write("omega.csv", [&](std::ostream& os) { write_points(os, om.points, m.n()); }));
    return o.report(rep);
}

int cmd_omega_sigma(const RunConfig& c, std::ostream& out) {
    const ModelSpec m = load_model(c.model);
    const auto x0 = require_state(c.x0, "--x0", m.n());
    const auto om = run_omega(c, m, x0);
    PairOptions p;
    p.pair_budget = c.pairs;
    p.periods = c.periods;
    p.control = control_for(c, m.period(), false);
    std::vector<SigmaTrace> traces;
    VerificationReport rep = verify_sigma_constancy_on_omega(m, om, p, &traces);
    ordered_json cfg = base_config(c, &m);
    omega_config(cfg, c, m, x0);
    cfg.update(rep.config);
    rep.config = cfg;
    rep.statistics["omega_converged"] = om.converged;
    Output o(c, out);
    if (o.enabled()) {
        rep.artifacts.push_back(o.write("omega.csv", [&](std::ostream& os) { write_points(os, om.points, m.n()); }));
        const auto pairs = select_pairs(om.points.size(), c.pairs);
        for (size_t k = 0; k < traces.size() && k < pairs.size(); ++k) {
            const std::string name =
                "pairs/pair_" + std::to_string(pairs[k].first) + "_" + std::to_string(pairs[k].second) + ".csv";
            rep.artifacts.push_back(o.write(name, [&](std::ostream& os) { traces[k].write_csv(os); }));
        }
    }
    return o.report(rep);
}

int cmd_embed(const RunConfig& c, std::ostream& out) {
    const ModelSpec m = load_model(c.model);
    const auto x0 = require_state(c.x0, "--x0", m.n());
    const auto om = run_omega(c, m, x0);
    const auto inj = verify_embedding_injectivity(om);
    const auto conj = verify_conjugacy(om, m, control_for(c, m.period(), true));

    VerificationReport rep;
    rep.config = base_config(c, &m);
    omega_config(rep.config, c, m, x0);
    rep.statistics["omega_converged"] = om.converged;
    rep.statistics["injectivity"] = {{"verdict", to_string(inj.verdict)}, {"statistics", inj.statistics}};
    rep.statistics["conjugacy"] = {{"verdict", to_string(conj.verdict)}, {"statistics", conj.statistics}};
    for (const auto* r : {&inj, &conj})
        rep.messages.insert(rep.messages.end(), r->messages.begin(), r->messages.end());
    if (inj.verdict == Verdict::Fail || conj.verdict == Verdict::Fail)
        rep.verdict = Verdict::Fail;
    else if (inj.verdict == Verdict::Pass && conj.verdict == Verdict::Pass)
        rep.verdict = Verdict::Pass;
    else
        rep.verdict = Verdict::Inconclusive;

    Output o(c, out);
    if (o.enabled()) {
        const auto h = embed_projection(om);
        rep.artifacts.push_back(o.write("embedding.csv", [&](std::ostream& os) {
            os << "x1,x2\n";
            char buf[96];
            for (const auto& p : h) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p[0], p[1]);
                os << buf;
            }
        }));
    }
    return o.report(rep);
}

int cmd_dissipative(const RunConfig& c, std::ostream& out) {
    const ModelSpec m = load_model(c.model);
    DissipativeSampling grid;
    grid.seed = c.seed;
    VerificationReport rep;
    rep.config = base_config(c, &m);
    rep.config["C"] = c.C;
    rep.config["time_samples"] = grid.time_samples;
    rep.config["samples_per_index"] = grid.samples_per_index;
    rep.config["radius_factor"] = grid.radius_factor;

    double C = 0.0;
    if (c.C == "auto") {
        const auto found = find_dissipative_bound(m, grid);
        if (!found) {
            rep.verdict = Verdict::Fail;
            rep.messages.push_back("no C up to 1e6 satisfies the sampled dissipative condition");
            Output o(c, out);
            return o.report(rep);
        }
        C = *found;
    } else {
        C = parse_vector(c.C, "--C").front();
        if (!(C > 0)) throw UsageError("--C must be positive or 'auto'");
    }

    std::vector<std::vector<double>> starts;
    if (!c.x0.empty()) starts.push_back(require_state(c.x0, "--x0", m.n()));
    const double horizon = c.t1.value_or(50.0 * m.period());
    const auto d = starts.empty() ? check_dissipative_H(m, C, grid)
                                  : check_dissipative_H(m, C, grid, starts, horizon, Adaptive{1e-8, c.atol});
    auto& st = rep.statistics;
    st["C"] = C;
    st["samples_checked"] = d.samples_checked;
    st["violations"] = d.violations.size();
    for (size_t k = 0; k < std::min<size_t>(d.violations.size(), 5); ++k) {
        const auto& v = d.violations[k];
        std::ostringstream msg;
        msg << "f" << v.index << " * x" << v.index << " = " << v.value << " at t = " << v.t;
        rep.messages.push_back(msg.str());
    }
    ordered_json entries = ordered_json::array();
    for (const auto& e : d.absorbing_box_entries)
        entries.push_back({{"x0", e.x0}, {"entered", e.entered}, {"entry_time", e.entry_time}, {"retained", e.retained}});
    if (!starts.empty()) {
        st["absorbing_box"] = entries;
        rep.config["horizon"] = horizon;
    }
    rep.verdict = d.holds() ? Verdict::Pass : Verdict::Fail;
    Output o(c, out);
    return o.report(rep);
}

int cmd_list_models(std::ostream& out) {
    for (const auto& n : builtin_names()) out << n << "\n";
    return 0;
}

int cmd_show_model(const RunConfig& c, std::ostream& out) {
    out << to_model_file(load_model(c.model));
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sign-change analysis of time-periodic cyclic feedback systems", "cyclofeed"};
    app.require_subcommand(1);
    RunConfig c;

    auto model = [&](CLI::App* s) { s->add_option("--model", c.model, "model file or built-in name")->required(); };
    auto span = [&](CLI::App* s) {
        s->add_option("--t0", c.t0, "start time");
        s->add_option("--t1", c.t1, "end time");
    };
    auto integ = [&](CLI::App* s) {
        s->add_option("--step", c.step, "fixed RK4 step");
        s->add_option("--rtol", c.rtol, "relative tolerance (selects adaptive DOPRI5)");
        s->add_option("--atol", c.atol, "absolute tolerance for adaptive runs");
    };
    auto omega = [&](CLI::App* s) {
        s->add_option("--burn-in", c.burn_in, "Poincare iterations discarded (K)");
        s->add_option("--window", c.window, "Poincare iterations kept (M)");
        s->add_option("--eps", c.eps, "cluster radius");
    };
    auto outdir = [&](CLI::App* s) { s->add_option("--out", c.out, "directory for the report and CSV evidence"); };
    auto seed = [&](CLI::App* s) { s->add_option("--seed", c.seed, "sampling seed"); };

    auto* sig = app.add_subcommand("sigma", "sigma, Lambda membership and (sigma_m, sigma_M) of a vector");
    sig->add_option("--x", c.x, "comma-separated vector")->required();
    sig->add_option("--delta", c.delta, "comma-separated feedback signs (canonical by default)");

    auto* sim = app.add_subcommand("simulate", "integrate a model and emit a trajectory CSV");
    model(sim);
    sim->add_option("--x0", c.x0, "initial state")->required();
    span(sim);
    integ(sim);
    outdir(sim);

    auto* vs = app.add_subcommand("verify-structure", "feedback signs, 2-positive pattern and compound cross-check");
    model(vs);
    vs->add_option("--region", c.region, "sampling box: lo,hi or lo1,hi1,...,lon,hin");
    seed(vs);
    outdir(vs);

    auto* tf = app.add_subcommand("transform", "emit the canonical (sign-flipped) model file");
    model(tf);
    tf->add_option("--region", c.region, "sampling box for sign extraction");
    seed(tf);
    outdir(tf);

    auto* st = app.add_subcommand("sigma-trace", "sigma along the difference of two solutions");
    model(st);
    st->add_option("--x0", c.x0, "first initial state")->required();
    st->add_option("--y0", c.y0, "second initial state")->required();
    span(st);
    integ(st);
    outdir(st);

    auto* om = app.add_subcommand("omega", "approximate the omega-limit set of the Poincare map");
    model(om);
    om->add_option("--x0", c.x0, "initial state")->required();
    omega(om);
    integ(om);
    outdir(om);

    auto* osg = app.add_subcommand("omega-sigma", "sigma constancy for pairs in an omega-limit set");
    model(osg);
    osg->add_option("--x0", c.x0, "initial state")->required();
    omega(osg);
    integ(osg);
    osg->add_option("--pairs", c.pairs, "pair budget");
    osg->add_option("--periods", c.periods, "trace length in periods");
    outdir(osg);

    auto* emb = app.add_subcommand("embed", "planar embedding of an omega-limit set");
    model(emb);
    emb->add_option("--x0", c.x0, "initial state")->required();
    omega(emb);
    integ(emb);
    outdir(emb);

    auto* ds = app.add_subcommand("dissipative", "probe the dissipative condition (H)");
    model(ds);
    ds->add_option("--C", c.C, "box half-width, or 'auto'");
    ds->add_option("--x0", c.x0, "optional initial state for an absorbing-box entry check");
    ds->add_option("--t1", c.t1, "horizon of the entry check");
    seed(ds);
    outdir(ds);

    app.add_subcommand("list-models", "list built-in models");
    auto* sm = app.add_subcommand("show-model", "print a model file");
    model(sm);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        validate(c);
        const auto* sub = app.get_subcommands().front();
        c.command = sub->get_name();
        if (c.command == "sigma") return cmd_sigma(c, out);
        if (c.command == "simulate") return cmd_simulate(c, out);
        if (c.command == "verify-structure") return cmd_verify_structure(c, out);
        if (c.command == "transform") return cmd_transform(c, out);
        if (c.command == "sigma-trace") return cmd_sigma_trace(c, out);
        if (c.command == "omega") return cmd_omega(c, out);
        if (c.command == "omega-sigma") return cmd_omega_sigma(c, out);
        if (c.command == "embed") return cmd_embed(c, out);
        if (c.command == "dissipative") return cmd_dissipative(c, out);
        if (c.command == "list-models") return cmd_list_models(out);
        if (c.command == "show-model") return cmd_show_model(c, out);
    } catch (const HypothesisError& e) {
        err << "cyclofeed: " << e.what() << "\n";
        return 2;
    } catch (const BlowUpError& e) {
        err << "cyclofeed: " << e.what() << "\n";
        return 3;
    } catch (const StepUnderflowError& e) {
        err << "cyclofeed: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "cyclofeed: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace cyclofeed
