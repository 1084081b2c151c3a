#include "cyclofeed/error.hpp"
#include "cyclofeed/limits.hpp"
#include "cyclofeed/models.hpp"
#include "cyclofeed/structure.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cyclofeed;

namespace {

DeltaVector delta_or_canonical(const std::optional<std::vector<int>>& d, size_t n) {
    return d ? DeltaVector(*d) : DeltaVector::canonical(static_cast<int>(n));
}

StepControl control_from(std::optional<double> step, std::optional<double> rtol, double atol, StepControl fallback) {
    if (step && rtol) throw DomainError("give either step or rtol, not both");
    if (step) return FixedStep{*step};
    if (rtol) return Adaptive{*rtol, atol};
    return fallback;
}

py::tuple trajectory_arrays(const Trajectory& tr) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(tr.size()));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(tr.size()), tr.dimension());
    for (size_t k = 0; k < tr.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        t(row) = tr.time(k);
        const auto s = tr.state(k);
        for (int i = 0; i < tr.dimension(); ++i) x(row, i) = s[static_cast<size_t>(i)];
    }
    return py::make_tuple(t, x);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sign-change counting and limit-set checks for cyclic feedback systems.";

    py::register_exception<Error>(m, "CyclofeedError", PyExc_ValueError);

    m.def("sigma", [](const std::vector<double>& x, const std::optional<std::vector<int>>& delta) {
        return sigma(x, delta_or_canonical(delta, x.size()));
    }, py::arg("x"), py::arg("delta") = py::none());
    m.def("sigma_min_max", [](const std::vector<double>& x, const std::optional<std::vector<int>>& delta) {
        return sigma_min_max(x, delta_or_canonical(delta, x.size()));
    }, py::arg("x"), py::arg("delta") = py::none());
    m.def("in_lambda", [](const std::vector<double>& x, const std::optional<std::vector<int>>& delta) {
        return in_lambda(x, delta_or_canonical(delta, x.size()));
    }, py::arg("x"), py::arg("delta") = py::none());
    m.def("ntilde", &ntilde);

    py::class_<ModelSpec>(m, "Model")
        .def_property_readonly("n", &ModelSpec::n)
        .def_property_readonly("period", &ModelSpec::period)
        .def_property_readonly("name", &ModelSpec::name)
        .def_property_readonly("cyclic", &ModelSpec::cyclic)
        .def_property_readonly("equations", [](const ModelSpec& s) {
            std::vector<std::string> out;
            for (const auto& e : s.rhs()) out.push_back(unparse(e));
            return out;
        })
        .def("rhs", [](const ModelSpec& s, double t, const std::vector<double>& x) { return s.eval_rhs(t, x); })
        .def("jacobian", [](const ModelSpec& s, double t, const std::vector<double>& x) { return s.eval_jacobian(t, x); })
        .def("to_json", &to_model_file)
        .def("__repr__", [](const ModelSpec& s) { return "<cyclofeed.Model '" + s.name() + "' n=" + std::to_string(s.n()) + ">"; });

    m.def("parse_model", &parse_model_file, py::arg("text"));
    m.def("builtin_model", &builtin_model, py::arg("name"));
    m.def("builtin_names", &builtin_names);
    m.def("antithetic_controller", &antithetic_controller, py::arg("a") = std::array<double, 8>{1, 1, 1, 1, 1, 1, 1, 1});
    m.def("random_two_positive_linear", &random_two_positive_linear, py::arg("n"), py::arg("periodic"), py::arg("seed"));

    m.def("simulate", [](const ModelSpec& s, const std::vector<double>& x0, double t0, double t1,
                         std::optional<double> step, std::optional<double> rtol, double atol) {
        return trajectory_arrays(integrate(s, x0, t0, t1, control_from(step, rtol, atol, Adaptive{})));
    }, py::arg("model"), py::arg("x0"), py::arg("t0") = 0.0, py::arg("t1") = 1.0, py::arg("step") = py::none(),
       py::arg("rtol") = py::none(), py::arg("atol") = 1e-10);

    m.def("poincare_map", [](const ModelSpec& s, const std::vector<double>& x) { return poincare_map(s, x); },
          py::arg("model"), py::arg("x"));

    m.def("feedback_signs", [](const ModelSpec& s, const std::vector<double>& lo, const std::vector<double>& hi) {
        const auto sig = extract_feedback_signs(s, Box{lo, hi});
        py::dict d;
        d["delta"] = sig.delta.signs();
        d["Delta"] = sig.Delta;
        d["certified"] = sig.certified();
        d["violations"] = sig.violations.size();
        return d;
    }, py::arg("model"), py::arg("lower"), py::arg("upper"));
    m.def("canonical_transform", [](const ModelSpec& s, const std::vector<double>& lo, const std::vector<double>& hi) {
        return canonical_transform(s, extract_feedback_signs(s, Box{lo, hi}));
    }, py::arg("model"), py::arg("lower"), py::arg("upper"));

    m.def("is_two_positive_pattern", [](const Eigen::MatrixXd& A) { return check_linear_two_positive(A).ok; });
    m.def("additive_compound", &additive_compound, py::arg("A"), py::arg("k"));
    m.def("is_metzler", &is_metzler);

    m.def("sigma_trace", [](const ModelSpec& s, const std::vector<double>& x, const std::vector<double>& y, double t1,
                            std::optional<double> step) {
        TraceOptions o;
        o.t1 = t1;
        o.control = FixedStep{step.value_or(s.period() / 2000)};
        const auto tr = sigma_trace_pair(s, x, y, o);
        return py::make_tuple(tr.times, tr.sigma, verify_sigma_monotone(tr).dump());
    }, py::arg("model"), py::arg("x"), py::arg("y"), py::arg("t1") = 1.0, py::arg("step") = py::none());

    py::class_<OmegaSetApprox>(m, "OmegaSet")
        .def_readonly("points", &OmegaSetApprox::points)
        .def_readonly("iterates", &OmegaSetApprox::iterates)
        .def_readonly("converged", &OmegaSetApprox::converged)
        .def_readonly("cluster_radius", &OmegaSetApprox::cluster_radius)
        .def_readonly("net_change", &OmegaSetApprox::net_change);

    m.def("omega_limit", [](const ModelSpec& s, const std::vector<double>& x0, int burn_in, int window, double eps) {
        OmegaOptions o;
        o.burn_in = burn_in;
        o.window = window;
        o.eps = eps;
        return omega_limit_approx(s, x0, o);
    }, py::arg("model"), py::arg("x0"), py::arg("burn_in") = 500, py::arg("window") = 200, py::arg("eps") = 1e-4);

    m.def("verify_sigma_constancy", [](const ModelSpec& s, const OmegaSetApprox& om, int budget, double periods) {
        PairOptions p;
        p.pair_budget = budget;
        p.periods = periods;
        p.control = FixedStep{s.period() / 2000};
        return verify_sigma_constancy_on_omega(s, om, p).dump();
    }, py::arg("model"), py::arg("omega"), py::arg("pair_budget") = 50, py::arg("periods") = 5.0);
    m.def("verify_embedding", [](const OmegaSetApprox& om) { return verify_embedding_injectivity(om).dump(); });
    m.def("verify_conjugacy", [](const OmegaSetApprox& om, const ModelSpec& s) { return verify_conjugacy(om, s).dump(); });
}
