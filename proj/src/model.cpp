#include "cyclofeed/model.hpp"

#include "cyclofeed/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

namespace cyclofeed {

using nlohmann::json;

Box Box::uniform(int n, double lo, double hi) {
    return {std::vector<double>(static_cast<size_t>(n), lo), std::vector<double>(static_cast<size_t>(n), hi)};
}

bool Box::contains(std::span<const double> x) const {
    if (x.size() != lower.size()) return false;
    for (size_t i = 0; i < x.size(); ++i)
        if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
}

bool Box::bounded() const {
    for (size_t i = 0; i < lower.size(); ++i)
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) return false;
    return true;
}

Box Box::clipped(double r) const {
    Box b = *this;
    for (size_t i = 0; i < b.lower.size(); ++i) {
        b.lower[i] = std::max(b.lower[i], -r);
        b.upper[i] = std::min(b.upper[i], r);
    }
    return b;
}

namespace {

// 1-based indices; true when j is in {i-1, i, i+1} cyclically.
bool cyclic_neighbor(int i, int j, int n) {
    const int d = ((j - i) % n + n) % n;
    return d == 0 || d == 1 || d == n - 1;
}

} // namespace

ModelSpec::ModelSpec(int n, double period, std::vector<Expression> rhs, ParamTable params, bool cyclic,
                     std::optional<Box> domain, std::string name)
    : n_(n), period_(period), rhs_(std::move(rhs)), params_(std::move(params)), cyclic_(cyclic),
      domain_(std::move(domain)), name_(std::move(name)) {
    if (n_ < 1) throw DimensionError("model dimension must be positive");
    if (cyclic_ && n_ < 3) throw DimensionError("cyclic models need n >= 3");
    if (!(period_ > 0.0) || !std::isfinite(period_)) throw DomainError("period must be positive and finite");
    if (static_cast<int>(rhs_.size()) != n_)
        throw DimensionError("model declares n = " + std::to_string(n_) + " but has " +
                             std::to_string(rhs_.size()) + " equations");
    if (domain_ && domain_->size() != n_) throw DimensionError("domain box dimension does not match n");

    if (cyclic_) {
        for (int i = 0; i < n_; ++i)
            for (int j : state_indices(rhs_[static_cast<size_t>(i)]))
                if (!cyclic_neighbor(i + 1, j, n_))
                    throw FormatError("equation " + std::to_string(i + 1) + " references x" + std::to_string(j) +
                                      " but the model is declared cyclic");
    }

    rhs_code_.reserve(rhs_.size());
    for (const auto& e : rhs_) rhs_code_.emplace_back(e, params_, n_);

    jacobian_.assign(static_cast<size_t>(n_), std::vector<Expression>(static_cast<size_t>(n_)));
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            Expression d = differentiate(rhs_[static_cast<size_t>(i)], Variable::state(j + 1));
            if (!d.is_constant(0.0)) jacobian_code_.push_back({i, j, Program(d, params_, n_)});
            jacobian_[static_cast<size_t>(i)][static_cast<size_t>(j)] = std::move(d);
        }
    }
}

void ModelSpec::eval_rhs(double t, std::span<const double> x, std::span<double> dx) const {
    for (size_t i = 0; i < rhs_code_.size(); ++i) dx[i] = rhs_code_[i].run(t, x);
}

Eigen::VectorXd ModelSpec::eval_rhs(double t, std::span<const double> x) const {
    Eigen::VectorXd dx(n_);
    eval_rhs(t, x, std::span<double>(dx.data(), static_cast<size_t>(n_)));
    return dx;
}

double ModelSpec::eval_jacobian_entry(int i, int j, double t, std::span<const double> x) const {
    for (const auto& e : jacobian_code_)
        if (e.i == i && e.j == j) return e.code.run(t, x);
    return 0.0;
}

Eigen::MatrixXd ModelSpec::eval_jacobian(double t, std::span<const double> x) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n_, n_);
    accumulate_jacobian(t, x, 1.0, J);
    return J;
}

void ModelSpec::accumulate_jacobian(double t, std::span<const double> x, double weight,
                                    Eigen::MatrixXd& acc) const {
    for (const auto& e : jacobian_code_) acc(e.i, e.j) += weight * e.code.run(t, x);
}

std::string ModelSpec::hash() const {
    const std::string text = to_model_file(*this);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ModelSpec ModelSpec::with_name(std::string name) const {
    ModelSpec m = *this;
    m.name_ = std::move(name);
    return m;
}

ExprMatrix jacobian(const ModelSpec& m) { return m.jacobian(); }

namespace {

double bound_from_json(const json& v, double inf) {
    if (v.is_null()) return inf;
    if (!v.is_number()) throw FormatError("domain bounds must be numbers or null");
    return v.get<double>();
}

nlohmann::ordered_json bound_to_json(double v) {
    if (std::isinf(v)) return nullptr;
    return v;
}

} // namespace

ModelSpec parse_model_file(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("model file must be a JSON object");
    for (const char* key : {"n", "period", "equations"})
        if (!doc.contains(key)) throw FormatError(std::string("model file is missing '") + key + "'");

    try {
        const int n = doc.at("n").get<int>();
        const double period = doc.at("period").get<double>();
        const auto& eqs = doc.at("equations");
        if (!eqs.is_array()) throw FormatError("'equations' must be an array of strings");
        if (static_cast<int>(eqs.size()) != n)
            throw DimensionError("'n' is " + std::to_string(n) + " but " + std::to_string(eqs.size()) +
                                 " equations were given");

        std::vector<Expression> rhs;
        for (size_t i = 0; i < eqs.size(); ++i) {
            try {
                rhs.push_back(parse_expression(eqs[i].get<std::string>()));
            } catch (const ParseError& e) {
                throw FormatError("equation " + std::to_string(i + 1) + ": " + e.what());
            }
        }

        ParamTable params;
        if (doc.contains("params")) {
            if (!doc["params"].is_object()) throw FormatError("'params' must be an object");
            for (const auto& [k, v] : doc["params"].items()) params[k] = v.get<double>();
        }
        const bool cyclic = doc.value("cyclic", false);

        std::optional<Box> domain;
        if (doc.contains("domain") && !doc["domain"].is_null()) {
            const auto& d = doc["domain"];
            Box b;
            for (const auto& v : d.at("lower"))
                b.lower.push_back(bound_from_json(v, -std::numeric_limits<double>::infinity()));
            for (const auto& v : d.at("upper"))
                b.upper.push_back(bound_from_json(v, std::numeric_limits<double>::infinity()));
            if (b.lower.size() != b.upper.size()) throw FormatError("domain bounds have different lengths");
            domain = std::move(b);
        }
        return ModelSpec(n, period, std::move(rhs), std::move(params), cyclic, std::move(domain),
                         doc.value("name", std::string{}));
    } catch (const json::exception& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
}

std::string to_model_file(const ModelSpec& m) {
    nlohmann::ordered_json doc;
    if (!m.name().empty()) doc["name"] = m.name();
    doc["n"] = m.n();
    doc["period"] = m.period();
    doc["cyclic"] = m.cyclic();
    auto eqs = nlohmann::ordered_json::array();
    for (const auto& e : m.rhs()) eqs.push_back(unparse(e));
    doc["equations"] = std::move(eqs);
    auto params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.params()) params[k] = v;
    doc["params"] = std::move(params);
    if (m.domain()) {
        auto lo = nlohmann::ordered_json::array();
        auto hi = nlohmann::ordered_json::array();
        for (double v : m.domain()->lower) lo.push_back(bound_to_json(v));
        for (double v : m.domain()->upper) hi.push_back(bound_to_json(v));
        nlohmann::ordered_json dom;
        dom["lower"] = std::move(lo);
        dom["upper"] = std::move(hi);
        doc["domain"] = std::move(dom);
    }
    return doc.dump(2) + "\n";
}

} // namespace cyclofeed
