#pragma once

#include "cyclofeed/expr.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cyclofeed {

/// Axis-aligned box; infinite bounds mean unbounded.
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    static Box uniform(int n, double lo, double hi);
    int size() const noexcept { return static_cast<int>(lower.size()); }
    bool contains(std::span<const double> x) const;
    bool bounded() const;
    /// Intersection with [-r, r]^n.
    Box clipped(double r) const;
};

using ExprMatrix = std::vector<std::vector<Expression>>;

/// An n-dimensional, T-periodic system x' = f(t, x) with symbolic right-hand side.
///
/// Immutable after construction. The constructor binds every parameter,
/// checks state indices against n, validates the cyclic structure when it is
/// declared, and precomputes the symbolic Jacobian.
class ModelSpec {
public:
    ModelSpec(int n, double period, std::vector<Expression> rhs, ParamTable params, bool cyclic,
              std::optional<Box> domain = std::nullopt, std::string name = {});

    int n() const noexcept { return n_; }
    double period() const noexcept { return period_; }
    const std::vector<Expression>& rhs() const noexcept { return rhs_; }
    const ParamTable& params() const noexcept { return params_; }
    bool cyclic() const noexcept { return cyclic_; }
    const std::optional<Box>& domain() const noexcept { return domain_; }
    const std::string& name() const noexcept { return name_; }

    /// Symbolic Jacobian, entry (i, j) = d rhs[i] / d x_{j+1} (0-based i, j).
    const ExprMatrix& jacobian() const noexcept { return jacobian_; }

    void eval_rhs(double t, std::span<const double> x, std::span<double> dx) const;
    Eigen::VectorXd eval_rhs(double t, std::span<const double> x) const;
    /// Single Jacobian entry, 0-based.
    double eval_jacobian_entry(int i, int j, double t, std::span<const double> x) const;
    Eigen::MatrixXd eval_jacobian(double t, std::span<const double> x) const;
    /// Accumulates weight * J(t, x) into `acc`.
    void accumulate_jacobian(double t, std::span<const double> x, double weight, Eigen::MatrixXd& acc) const;

    /// Stable identifier: FNV-1a of the serialized model file.
    std::string hash() const;

    ModelSpec with_name(std::string name) const;

private:
    int n_;
    double period_;
    std::vector<Expression> rhs_;
    ParamTable params_;
    bool cyclic_;
    std::optional<Box> domain_;
    std::string name_;
    ExprMatrix jacobian_;
    std::vector<Program> rhs_code_;
    // Non-constant-zero Jacobian entries only.
    struct Entry {
        int i;
        int j;
        Program code;
    };
    std::vector<Entry> jacobian_code_;
};

/// Symbolic n x n Jacobian of the model.
ExprMatrix jacobian(const ModelSpec& m);

/// Model files are JSON objects:
///   { "name": str?, "n": int, "period": number, "equations": [str, ...],
///     "params": {name: number}, "cyclic": bool,
///     "domain": {"lower": [number|null], "upper": [number|null]}? }
/// null bounds denote -inf / +inf.
ModelSpec parse_model_file(std::string_view text);
std::string to_model_file(const ModelSpec& m);

} // namespace cyclofeed
