#pragma once

// Expression ASTs for model right-hand sides.
//
// Grammar (standard precedence, tightest first):
//   primary  := number | symbol | func '(' expr ')' | '(' expr ')'
//   power    := primary [ '^' integer ]        (constant integer exponents only)
//   unary    := '-' unary | power
//   term     := unary { ('*' | '/') unary }
//   expr     := term { ('+' | '-') term }
// Symbols: `t` is time, `x1 .. xn` are states, `pi` is the constant, and any
// other identifier is a parameter. Functions: sin, cos, exp.

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cyclofeed {

using ParamTable = std::map<std::string, double>;

enum class Op { Const, Param, Time, State, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp };

/// Immutable, cheaply copyable expression tree.
class Expression {
public:
    struct Node;

    Expression();  // the constant 0

    static Expression constant(double v);
    static Expression param(std::string name);
    static Expression time();
    /// 1-based state index.
    static Expression state(int index);
    static Expression binary(Op op, Expression lhs, Expression rhs);
    static Expression unary(Op op, Expression arg);
    static Expression power(Expression base, int exponent);

    Op op() const noexcept;
    double value() const noexcept;           // Const
    const std::string& name() const noexcept; // Param
    int index() const noexcept;              // State index or Pow exponent
    const Expression& lhs() const noexcept;  // binary ops, Pow base
    const Expression& rhs() const noexcept;  // binary ops
    const Expression& arg() const noexcept;  // Neg / functions

    bool is_constant(double v) const noexcept;

    /// Structural equality.
    bool operator==(const Expression& other) const;

    std::string to_string() const;

private:
    explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Variable of differentiation: time or a 1-based state index.
struct Variable {
    enum class Kind { Time, State } kind = Kind::State;
    int index = 1;

    static Variable time() { return {Kind::Time, 0}; }
    static Variable state(int i) { return {Kind::State, i}; }
};

Expression parse_expression(std::string_view text);
std::string unparse(const Expression& e);

/// Exact symbolic derivative with constant folding.
Expression differentiate(const Expression& e, Variable var);

/// Replaces x_j by replacements[j-1]. No folding is applied.
Expression substitute_states(const Expression& e, std::span<const Expression> replacements);

/// Largest state index referenced (0 when none).
int max_state_index(const Expression& e);
/// Sorted, deduplicated state indices referenced.
std::vector<int> state_indices(const Expression& e);
/// Sorted, deduplicated parameter names referenced.
std::vector<std::string> param_names(const Expression& e);

// Folding constructors. Each reduces trivial identities (0*e, e+0, 1*e, ...)
// and folds constant operands when the result is finite.
Expression fold_add(const Expression& a, const Expression& b);
Expression fold_sub(const Expression& a, const Expression& b);
Expression fold_mul(const Expression& a, const Expression& b);
Expression fold_div(const Expression& a, const Expression& b);
Expression fold_neg(const Expression& a);
Expression fold_pow(const Expression& a, int k);
Expression fold_func(Op op, const Expression& a);

/// Expression lowered to a flat stack program with parameters resolved.
/// Thread-safe to run concurrently.
class Program {
public:
    Program() = default;
    /// Throws BindError on unknown parameters or state indices above `n`.
    Program(const Expression& e, const ParamTable& params, int n);

    /// Throws EvalError on division by zero or any non-finite intermediate.
    double run(double t, std::span<const double> x) const;

    bool is_constant() const noexcept { return code_.size() == 1 && code_[0].op == Op::Const; }

private:
    struct Instr {
        Op op;
        double value;
        int index;
    };
    std::vector<Instr> code_;
    int depth_ = 0;
};

/// One-shot evaluation. State vector entries are x1 .. xn in order.
double evaluate(const Expression& e, double t, std::span<const double> x, const ParamTable& params);

} // namespace cyclofeed
