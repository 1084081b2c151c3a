#include "cyclofeed/expr.hpp"

#include "cyclofeed/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <set>

namespace cyclofeed {

struct Expression::Node {
    Op op = Op::Const;
    double value = 0.0;
    std::string name;
    int index = 0;
    Expression a{nullptr};
    Expression b{nullptr};
};

namespace {

bool is_binary(Op op) {
    return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div;
}

bool is_function(Op op) { return op == Op::Sin || op == Op::Cos || op == Op::Exp; }

const char* function_name(Op op) {
    switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    default: return "?";
    }
}

} // namespace

Expression::Expression() : node_(std::make_shared<const Node>()) {}

Expression Expression::constant(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = v;
    return Expression(std::move(n));
}

Expression Expression::param(std::string name) {
    auto n = std::make_shared<Node>();
    n->op = Op::Param;
    n->name = std::move(name);
    return Expression(std::move(n));
}

Expression Expression::time() {
    auto n = std::make_shared<Node>();
    n->op = Op::Time;
    return Expression(std::move(n));
}

Expression Expression::state(int index) {
    if (index < 1) throw BindError("state index must be >= 1");
    auto n = std::make_shared<Node>();
    n->op = Op::State;
    n->index = index;
    return Expression(std::move(n));
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
    if (!is_binary(op)) throw Error("Expression::binary: not a binary operator");
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(lhs);
    n->b = std::move(rhs);
    return Expression(std::move(n));
}

Expression Expression::unary(Op op, Expression arg) {
    if (op != Op::Neg && !is_function(op)) throw Error("Expression::unary: not a unary operator");
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(arg);
    return Expression(std::move(n));
}

Expression Expression::power(Expression base, int exponent) {
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->a = std::move(base);
    n->index = exponent;
    return Expression(std::move(n));
}

Op Expression::op() const noexcept { return node_->op; }
double Expression::value() const noexcept { return node_->value; }
const std::string& Expression::name() const noexcept { return node_->name; }
int Expression::index() const noexcept { return node_->index; }
const Expression& Expression::lhs() const noexcept { return node_->a; }
const Expression& Expression::rhs() const noexcept { return node_->b; }
const Expression& Expression::arg() const noexcept { return node_->a; }

bool Expression::is_constant(double v) const noexcept {
    return node_->op == Op::Const && node_->value == v;
}

bool Expression::operator==(const Expression& other) const {
    if (node_ == other.node_) return true;
    const Node& x = *node_;
    const Node& y = *other.node_;
    if (x.op != y.op) return false;
    switch (x.op) {
    case Op::Const: return x.value == y.value;
    case Op::Param: return x.name == y.name;
    case Op::Time: return true;
    case Op::State: return x.index == y.index;
    case Op::Pow: return x.index == y.index && x.a == y.a;
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp: return x.a == y.a;
    default: return x.a == y.a && x.b == y.b;
    }
}

std::string Expression::to_string() const { return unparse(*this); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expression parse() {
        Expression e = expr();
        skip_ws();
        if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, static_cast<int>(pos_) + 1);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expression expr() {
        Expression lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = Expression::binary(Op::Add, lhs, term());
            else if (accept('-'))
                lhs = Expression::binary(Op::Sub, lhs, term());
            else
                return lhs;
        }
    }

    Expression term() {
        Expression lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = Expression::binary(Op::Mul, lhs, unary());
            else if (accept('/'))
                lhs = Expression::binary(Op::Div, lhs, unary());
            else
                return lhs;
        }
    }

    Expression unary() {
        if (accept('-')) return Expression::unary(Op::Neg, unary());
        return power();
    }

    Expression power() {
        Expression base = primary();
        if (!accept('^')) return base;
        const bool paren = accept('(');
        const int k = integer_literal();
        if (paren && !accept(')')) fail("expected ')'");
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '^')
            fail("chained powers need parentheses");
        return Expression::power(base, k);
    }

    int integer_literal() {
        skip_ws();
        const size_t start = pos_;
        bool neg = false;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
            neg = text_[pos_] == '-';
            ++pos_;
        }
        const size_t digits = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == digits) {
            pos_ = start;
            fail("exponent must be a constant integer");
        }
        if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
            pos_ = start;
            fail("exponent must be a constant integer");
        }
        int k = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + digits, text_.data() + pos_, k);
        if (ec != std::errc()) {
            pos_ = start;
            fail("exponent out of range");
        }
        return neg ? -k : k;
    }

    Expression primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expression e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return symbol();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Expression number() {
        const size_t start = pos_;
        auto digits = [&] {
            size_t d = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            return pos_ - d;
        };
        size_t count = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            count += digits();
        }
        if (count == 0) {
            pos_ = start;
            fail("malformed number");
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            const size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (digits() == 0) {
                pos_ = save;
                fail("malformed exponent in number");
            }
        }
        const std::string literal(text_.substr(start, pos_ - start));
        char* end = nullptr;
        const double v = std::strtod(literal.c_str(), &end);
        if (!std::isfinite(v)) {
            pos_ = start;
            fail("number out of range");
        }
        return Expression::constant(v);
    }

    Expression symbol() {
        const size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string id(text_.substr(start, pos_ - start));

        if (id == "sin" || id == "cos" || id == "exp") {
            const Op op = id == "sin" ? Op::Sin : id == "cos" ? Op::Cos : Op::Exp;
            if (!accept('(')) fail("expected '(' after " + id);
            Expression a = expr();
            if (!accept(')')) fail("expected ')'");
            return Expression::unary(op, a);
        }
        if (id == "t") return Expression::time();
        if (id == "pi") return Expression::constant(std::numbers::pi);
        if (id.size() > 1 && id[0] == 'x' &&
            std::all_of(id.begin() + 1, id.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            int idx = 0;
            auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), idx);
            if (ec != std::errc() || idx < 1) {
                pos_ = start;
                fail("state index must be >= 1");
            }
            return Expression::state(idx);
        }
        return Expression::param(id);
    }

    std::string_view text_;
    size_t pos_ = 0;
};

} // namespace

Expression parse_expression(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Unparsing

namespace {

int precedence(const Expression& e) {
    switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return e.value() < 0 || std::signbit(e.value()) ? 3 : 5;
    default: return 5;
    }
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Prefer the shortest representation that round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

void write(const Expression& e, std::string& out);

void write_child(const Expression& child, bool parens, std::string& out) {
    if (parens) out += '(';
    write(child, out);
    if (parens) out += ')';
}

void write(const Expression& e, std::string& out) {
    switch (e.op()) {
    case Op::Const: {
        const double v = e.value();
        if (std::signbit(v)) {
            out += '-';
            out += format_number(-v);
        } else {
            out += format_number(v);
        }
        return;
    }
    case Op::Param: out += e.name(); return;
    case Op::Time: out += 't'; return;
    case Op::State:
        out += 'x';
        out += std::to_string(e.index());
        return;
    case Op::Neg:
        out += '-';
        write_child(e.arg(), precedence(e.arg()) < 3, out);
        return;
    case Op::Pow:
        write_child(e.lhs(), precedence(e.lhs()) <= 4, out);
        out += '^';
        out += std::to_string(e.index());
        return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
        out += function_name(e.op());
        out += '(';
        write(e.arg(), out);
        out += ')';
        return;
    default: {
        const int p = precedence(e);
        write_child(e.lhs(), precedence(e.lhs()) < p, out);
        switch (e.op()) {
        case Op::Add: out += " + "; break;
        case Op::Sub: out += " - "; break;
        case Op::Mul: out += '*'; break;
        default: out += '/'; break;
        }
        write_child(e.rhs(), precedence(e.rhs()) <= p, out);
        return;
    }
    }
}

} // namespace

std::string unparse(const Expression& e) {
    std::string out;
    write(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Folding and differentiation

namespace {

bool is_const(const Expression& e) { return e.op() == Op::Const; }

std::optional<Expression> folded(double v) {
    if (!std::isfinite(v)) return std::nullopt;
    return Expression::constant(v);
}

} // namespace

Expression fold_add(const Expression& a, const Expression& b) {
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    if (is_const(a) && is_const(b))
        if (auto c = folded(a.value() + b.value())) return *c;
    if (b.op() == Op::Neg) return fold_sub(a, b.arg());
    return Expression::binary(Op::Add, a, b);
}

Expression fold_sub(const Expression& a, const Expression& b) {
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return fold_neg(b);
    if (is_const(a) && is_const(b))
        if (auto c = folded(a.value() - b.value())) return *c;
    return Expression::binary(Op::Sub, a, b);
}

Expression fold_mul(const Expression& a, const Expression& b) {
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expression::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(-1.0)) return fold_neg(b);
    if (b.is_constant(-1.0)) return fold_neg(a);
    if (is_const(a) && is_const(b))
        if (auto c = folded(a.value() * b.value())) return *c;
    return Expression::binary(Op::Mul, a, b);
}

Expression fold_div(const Expression& a, const Expression& b) {
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expression::constant(0.0);
    if (is_const(a) && is_const(b) && b.value() != 0.0)
        if (auto c = folded(a.value() / b.value())) return *c;
    return Expression::binary(Op::Div, a, b);
}

Expression fold_neg(const Expression& a) {
    if (is_const(a)) return Expression::constant(a.value() == 0.0 ? 0.0 : -a.value());
    if (a.op() == Op::Neg) return a.arg();
    // -(u*v) becomes (-u)*v, which prints as "-a2*x1".
    if (a.op() == Op::Mul) return fold_mul(fold_neg(a.lhs()), a.rhs());
    return Expression::unary(Op::Neg, a);
}

Expression fold_pow(const Expression& a, int k) {
    if (k == 0) return Expression::constant(1.0);
    if (k == 1) return a;
    if (is_const(a))
        if (auto c = folded(std::pow(a.value(), k))) return *c;
    return Expression::power(a, k);
}

Expression fold_func(Op op, const Expression& a) {
    if (is_const(a)) {
        const double v = op == Op::Sin ? std::sin(a.value()) : op == Op::Cos ? std::cos(a.value()) : std::exp(a.value());
        if (auto c = folded(v)) return *c;
    }
    return Expression::unary(op, a);
}

Expression differentiate(const Expression& e, Variable var) {
    switch (e.op()) {
    case Op::Const:
    case Op::Param: return Expression::constant(0.0);
    case Op::Time: return Expression::constant(var.kind == Variable::Kind::Time ? 1.0 : 0.0);
    case Op::State:
        return Expression::constant(var.kind == Variable::Kind::State && var.index == e.index() ? 1.0 : 0.0);
    case Op::Add: return fold_add(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
    case Op::Sub: return fold_sub(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
    case Op::Mul: {
        const Expression da = differentiate(e.lhs(), var);
        const Expression db = differentiate(e.rhs(), var);
        return fold_add(fold_mul(da, e.rhs()), fold_mul(e.lhs(), db));
    }
    case Op::Div: {
        const Expression da = differentiate(e.lhs(), var);
        const Expression db = differentiate(e.rhs(), var);
        if (db.is_constant(0.0)) return fold_div(da, e.rhs());
        return fold_div(fold_sub(fold_mul(da, e.rhs()), fold_mul(e.lhs(), db)), fold_pow(e.rhs(), 2));
    }
    case Op::Neg: return fold_neg(differentiate(e.arg(), var));
    case Op::Pow: {
        const int k = e.index();
        const Expression du = differentiate(e.lhs(), var);
        if (k == 0 || du.is_constant(0.0)) return Expression::constant(0.0);
        return fold_mul(fold_mul(Expression::constant(k), fold_pow(e.lhs(), k - 1)), du);
    }
    case Op::Sin:
        return fold_mul(fold_func(Op::Cos, e.arg()), differentiate(e.arg(), var));
    case Op::Cos:
        return fold_mul(fold_neg(fold_func(Op::Sin, e.arg())), differentiate(e.arg(), var));
    case Op::Exp: return fold_mul(fold_func(Op::Exp, e.arg()), differentiate(e.arg(), var));
    }
    return Expression::constant(0.0);
}

Expression substitute_states(const Expression& e, std::span<const Expression> replacements) {
    switch (e.op()) {
    case Op::Const:
    case Op::Param:
    case Op::Time: return e;
    case Op::State: {
        const auto i = static_cast<size_t>(e.index());
        if (i > replacements.size()) throw BindError("substitution missing for x" + std::to_string(i));
        return replacements[i - 1];
    }
    case Op::Pow: return Expression::power(substitute_states(e.lhs(), replacements), e.index());
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp: return Expression::unary(e.op(), substitute_states(e.arg(), replacements));
    default:
        return Expression::binary(e.op(), substitute_states(e.lhs(), replacements),
                                  substitute_states(e.rhs(), replacements));
    }
}

namespace {

template <typename Visit>
void walk(const Expression& e, Visit&& visit) {
    visit(e);
    switch (e.op()) {
    case Op::Const:
    case Op::Param:
    case Op::Time:
    case Op::State: return;
    case Op::Pow:
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp: walk(e.arg(), visit); return;
    default:
        walk(e.lhs(), visit);
        walk(e.rhs(), visit);
    }
}

} // namespace

int max_state_index(const Expression& e) {
    int m = 0;
    walk(e, [&](const Expression& s) {
        if (s.op() == Op::State) m = std::max(m, s.index());
    });
    return m;
}

std::vector<int> state_indices(const Expression& e) {
    std::set<int> s;
    walk(e, [&](const Expression& x) {
        if (x.op() == Op::State) s.insert(x.index());
    });
    return {s.begin(), s.end()};
}

std::vector<std::string> param_names(const Expression& e) {
    std::set<std::string> s;
    walk(e, [&](const Expression& x) {
        if (x.op() == Op::Param) s.insert(x.name());
    });
    return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct Emitter {
    const ParamTable& params;
    int n;
    int depth = 0;
    int max_depth = 0;

    template <typename Code>
    void emit(const Expression& e, Code& code) {
        switch (e.op()) {
        case Op::Const: push(code, {Op::Const, e.value(), 0}); return;
        case Op::Param: {
            auto it = params.find(e.name());
            if (it == params.end()) throw BindError("unbound parameter '" + e.name() + "'");
            push(code, {Op::Const, it->second, 0});
            return;
        }
        case Op::Time: push(code, {Op::Time, 0.0, 0}); return;
        case Op::State:
            if (e.index() > n)
                throw BindError("state x" + std::to_string(e.index()) + " exceeds model dimension " +
                                std::to_string(n));
            push(code, {Op::State, 0.0, e.index() - 1});
            return;
        case Op::Pow:
            emit(e.lhs(), code);
            code.push_back({Op::Pow, 0.0, e.index()});
            return;
        case Op::Neg:
        case Op::Sin:
        case Op::Cos:
        case Op::Exp:
            emit(e.arg(), code);
            code.push_back({e.op(), 0.0, 0});
            return;
        default:
            emit(e.lhs(), code);
            emit(e.rhs(), code);
            code.push_back({e.op(), 0.0, 0});
            --depth;
        }
    }

    template <typename Code>
    void push(Code& code, typename Code::value_type in) {
        code.push_back(in);
        max_depth = std::max(max_depth, ++depth);
    }
};

[[noreturn]] void non_finite(const char* what) {
    throw EvalError(std::string("non-finite intermediate in ") + what);
}

} // namespace

Program::Program(const Expression& e, const ParamTable& params, int n) {
    Emitter em{params, n};
    em.emit(e, code_);
    depth_ = em.max_depth;
    // Constant-fold programs without time or state dependence.
    const bool constant = std::all_of(code_.begin(), code_.end(), [](const Instr& in) {
        return in.op != Op::Time && in.op != Op::State;
    });
    if (constant && code_.size() > 1) {
        const double v = run(0.0, {});
        code_ = {{Op::Const, v, 0}};
        depth_ = 1;
    }
}

double Program::run(double t, std::span<const double> x) const {
    constexpr int kInline = 64;
    std::array<double, kInline> inline_stack{};
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (depth_ > kInline) {
        heap_stack.resize(static_cast<size_t>(depth_));
        stack = heap_stack.data();
    }
    int sp = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
        case Op::Const: stack[sp++] = in.value; break;
        case Op::Time: stack[sp++] = t; break;
        case Op::State: stack[sp++] = x[static_cast<size_t>(in.index)]; break;
        case Op::Add:
            --sp;
            stack[sp - 1] += stack[sp];
            if (!std::isfinite(stack[sp - 1])) non_finite("addition");
            break;
        case Op::Sub:
            --sp;
            stack[sp - 1] -= stack[sp];
            if (!std::isfinite(stack[sp - 1])) non_finite("subtraction");
            break;
        case Op::Mul:
            --sp;
            stack[sp - 1] *= stack[sp];
            if (!std::isfinite(stack[sp - 1])) non_finite("multiplication");
            break;
        case Op::Div:
            --sp;
            if (stack[sp] == 0.0) throw EvalError("division by zero");
            stack[sp - 1] /= stack[sp];
            if (!std::isfinite(stack[sp - 1])) non_finite("division");
            break;
        case Op::Neg: stack[sp - 1] = -stack[sp - 1]; break;
        case Op::Pow: {
            const double b = stack[sp - 1];
            if (b == 0.0 && in.index < 0) throw EvalError("division by zero in negative power");
            stack[sp - 1] = std::pow(b, in.index);
            if (!std::isfinite(stack[sp - 1])) non_finite("power");
            break;
        }
        case Op::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
        case Op::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
        case Op::Exp:
            stack[sp - 1] = std::exp(stack[sp - 1]);
            if (!std::isfinite(stack[sp - 1])) non_finite("exp");
            break;
        case Op::Param: break;  // resolved at compile time
        }
    }
    return stack[0];
}

double evaluate(const Expression& e, double t, std::span<const double> x, const ParamTable& params) {
    return Program(e, params, static_cast<int>(x.size())).run(t, x);
}

} // namespace cyclofeed
