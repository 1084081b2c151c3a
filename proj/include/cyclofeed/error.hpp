#pragma once

#include <stdexcept>
#include <string>

namespace cyclofeed {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension below the minimum (n < 3) or mismatched vector/matrix sizes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a function (zero components for sigma, x not in Lambda, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Lexing or parsing failure. `column` is 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int column)
        : Error(what + " at column " + std::to_string(column)), column_(column) {}
    int column() const noexcept { return column_; }

private:
    int column_;
};

/// Symbol that cannot be resolved against the model's parameter table or dimension.
class BindError : public Error {
public:
    using Error::Error;
};

/// Division by zero or a non-finite intermediate during expression evaluation.
class EvalError : public Error {
public:
    using Error::Error;
};

/// Malformed model file.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Integration produced a non-finite state or exceeded the blow-up bound.
class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class StepUnderflowError : public Error {
public:
    StepUnderflowError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// No conclusive sample was found for the sign of some d f_i / d x_{i-1}.
class IndeterminateSignError : public Error {
public:
    IndeterminateSignError(const std::string& what, int index) : Error(what), index_(index) {}
    /// 1-based equation index whose feedback sign could not be determined.
    int index() const noexcept { return index_; }

private:
    int index_;
};

/// Operation refused because the structural hypotheses it relies on do not hold.
class HypothesisError : public Error {
public:
    using Error::Error;
};

} // namespace cyclofeed
