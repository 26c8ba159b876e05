#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ccshap {

/// Arithmetic over literals, variable references and the noise term `U`.
///
/// Grammar: binary + - * /, unary minus, parentheses and the functions
/// square, exp, log and sigmoid. Evaluation raises DomainError for log of a
/// non-positive value, division by zero or a non-finite result.
class Expression {
public:
    Expression() = default;

    static Expression parse(std::string_view text);
    static Expression constant(double value);

    /// Referenced variables in order of first appearance (excluding `U`).
    const std::vector<std::string>& variables() const noexcept { return variables_; }
    bool uses_noise() const noexcept { return uses_noise_; }
    const std::string& text() const noexcept { return text_; }

    /// `values` is aligned with variables().
    double evaluate(std::span<const double> values, double noise = 0.0) const;

    /// Name reserved for the node's own noise term.
    static constexpr std::string_view kNoiseName = "U";

private:
    enum class Op { Literal, Variable, Noise, Add, Sub, Mul, Div, Neg, Square, Exp, Log, Sigmoid };
    struct Instr {
        Op op;
        double value = 0.0;
        std::size_t slot = 0;
    };
    friend class ExpressionParser;

    std::string text_;
    std::vector<Instr> program_;  // postfix
    std::vector<std::string> variables_;
    bool uses_noise_ = false;
};

double sigmoid(double x);

} // namespace ccshap
