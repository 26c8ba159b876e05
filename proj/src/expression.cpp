#include "ccshap/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ccshap/errors.hpp"
#include "ccshap/util.hpp"

namespace ccshap {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view text) : src_(text) {}

    Expression run() {
        out_.text_ = std::string(trim(src_));
        parse_sum();
        skip_space();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        if (out_.program_.empty()) fail("empty expression");
        return std::move(out_);
    }

private:
    using Op = Expression::Op;

    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("expression '" + std::string(src_) + "' at column " + std::to_string(pos_ + 1) + ": " + why);
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void emit(Op op, double value = 0.0, std::size_t slot = 0) { out_.program_.push_back({op, value, slot}); }

    void parse_sum() {
        parse_product();
        for (;;) {
            if (accept('+')) {
                parse_product();
                emit(Op::Add);
            } else if (accept('-')) {
                parse_product();
                emit(Op::Sub);
            } else {
                return;
            }
        }
    }

    void parse_product() {
        parse_unary();
        for (;;) {
            if (accept('*')) {
                parse_unary();
                emit(Op::Mul);
            } else if (accept('/')) {
                parse_unary();
                emit(Op::Div);
            } else {
                return;
            }
        }
    }

    void parse_unary() {
        if (accept('-')) {
            parse_unary();
            emit(Op::Neg);
            return;
        }
        if (accept('+')) {
            parse_unary();
            return;
        }
        parse_primary();
    }

    void parse_primary() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (accept('(')) {
            parse_sum();
            if (!accept(')')) fail("expected ')'");
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const auto start = pos_;
            while (pos_ < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' || src_[pos_] == 'e' ||
                    src_[pos_] == 'E' ||
                    ((src_[pos_] == '-' || src_[pos_] == '+') && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E'))))
                ++pos_;
            emit(Op::Literal, parse_double(src_.substr(start, pos_ - start), "expression literal"));
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const auto start = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string name(src_.substr(start, pos_ - start));
            if (accept('(')) {
                Op op;
                if (name == "square")
                    op = Op::Square;
                else if (name == "exp")
                    op = Op::Exp;
                else if (name == "log")
                    op = Op::Log;
                else if (name == "sigmoid")
                    op = Op::Sigmoid;
                else
                    fail("unknown function '" + name + "'");
                parse_sum();
                if (!accept(')')) fail("expected ')' after argument of " + name);
                emit(op);
                return;
            }
            if (name == Expression::kNoiseName) {
                out_.uses_noise_ = true;
                emit(Op::Noise);
                return;
            }
            auto& vars = out_.variables_;
            auto it = std::find(vars.begin(), vars.end(), name);
            const auto slot = static_cast<std::size_t>(it - vars.begin());
            if (it == vars.end()) vars.push_back(name);
            emit(Op::Variable, 0.0, slot);
            return;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Expression out_;
};

Expression Expression::parse(std::string_view text) { return ExpressionParser(text).run(); }

Expression Expression::constant(double value) {
    Expression e;
    e.text_ = format_double(value);
    e.program_.push_back({Op::Literal, value, 0});
    return e;
}

double Expression::evaluate(std::span<const double> values, double noise) const {
    double stack[64];
    std::size_t top = 0;
    auto domain = [this](const std::string& why) { throw DomainError(why + " in '" + text_ + "'"); };
    for (const auto& in : program_) {
        if (top >= 63) domain("expression too deeply nested");
        switch (in.op) {
        case Op::Literal: stack[top++] = in.value; break;
        case Op::Variable: stack[top++] = values[in.slot]; break;
        case Op::Noise: stack[top++] = noise; break;
        case Op::Add: --top; stack[top - 1] += stack[top]; break;
        case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
        case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
        case Op::Div:
            --top;
            if (stack[top] == 0.0) domain("division by zero");
            stack[top - 1] /= stack[top];
            break;
        case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
        case Op::Square: stack[top - 1] *= stack[top - 1]; break;
        case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
        case Op::Log:
            if (!(stack[top - 1] > 0.0)) domain("log of non-positive value " + format_double(stack[top - 1]));
            stack[top - 1] = std::log(stack[top - 1]);
            break;
        case Op::Sigmoid: stack[top - 1] = sigmoid(stack[top - 1]); break;
        }
    }
    const double result = stack[0];
    if (!std::isfinite(result)) domain("non-finite result");
    return result;
}

} // namespace ccshap
