#include "agentkernel/calculator.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "agentkernel/error.hpp"

namespace agentkernel {

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    double parse() {
        double v = expr();
        skip();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ValidationError("invalid expression at offset " + std::to_string(pos_) + ": " + why);
    }

    void skip() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    double expr() {
        double v = term();
        while (true) {
            if (eat('+')) v += term();
            else if (eat('-')) v -= term();
            else return v;
        }
    }

    double term() {
        double v = power();
        while (true) {
            if (eat('*')) {
                v *= power();
            } else if (eat('/')) {
                double d = power();
                if (d == 0.0) fail("division by zero");
                v /= d;
            } else if (eat('%')) {
                double d = power();
                if (d == 0.0) fail("division by zero");
                v = std::fmod(v, d);
            } else {
                return v;
            }
        }
    }

    double power() {
        double base = unary();
        if (eat('^')) return std::pow(base, power());
        return base;
    }

    double unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return primary();
    }

    double primary() {
        skip();
        if (eat('(')) {
            double v = expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        if (src_.substr(pos_).starts_with("sqrt")) {
            pos_ += 4;
            if (!eat('(')) fail("expected '(' after sqrt");
            double v = expr();
            if (!eat(')')) fail("missing ')'");
            if (v < 0) fail("sqrt of a negative number");
            return std::sqrt(v);
        }
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
            ++pos_;
        }
        if (start == pos_) fail(pos_ < src_.size() ? "unexpected '" + std::string(1, src_[pos_]) + "'"
                                                   : "unexpected end of input");
        std::string number(src_.substr(start, pos_ - start));
        char* end = nullptr;
        double v = std::strtod(number.c_str(), &end);
        if (end != number.c_str() + number.size()) fail("malformed number '" + number + "'");
        return v;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace

double evaluate_expression(std::string_view expr) { return Parser(expr).parse(); }

std::string format_number(double value) {
    if (std::isfinite(value) && std::fabs(value) < 1e15 && value == std::floor(value)) {
        return std::to_string(static_cast<long long>(value));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

} // namespace agentkernel
