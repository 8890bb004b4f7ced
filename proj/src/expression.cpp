#include "nlmc/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "nlmc/errors.hpp"

namespace nlmc {

namespace {

using Node = std::function<double(double, double)>;

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Node parse() {
        Node n = expr();
        skip_space();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("kernel expression: " + msg + " at column " + std::to_string(pos_ + 1),
                          "expression");
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

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Node expr() {
        Node lhs = term();
        while (true) {
            if (accept('+')) {
                lhs = [a = lhs, b = term()](double x, double y) { return a(x, y) + b(x, y); };
            } else if (accept('-')) {
                lhs = [a = lhs, b = term()](double x, double y) { return a(x, y) - b(x, y); };
            } else {
                return lhs;
            }
        }
    }

    Node term() {
        Node lhs = unary();
        while (true) {
            if (accept('*')) {
                lhs = [a = lhs, b = unary()](double x, double y) { return a(x, y) * b(x, y); };
            } else if (accept('/')) {
                lhs = [a = lhs, b = unary()](double x, double y) { return a(x, y) / b(x, y); };
            } else {
                return lhs;
            }
        }
    }

    Node unary() {
        if (accept('-')) {
            return [a = unary()](double x, double y) { return -a(x, y); };
        }
        return power();
    }

    Node power() {
        Node base = primary();
        if (accept('^')) {
            return [a = base, b = unary()](double x, double y) { return std::pow(a(x, y), b(x, y)); };
        }
        return base;
    }

    Node primary() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (accept('(')) {
            Node inner = expr();
            expect(')');
            return inner;
        }
        if (accept('|')) {
            Node inner = expr();
            expect('|');
            return [a = inner](double x, double y) { return std::abs(a(x, y)); };
        }
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    Node number() {
        const std::string rest(src_.substr(pos_));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(rest, &used);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ += used;
        return [v](double, double) { return v; };
    }

    Node identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::string name(src_.substr(start, pos_ - start));
        if (name == "x") return [](double x, double) { return x; };
        if (name == "y") return [](double, double y) { return y; };
        if (name == "dist") return [](double x, double y) { return std::abs(x - y); };
        if (name == "pi") return [](double, double) { return std::numbers::pi; };

        static constexpr std::string_view kFunctions[] = {"abs", "sin",  "cos", "exp", "log",
                                                          "sqrt", "step", "min", "max"};
        if (std::find(std::begin(kFunctions), std::end(kFunctions), name) == std::end(kFunctions)) {
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        expect('(');
        std::vector<Node> args{expr()};
        while (accept(',')) args.push_back(expr());
        expect(')');

        auto unary_fn = [&](double (*fn)(double)) -> Node {
            if (args.size() != 1) fail(name + " takes one argument");
            return [fn, a = args[0]](double x, double y) { return fn(a(x, y)); };
        };
        if (name == "abs") return unary_fn([](double t) { return std::abs(t); });
        if (name == "sin") return unary_fn([](double t) { return std::sin(t); });
        if (name == "cos") return unary_fn([](double t) { return std::cos(t); });
        if (name == "exp") return unary_fn([](double t) { return std::exp(t); });
        if (name == "log") return unary_fn([](double t) { return std::log(t); });
        if (name == "sqrt") return unary_fn([](double t) { return std::sqrt(t); });
        if (name == "step") return unary_fn([](double t) { return t >= 0.0 ? 1.0 : 0.0; });
        if (name == "min" || name == "max") {
            if (args.size() != 2) fail(name + " takes two arguments");
            if (name == "min") {
                return [a = args[0], b = args[1]](double x, double y) { return std::min(a(x, y), b(x, y)); };
            }
            return [a = args[0], b = args[1]](double x, double y) { return std::max(a(x, y), b(x, y)); };
        }
        fail("unknown function '" + name + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace

KernelExpression compile_kernel_expression(std::string_view source) {
    return Parser(source).parse();
}

}  // namespace nlmc
