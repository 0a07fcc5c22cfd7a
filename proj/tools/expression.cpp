#include "expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace pathctl::cli {

struct Expression::Node {
    enum class Kind { number, time, action, coordinate, neg, add, sub, mul, div, pow, call } kind;
    double value = 0.0;     // number
    std::size_t index = 0;  // coordinate (0-based)
    double (*unary)(double) = nullptr;
    bool is_min = false;  // call with several arguments: min or max
    std::vector<std::shared_ptr<const Node>> args;

    double eval(double t, const Vector& y, double a) const {
        switch (kind) {
            case Kind::number: return value;
            case Kind::time: return t;
            case Kind::action: return a;
            case Kind::coordinate: return y(static_cast<Eigen::Index>(index));
            case Kind::neg: return -args[0]->eval(t, y, a);
            case Kind::add: return args[0]->eval(t, y, a) + args[1]->eval(t, y, a);
            case Kind::sub: return args[0]->eval(t, y, a) - args[1]->eval(t, y, a);
            case Kind::mul: return args[0]->eval(t, y, a) * args[1]->eval(t, y, a);
            case Kind::div: return args[0]->eval(t, y, a) / args[1]->eval(t, y, a);
            case Kind::pow: return std::pow(args[0]->eval(t, y, a), args[1]->eval(t, y, a));
            case Kind::call:
                if (unary) return unary(args[0]->eval(t, y, a));
                double acc = args[0]->eval(t, y, a);
                for (std::size_t i = 1; i < args.size(); ++i) {
                    const double v = args[i]->eval(t, y, a);
                    acc = is_min ? std::min(acc, v) : std::max(acc, v);
                }
                return acc;
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->args = std::move(args);
    return n;
}

double f_sin(double x) { return std::sin(x); }
double f_cos(double x) { return std::cos(x); }
double f_exp(double x) { return std::exp(x); }
double f_log(double x) { return std::log(x); }
double f_sqrt(double x) { return std::sqrt(x); }
double f_tanh(double x) { return std::tanh(x); }
double f_abs(double x) { return std::abs(x); }

class Parser {
public:
    Parser(const std::string& s, std::size_t max_coordinate) : s_(s), max_(max_coordinate) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ExpressionError(msg, pos_ + 1); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+'))
                lhs = make(Kind::add, {lhs, term()});
            else if (eat('-'))
                lhs = make(Kind::sub, {lhs, term()});
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*'))
                lhs = make(Kind::mul, {lhs, unary()});
            else if (eat('/'))
                lhs = make(Kind::div, {lhs, unary()});
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (eat('-')) return make(Kind::neg, {unary()});
        if (eat('+')) return unary();
        return power();
    }

    // right-associative; -2^2 = -(2^2) because unary binds looser
    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return make(Kind::pow, {base, unary()});
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return name();
        if (eat('(')) {
            NodePtr n = expr();
            if (!eat(')')) fail("expected ')'");
            return n;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::number;
        n->value = v;
        return n;
    }

    NodePtr name() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string id = s_.substr(start, pos_ - start);
        const auto at_start = [&](const std::string& msg) {
            pos_ = start;
            fail(msg);
        };
        if (id == "t") return make(Kind::time);
        if (id == "a") return make(Kind::action);
        if (id == "pi") {
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::number;
            n->value = std::numbers::pi;
            return n;
        }
        if (id.size() > 1 && id[0] == 'y' &&
            id.find_first_not_of("0123456789", 1) == std::string::npos) {
            const auto k = static_cast<std::size_t>(std::stoul(id.substr(1)));
            if (k == 0 || k > max_) at_start("coordinate " + id + " out of range (y1..y" + std::to_string(max_) + ")");
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::coordinate;
            n->index = k - 1;
            return n;
        }
        static const std::pair<const char*, double (*)(double)> unary_fns[] = {
            {"sin", f_sin}, {"cos", f_cos}, {"exp", f_exp}, {"log", f_log},
            {"sqrt", f_sqrt}, {"tanh", f_tanh}, {"abs", f_abs}};
        double (*fn)(double) = nullptr;
        for (const auto& [n, f] : unary_fns)
            if (id == n) fn = f;
        const bool extremum = id == "min" || id == "max";
        if (!fn && !extremum) at_start("unknown name '" + id + "'");
        if (!eat('(')) fail("expected '(' after " + id);
        auto call = std::make_shared<Expression::Node>();
        call->kind = Kind::call;
        call->unary = fn;
        call->is_min = id == "min";
        call->args.push_back(expr());
        while (eat(',')) call->args.push_back(expr());
        if (!eat(')')) fail("expected ')' to close " + id);
        if (fn && call->args.size() != 1) at_start(id + " takes one argument");
        if (extremum && call->args.size() < 2) at_start(id + " takes at least two arguments");
        return call;
    }

    const std::string& s_;
    std::size_t max_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, std::size_t max_coordinate) {
    Expression e;
    e.text_ = text;
    e.root_ = Parser(text, max_coordinate).parse();
    return e;
}

double Expression::operator()(double t, const Vector& y, double a) const { return root_->eval(t, y, a); }

}  // namespace pathctl::cli
