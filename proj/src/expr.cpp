#include "condaj/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include "condaj/error.hpp"
#include "condaj/io.hpp"

namespace condaj {

struct Expression::Node {
    enum class Kind { number, time, duration, covariate, neg, add, sub, mul, div, pow, call } kind;
    double value = 0.0;
    std::size_t index = 0;  // covariate index (0-based)
    std::string fn;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

    bool uses_time = false, uses_duration = false;
    std::size_t max_covariate = 0;

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("rate expression '" + s_ + "' at " + std::to_string(pos_) + ": " + what);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    static NodePtr make(Node::Kind k, std::vector<NodePtr> args = {}) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->args = std::move(args);
        return n;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Node::Kind::add, {lhs, term()});
            else if (accept('-')) lhs = make(Node::Kind::sub, {lhs, term()});
            else return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Node::Kind::mul, {lhs, unary()});
            else if (accept('/')) lhs = make(Node::Kind::div, {lhs, unary()});
            else return lhs;
        }
    }
    NodePtr unary() {
        if (accept('-')) return make(Node::Kind::neg, {unary()});
        if (accept('+')) return unary();
        NodePtr base = primary();
        if (accept('^')) return make(Node::Kind::pow, {base, unary()});
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
            if (ec != std::errc()) fail("bad number");
            pos_ = static_cast<std::size_t>(ptr - s_.data());
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::number;
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            if (accept('(')) return call(id);
            return variable(id);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
    NodePtr call(const std::string& fn) {
        std::vector<NodePtr> args;
        if (!accept(')')) {
            do args.push_back(expr());
            while (accept(','));
            if (!accept(')')) fail("expected ')' after arguments");
        }
        const bool unary_fn = fn == "exp" || fn == "log" || fn == "sqrt" || fn == "abs";
        const bool binary_fn = fn == "min" || fn == "max" || fn == "pow";
        if (!unary_fn && !binary_fn) fail("unknown function '" + fn + "'");
        if (args.size() != (unary_fn ? 1u : 2u)) fail("wrong number of arguments to " + fn);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::call;
        n->fn = fn;
        n->args = std::move(args);
        return n;
    }
    NodePtr variable(const std::string& id) {
        auto n = std::make_shared<Node>();
        if (id == "t") {
            n->kind = Node::Kind::time;
            uses_time = true;
        } else if (id == "duration") {
            n->kind = Node::Kind::duration;
            uses_duration = true;
        } else if (id == "x") {
            n->kind = Node::Kind::covariate;
            n->index = 0;
        } else if (id.size() > 1 && id[0] == 'x' &&
                   id.find_first_not_of("0123456789", 1) == std::string::npos && id[1] != '0') {
            n->kind = Node::Kind::covariate;
            n->index = std::stoul(id.substr(1)) - 1;
        } else {
            fail("unknown variable '" + id + "'");
        }
        if (n->kind == Node::Kind::covariate) max_covariate = std::max(max_covariate, n->index + 1);
        return n;
    }

    std::string s_;
    std::size_t pos_ = 0;
};

double eval_node(const Node& n, const ExprVars& v) {
    using K = Node::Kind;
    switch (n.kind) {
        case K::number: return n.value;
        case K::time: return v.t;
        case K::duration: return v.duration;
        case K::covariate:
            if (n.index >= v.x.size())
                throw std::out_of_range("rate expression uses x" + std::to_string(n.index + 1) +
                                        " but covariates have dimension " + std::to_string(v.x.size()));
            return v.x[n.index];
        case K::neg: return -eval_node(*n.args[0], v);
        case K::add: return eval_node(*n.args[0], v) + eval_node(*n.args[1], v);
        case K::sub: return eval_node(*n.args[0], v) - eval_node(*n.args[1], v);
        case K::mul: return eval_node(*n.args[0], v) * eval_node(*n.args[1], v);
        case K::div: return eval_node(*n.args[0], v) / eval_node(*n.args[1], v);
        case K::pow: return std::pow(eval_node(*n.args[0], v), eval_node(*n.args[1], v));
        case K::call: {
            const double a = eval_node(*n.args[0], v);
            if (n.fn == "exp") return std::exp(a);
            if (n.fn == "log") return std::log(a);
            if (n.fn == "sqrt") return std::sqrt(a);
            if (n.fn == "abs") return std::abs(a);
            const double b = eval_node(*n.args[1], v);
            if (n.fn == "min") return std::min(a, b);
            if (n.fn == "max") return std::max(a, b);
            return std::pow(a, b);
        }
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.parse();
    e.text_ = text;
    e.uses_time_ = p.uses_time;
    e.uses_duration_ = p.uses_duration;
    e.max_covariate_ = p.max_covariate;
    return e;
}

Expression Expression::constant(double value) {
    Expression e;
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::number;
    n->value = value;
    e.root_ = n;
    e.text_ = format_number(value);
    return e;
}

double Expression::eval(const ExprVars& vars) const {
    if (!root_) return 0.0;
    return eval_node(*root_, vars);
}

}  // namespace condaj
