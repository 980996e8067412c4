#include "nlo/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "nlo/errors.hpp"

namespace nlo {

struct Expression::Node {
    enum class Op { literal, coord_x, coord_y, add, sub, mul, div, pow, neg, abs, min, max };
    Op op = Op::literal;
    double value = 0.0;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(const Point& p) const {
        switch (op) {
            case Op::literal: return value;
            case Op::coord_x: return p[0];
            case Op::coord_y: return p[1];
            case Op::add: return args[0]->eval(p) + args[1]->eval(p);
            case Op::sub: return args[0]->eval(p) - args[1]->eval(p);
            case Op::mul: return args[0]->eval(p) * args[1]->eval(p);
            case Op::div: return args[0]->eval(p) / args[1]->eval(p);
            case Op::pow: return std::pow(args[0]->eval(p), args[1]->eval(p));
            case Op::neg: return -args[0]->eval(p);
            case Op::abs: return std::abs(args[0]->eval(p));
            case Op::min: {
                double m = args[0]->eval(p);
                for (std::size_t i = 1; i < args.size(); ++i) m = std::min(m, args[i]->eval(p));
                return m;
            }
            case Op::max: {
                double m = args[0]->eval(p);
                for (std::size_t i = 1; i < args.size(); ++i) m = std::max(m, args[i]->eval(p));
                return m;
            }
        }
        return 0.0;
    }
};

double Expression::operator()(const Point& p) const {
    if (!root_) throw config_error("expression: evaluated before parsing");
    return root_->eval(p);
}

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr leaf(Node::Op op, double v = 0.0) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->value = v;
    return n;
}

NodePtr call(Node::Op op, std::vector<NodePtr> args) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = std::move(args);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    NodePtr run() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return e;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw config_error("expression: " + why + " at position " + std::to_string(pos_) +
                           " in \"" + text_ + "\"");
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+'))
                lhs = call(Node::Op::add, {lhs, term()});
            else if (eat('-'))
                lhs = call(Node::Op::sub, {lhs, term()});
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*'))
                lhs = call(Node::Op::mul, {lhs, unary()});
            else if (eat('/'))
                lhs = call(Node::Op::div, {lhs, unary()});
            else
                return lhs;
        }
    }

    // unary minus binds looser than ^, so -2^2 = -(2^2)
    NodePtr unary() {
        if (eat('-')) return call(Node::Op::neg, {unary()});
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return call(Node::Op::pow, {base, unary()});
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ == text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return word();
        if (eat('(')) {
            NodePtr e = expr();
            if (!eat(')')) fail("missing ')'");
            return e;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return leaf(Node::Op::literal, v);
    }

    NodePtr word() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               std::isalpha(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "x") return leaf(Node::Op::coord_x);
        if (name == "y") return leaf(Node::Op::coord_y);

        Node::Op op;
        std::size_t min_args;
        if (name == "abs")
            op = Node::Op::abs, min_args = 1;
        else if (name == "min")
            op = Node::Op::min, min_args = 2;
        else if (name == "max")
            op = Node::Op::max, min_args = 2;
        else
            fail("unknown name '" + name + "'");

        if (!eat('(')) fail("'" + name + "' needs parenthesized arguments");
        std::vector<NodePtr> args;
        args.push_back(expr());
        while (eat(',')) args.push_back(expr());
        if (!eat(')')) fail("missing ')' after '" + name + "'");
        if (args.size() < min_args) fail("'" + name + "' needs at least " +
                                         std::to_string(min_args) + " arguments");
        if (op == Node::Op::abs && args.size() != 1) fail("'abs' takes one argument");
        return call(op, std::move(args));
    }
};

} // namespace

Expression parse_expression(const std::string& text) {
    Expression e;
    e.source_ = text;
    e.root_ = Parser(text).run();
    return e;
}

} // namespace nlo
