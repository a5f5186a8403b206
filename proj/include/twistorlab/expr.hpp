#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "twistorlab/dual.hpp"

// Scalar expression trees over the four chart coordinates x1..x4.
//
// Grammar:
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' unsigned)?
//   base   := number | 'x1'..'x4' | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | exp | log | sqrt
//
// Trees are immutable and share subtrees, so copies are cheap and evaluation
// is safe from any thread. Evaluation is templated on the scalar type; dual
// scalars give derivatives with no extra machinery here.
namespace twistorlab::expr {

enum class Func { Sin, Cos, Exp, Log, Sqrt };
enum class BinOp { Add, Sub, Mul, Div };

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at offset " + std::to_string(pos)), pos_(pos) {}
    std::size_t position() const { return pos_; }

private:
    std::size_t pos_;
};

class Expr {
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        enum class Kind { Number, Coord, Call, Binary, Pow };
        Kind kind;
        double value = 0;       // Number
        int coord = 0;          // Coord, 0-based
        Func func = Func::Sin;  // Call
        BinOp op = BinOp::Add;  // Binary
        unsigned exponent = 0;  // Pow
        NodePtr lhs, rhs;
    };

    NodePtr root_;
    explicit Expr(NodePtr n) : root_(std::move(n)) {}

public:
    Expr() : Expr(number(0.0)) {}

    static Expr number(double v) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Number;
        n->value = v;
        return Expr(n);
    }

    // i is 0-based; x1 is coord(0).
    static Expr coord(int i) {
        if (i < 0 || i > 3) throw std::invalid_argument("coordinate index out of range");
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Coord;
        n->coord = i;
        return Expr(n);
    }

    static Expr call(Func f, Expr e) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Call;
        n->func = f;
        n->lhs = e.root_;
        return Expr(n);
    }

    static Expr binary(BinOp op, Expr l, Expr r) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Binary;
        n->op = op;
        n->lhs = l.root_;
        n->rhs = r.root_;
        return Expr(n);
    }

    static Expr pow(Expr base, unsigned k) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Pow;
        n->exponent = k;
        n->lhs = base.root_;
        return Expr(n);
    }

    template <class T>
    T eval(const std::array<T, 4>& x) const {
        return eval_node<T>(*root_, x);
    }

    std::string unparse() const {
        std::string out;
        unparse_node(*root_, out);
        return out;
    }

    bool same_tree(const Expr& other) const { return same_node(*root_, *other.root_); }

    // Rebuild the tree with coordinates renamed; perm[i] is the new index of
    // old coordinate i.
    Expr rename_coords(const std::array<int, 4>& perm) const {
        return Expr(rename_node(*root_, perm));
    }

    friend Expr operator+(Expr l, Expr r) { return binary(BinOp::Add, std::move(l), std::move(r)); }
    friend Expr operator-(Expr l, Expr r) { return binary(BinOp::Sub, std::move(l), std::move(r)); }
    friend Expr operator*(Expr l, Expr r) { return binary(BinOp::Mul, std::move(l), std::move(r)); }
    friend Expr operator/(Expr l, Expr r) { return binary(BinOp::Div, std::move(l), std::move(r)); }
    friend Expr operator-(Expr e) { return binary(BinOp::Sub, number(0.0), std::move(e)); }

private:
    template <class T>
    static T eval_node(const Node& n, const std::array<T, 4>& x) {
        switch (n.kind) {
            case Node::Kind::Number:
                return T(n.value);
            case Node::Kind::Coord:
                return x[static_cast<std::size_t>(n.coord)];
            case Node::Kind::Binary: {
                T l = eval_node<T>(*n.lhs, x);
                T r = eval_node<T>(*n.rhs, x);
                switch (n.op) {
                    case BinOp::Add:
                        return l + r;
                    case BinOp::Sub:
                        return l - r;
                    case BinOp::Mul:
                        return l * r;
                    case BinOp::Div:
                        return l / r;
                }
                break;
            }
            case Node::Kind::Call: {
                T u = eval_node<T>(*n.lhs, x);
                using std::cos;
                using std::exp;
                using std::log;
                using std::sin;
                using std::sqrt;
                switch (n.func) {
                    case Func::Sin:
                        return sin(u);
                    case Func::Cos:
                        return cos(u);
                    case Func::Exp:
                        return exp(u);
                    case Func::Log:
                        return log(u);
                    case Func::Sqrt:
                        return sqrt(u);
                }
                break;
            }
            case Node::Kind::Pow:
                return ipow(eval_node<T>(*n.lhs, x), n.exponent);
        }
        throw std::logic_error("corrupt expression node");
    }

    static void unparse_node(const Node& n, std::string& out) {
        switch (n.kind) {
            case Node::Kind::Number: {
                std::ostringstream ss;
                ss.precision(17);
                ss << n.value;
                std::string s = ss.str();
                if (s.front() == '-') {
                    out += '(';
                    out += s;
                    out += ')';
                } else {
                    out += s;
                }
                return;
            }
            case Node::Kind::Coord:
                out += 'x';
                out += static_cast<char>('1' + n.coord);
                return;
            case Node::Kind::Call: {
                switch (n.func) {
                    case Func::Sin:
                        out += "sin";
                        break;
                    case Func::Cos:
                        out += "cos";
                        break;
                    case Func::Exp:
                        out += "exp";
                        break;
                    case Func::Log:
                        out += "log";
                        break;
                    case Func::Sqrt:
                        out += "sqrt";
                        break;
                }
                out += '(';
                unparse_node(*n.lhs, out);
                out += ')';
                return;
            }
            case Node::Kind::Binary: {
                out += '(';
                unparse_node(*n.lhs, out);
                switch (n.op) {
                    case BinOp::Add:
                        out += '+';
                        break;
                    case BinOp::Sub:
                        out += '-';
                        break;
                    case BinOp::Mul:
                        out += '*';
                        break;
                    case BinOp::Div:
                        out += '/';
                        break;
                }
                unparse_node(*n.rhs, out);
                out += ')';
                return;
            }
            case Node::Kind::Pow: {
                out += '(';
                unparse_node(*n.lhs, out);
                out += ')';
                out += '^';
                out += std::to_string(n.exponent);
                return;
            }
        }
    }

    static bool same_node(const Node& a, const Node& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
            case Node::Kind::Number:
                return a.value == b.value;
            case Node::Kind::Coord:
                return a.coord == b.coord;
            case Node::Kind::Call:
                return a.func == b.func && same_node(*a.lhs, *b.lhs);
            case Node::Kind::Binary:
                return a.op == b.op && same_node(*a.lhs, *b.lhs) && same_node(*a.rhs, *b.rhs);
            case Node::Kind::Pow:
                return a.exponent == b.exponent && same_node(*a.lhs, *b.lhs);
        }
        return false;
    }

    static NodePtr rename_node(const Node& n, const std::array<int, 4>& perm) {
        auto m = std::make_shared<Node>(n);
        if (n.kind == Node::Kind::Coord) m->coord = perm[static_cast<std::size_t>(n.coord)];
        if (n.lhs) m->lhs = rename_node(*n.lhs, perm);
        if (n.rhs) m->rhs = rename_node(*n.rhs, perm);
        return m;
    }
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse() {
        Expr e = parse_expr();
        skip_space();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Expr parse_expr() {
        Expr acc = eat('-') ? -parse_term() : parse_term();
        for (;;) {
            if (eat('+'))
                acc = acc + parse_term();
            else if (eat('-'))
                acc = acc - parse_term();
            else
                return acc;
        }
    }

    Expr parse_term() {
        Expr acc = parse_factor();
        for (;;) {
            if (eat('*'))
                acc = acc * parse_factor();
            else if (eat('/'))
                acc = acc / parse_factor();
            else
                return acc;
        }
    }

    Expr parse_factor() {
        Expr base = parse_base();
        if (eat('^')) {
            skip_space();
            std::size_t start = pos_;
            unsigned long k = 0;
            bool any = false;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                k = k * 10 + static_cast<unsigned long>(text_[pos_] - '0');
                if (k > 1000000) throw ParseError("exponent too large", start);
                ++pos_;
                any = true;
            }
            if (!any) throw ParseError("expected unsigned integer exponent", pos_);
            return Expr::pow(base, static_cast<unsigned>(k));
        }
        return base;
    }

    Expr parse_base() {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        // optional exponent part, e.g. 1e-3
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // not an exponent, leave for identifier handling
            }
        }
        std::string token(text_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            double v = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument("partial");
            return Expr::number(v);
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + token + "'", start);
        }
    }

    Expr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '4')
            return Expr::coord(name[1] - '1');
        Func f;
        if (name == "sin")
            f = Func::Sin;
        else if (name == "cos")
            f = Func::Cos;
        else if (name == "exp")
            f = Func::Exp;
        else if (name == "log")
            f = Func::Log;
        else if (name == "sqrt")
            f = Func::Sqrt;
        else
            throw ParseError("unknown identifier '" + name + "'", start);
        if (!eat('(')) throw ParseError("expected '(' after function name", pos_);
        Expr arg = parse_expr();
        if (!eat(')')) throw ParseError("expected ')'", pos_);
        return Expr::call(f, arg);
    }
};

}  // namespace detail

inline Expr parse_expression(std::string_view text) { return detail::Parser(text).parse(); }

}  // namespace twistorlab::expr
