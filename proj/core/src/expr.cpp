#include "finslab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numbers>

namespace finslab {

VariableTable VariableTable::chart_and_fiber(int n) {
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) names.push_back("y" + std::to_string(i));
    return VariableTable(std::move(names));
}

VariableTable VariableTable::parameters(int d) {
    std::vector<std::string> names;
    for (int i = 0; i < d; ++i) names.push_back("u" + std::to_string(i));
    return VariableTable(std::move(names));
}

int VariableTable::find(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

Expr Expr::constant(double v) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::constant;
    node->value = v;
    return Expr(std::move(node));
}

Expr Expr::variable(int index) {
    if (index < 0) throw std::invalid_argument("negative variable index");
    auto node = std::make_shared<Node>();
    node->kind = Kind::variable;
    node->var = index;
    node->max_var = index;
    return Expr(std::move(node));
}

Expr Expr::unary(Kind k, const Expr& a) {
    auto node = std::make_shared<Node>();
    node->kind = k;
    node->lhs = a.node_;
    node->max_var = a.node_->max_var;
    return Expr(std::move(node));
}

Expr Expr::binary(Kind k, const Expr& a, const Expr& b) {
    auto node = std::make_shared<Node>();
    node->kind = k;
    node->lhs = a.node_;
    node->rhs = b.node_;
    node->max_var = std::max(a.node_->max_var, b.node_->max_var);
    return Expr(std::move(node));
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
    enum Type { number, identifier, symbol, end } type;
    std::string text;
    double value = 0.0;
    std::size_t offset = 0; // 1-based
};

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token tok;
        tok.offset = i + 1;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
                    j = k;
                }
            }
            tok.type = Token::number;
            tok.text = std::string(src.substr(i, j - i));
            auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.value);
            if (ec != std::errc() || ptr != tok.text.data() + tok.text.size())
                throw ParseError("malformed number '" + tok.text + "'", tok.offset);
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            tok.type = Token::identifier;
            tok.text = std::string(src.substr(i, j - i));
            i = j;
        } else if (std::string_view("+-*/^(),").find(c) != std::string_view::npos) {
            tok.type = Token::symbol;
            tok.text = std::string(1, c);
            ++i;
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", i + 1);
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.type = Token::end;
    end.offset = src.size() + 1;
    out.push_back(end);
    return out;
}

class Parser {
public:
    Parser(std::string_view src, const VariableTable& vars) : tokens_(tokenize(src)), vars_(vars) {}

    Expr parse() {
        Expr e = expression();
        if (peek().type != Token::end) throw ParseError("unexpected '" + peek().text + "'", peek().offset);
        return e;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    bool accept(const char* s) {
        if (peek().type == Token::symbol && peek().text == s) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(const char* s) {
        if (!accept(s)) throw ParseError(std::string("expected '") + s + "'", peek().offset);
    }

    Expr expression() {
        Expr e = term();
        for (;;) {
            if (accept("+")) e = e + term();
            else if (accept("-")) e = e - term();
            else return e;
        }
    }

    Expr term() {
        Expr e = unary();
        for (;;) {
            if (accept("*")) e = e * unary();
            else if (accept("/")) e = e / unary();
            else return e;
        }
    }

    Expr unary() {
        if (accept("-")) {
            // A signed literal is a single constant unless it is the base of '^'.
            const Token& next = tokens_[pos_];
            const Token& after = tokens_[std::min(pos_ + 1, tokens_.size() - 1)];
            if (next.type == Token::number && !(after.type == Token::symbol && after.text == "^")) {
                ++pos_;
                return Expr::constant(-next.value);
            }
            return -unary();
        }
        if (accept("+")) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept("^")) return pow(base, unary());
        return base;
    }

    Expr primary() {
        const Token tok = peek();
        switch (tok.type) {
        case Token::number:
            ++pos_;
            return Expr::constant(tok.value);
        case Token::identifier: {
            ++pos_;
            if (peek().type == Token::symbol && peek().text == "(") return call(tok);
            if (int idx = vars_.find(tok.text); idx >= 0) return Expr::variable(idx);
            if (tok.text == "pi") return Expr::constant(std::numbers::pi);
            throw ParseError("unknown identifier '" + tok.text + "'", tok.offset);
        }
        case Token::symbol:
            if (tok.text == "(") {
                ++pos_;
                Expr e = expression();
                expect(")");
                return e;
            }
            throw ParseError("unexpected '" + tok.text + "'", tok.offset);
        case Token::end: break;
        }
        throw ParseError("unexpected end of input", tok.offset);
    }

    Expr call(const Token& name) {
        const std::size_t open = peek().offset;
        expect("(");
        std::vector<Expr> args;
        if (!accept(")")) {
            args.push_back(expression());
            while (accept(",")) args.push_back(expression());
            expect(")");
        }
        auto arity = [&](std::size_t k) {
            if (args.size() != k)
                throw ParseError("function '" + name.text + "' takes " + std::to_string(k) + " argument(s), got "
                                     + std::to_string(args.size()),
                                 open);
        };
        if (name.text == "pow") {
            arity(2);
            return pow(args[0], args[1]);
        }
        if (name.text == "exp") return arity(1), exp(args[0]);
        if (name.text == "log") return arity(1), log(args[0]);
        if (name.text == "sqrt") return arity(1), sqrt(args[0]);
        if (name.text == "sin") return arity(1), sin(args[0]);
        if (name.text == "cos") return arity(1), cos(args[0]);
        throw ParseError("unknown function '" + name.text + "'", name.offset);
    }

    std::vector<Token> tokens_;
    const VariableTable& vars_;
    std::size_t pos_ = 0;
};

} // namespace

Expr parse_expression(std::string_view source, const VariableTable& variables) {
    return Parser(source, variables).parse();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

using Kind = Expr::Kind;
using Node = Expr::Node;

int precedence(const Node& n) {
    switch (n.kind) {
    case Kind::add:
    case Kind::sub: return 1;
    case Kind::mul:
    case Kind::div: return 2;
    case Kind::negate: return 3;
    case Kind::pow: return 4;
    case Kind::constant: return std::signbit(n.value) ? 3 : 5;
    default: return 5;
    }
}

std::string number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void print(const Node& n, const VariableTable& vars, std::string& out);

void print_operand(const Node& n, int min_prec, const VariableTable& vars, std::string& out) {
    if (precedence(n) < min_prec) {
        out += '(';
        print(n, vars, out);
        out += ')';
    } else {
        print(n, vars, out);
    }
}

void print_call(const char* name, const Node& n, const VariableTable& vars, std::string& out) {
    out += name;
    out += '(';
    print(*n.lhs, vars, out);
    out += ')';
}

void print(const Node& n, const VariableTable& vars, std::string& out) {
    switch (n.kind) {
    case Kind::constant: out += number(n.value); return;
    case Kind::variable:
        out += n.var < vars.size() ? vars.name(n.var) : "v" + std::to_string(n.var);
        return;
    case Kind::negate:
        out += '-';
        print_operand(*n.lhs, n.lhs->kind == Kind::constant || n.lhs->kind == Kind::negate ? 6 : 3, vars, out);
        return;
    case Kind::add:
    case Kind::sub:
        print_operand(*n.lhs, 1, vars, out);
        out += n.kind == Kind::add ? " + " : " - ";
        print_operand(*n.rhs, 2, vars, out);
        return;
    case Kind::mul:
    case Kind::div:
        print_operand(*n.lhs, 2, vars, out);
        out += n.kind == Kind::mul ? "*" : "/";
        print_operand(*n.rhs, 3, vars, out);
        return;
    case Kind::pow:
        print_operand(*n.lhs, 5, vars, out);
        out += '^';
        print_operand(*n.rhs, 3, vars, out);
        return;
    case Kind::exp: print_call("exp", n, vars, out); return;
    case Kind::log: print_call("log", n, vars, out); return;
    case Kind::sqrt: print_call("sqrt", n, vars, out); return;
    case Kind::sin: print_call("sin", n, vars, out); return;
    case Kind::cos: print_call("cos", n, vars, out); return;
    }
}

} // namespace

std::string print_expression(const Expr& e, const VariableTable& variables) {
    std::string out;
    print(e.node(), variables, out);
    return out;
}

} // namespace finslab
