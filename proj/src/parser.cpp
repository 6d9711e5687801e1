#include "noether/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>

namespace noether {

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      message_(message),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Number, Ident, Jet, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    int jet_order = 0;  // Tok::Jet
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        Token tok;
        tok.line = line_;
        tok.column = col_;
        if (pos_ >= src_.size()) return tok;
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() &&
                                                            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            return number(tok);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident(tok);
        advance();
        switch (c) {
        case '+': tok.kind = Tok::Plus; break;
        case '-': tok.kind = Tok::Minus; break;
        case '*': tok.kind = Tok::Star; break;
        case '/': tok.kind = Tok::Slash; break;
        case '^': tok.kind = Tok::Caret; break;
        case '(': tok.kind = Tok::LParen; break;
        case ')': tok.kind = Tok::RParen; break;
        default: throw ParseError(std::string("unexpected character '") + c + "'", tok.line, tok.column);
        }
        tok.text = std::string(1, c);
        return tok;
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
    }

    bool digit_at(std::size_t i) const {
        return i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]));
    }

    Token number(Token tok) {
        const std::size_t start = pos_;
        while (digit_at(pos_)) advance();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            while (digit_at(pos_)) advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
            if (digit_at(look)) {
                while (pos_ < look) advance();
                while (digit_at(pos_)) advance();
            }
        }
        tok.kind = Tok::Number;
        tok.text = std::string(src_.substr(start, pos_ - start));
        tok.number = std::strtod(tok.text.c_str(), nullptr);
        if (!std::isfinite(tok.number)) throw ParseError("number out of range: " + tok.text, tok.line, tok.column);
        return tok;
    }

    Token ident(Token tok) {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            advance();
        while (digit_at(pos_)) advance();
        tok.kind = Tok::Ident;
        tok.text = std::string(src_.substr(start, pos_ - start));
        // p<j>^(q) is a single jet token; any other '^(' is a power.
        if (tok.text.size() > 1 && tok.text[0] == 'p' && std::isdigit(static_cast<unsigned char>(tok.text[1])) &&
            pos_ + 2 < src_.size() && src_[pos_] == '^' && src_[pos_ + 1] == '(' && digit_at(pos_ + 2)) {
            std::size_t look = pos_ + 2;
            while (digit_at(look)) ++look;
            if (look < src_.size() && src_[look] == ')') {
                const std::string digits(src_.substr(pos_ + 2, look - pos_ - 2));
                while (pos_ <= look) advance();
                tok.kind = Tok::Jet;
                tok.jet_order = std::atoi(digits.c_str());
                if (digits.size() > 6) tok.jet_order = 1 << 30;
            }
        }
        return tok;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

std::optional<UnaryFn> function_named(const std::string& name) {
    if (name == "sin") return UnaryFn::Sin;
    if (name == "cos") return UnaryFn::Cos;
    if (name == "exp") return UnaryFn::Exp;
    if (name == "ln") return UnaryFn::Ln;
    if (name == "sqrt") return UnaryFn::Sqrt;
    return std::nullopt;
}

class Parser {
public:
    Parser(std::string_view text, const Dimensions& dims, const ParseOptions& options)
        : lexer_(text), dims_(dims), options_(options) {
        tok_ = lexer_.next();
    }

    Expr parse_all() {
        Expr e = expr();
        if (tok_.kind != Tok::End) fail("unexpected '" + tok_.text + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, tok_.line, tok_.column); }
    [[noreturn]] static void fail_at(const Token& t, const std::string& message) {
        throw ParseError(message, t.line, t.column);
    }

    void bump() { tok_ = lexer_.next(); }

    void expect(Tok kind, const char* what) {
        if (tok_.kind != kind) fail(std::string("expected ") + what);
        bump();
    }

    Expr expr() {
        std::vector<Expr> terms{term()};
        while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
            const bool minus = tok_.kind == Tok::Minus;
            bump();
            Expr rhs = term();
            terms.push_back(minus ? negate(rhs) : rhs);
        }
        return sum(std::move(terms));
    }

    Expr term() {
        Expr lhs = unary();
        while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
            const Token op = tok_;
            bump();
            Expr rhs = unary();
            if (op.kind == Tok::Star) {
                lhs = lhs * rhs;
            } else {
                if (rhs.is_constant(0.0)) fail_at(op, "division by literal zero");
                lhs = lhs / rhs;
            }
        }
        return lhs;
    }

    Expr unary() {
        if (tok_.kind == Tok::Minus) {
            bump();
            return negate(unary());
        }
        if (tok_.kind == Tok::Plus) {
            bump();
            return unary();
        }
        return power_expr();
    }

    Expr power_expr() {
        Expr base = primary();
        if (tok_.kind != Tok::Caret) return base;
        bump();
        const Token at = tok_;
        Expr ex = unary();
        if (!ex.is_constant()) fail_at(at, "exponent must be an integer constant");
        const double v = ex.value();
        if (v != std::floor(v) || std::abs(v) > 1e6) fail_at(at, "exponent must be an integer constant");
        return power(base, static_cast<int>(v));
    }

    Expr primary() {
        const Token t = tok_;
        switch (t.kind) {
        case Tok::Number: bump(); return Expr(t.number);
        case Tok::LParen: {
            bump();
            Expr e = expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        case Tok::Jet: bump(); return Expr(jet_symbol(t, t.text.substr(1), t.jet_order));
        case Tok::Ident: {
            bump();
            if (auto fn = function_named(t.text)) {
                expect(Tok::LParen, "'(' after function name");
                Expr arg = expr();
                expect(Tok::RParen, "')'");
                return apply(*fn, arg);
            }
            return Expr(resolve(t));
        }
        case Tok::End: fail("unexpected end of expression");
        default: fail("unexpected '" + t.text + "'");
        }
    }

    static std::optional<int> index_of(const std::string& digits) {
        if (digits.empty() || digits.size() > 6) return std::nullopt;
        for (char c : digits)
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        return std::atoi(digits.c_str());
    }

    int checked_index(const Token& t, const std::string& digits, int limit, const char* family) const {
        auto idx = index_of(digits);
        if (!idx) fail_at(t, "unknown symbol '" + t.text + "'");
        if (*idx < 1 || *idx > limit)
            fail_at(t, "index out of range: '" + t.text + "' (" + family + " dimension is " + std::to_string(limit) +
                           ")");
        return *idx;
    }

    Symbol jet_symbol(const Token& t, const std::string& digits, int order) const {
        const int j = checked_index(t, digits, dims_.k, "jet");
        if (order > dims_.m)
            fail_at(t, "jet order above m: '" + t.text + "' has order " + std::to_string(order) + ", m = " +
                           std::to_string(dims_.m));
        return Symbol::jet(j, order);
    }

    Symbol resolve(const Token& t) const {
        const std::string& name = t.text;
        if (name == "t") return Symbol::time();
        auto split = name.find_first_of("0123456789");
        if (split == std::string::npos) fail_at(t, "unknown symbol '" + name + "'");
        const std::string head = name.substr(0, split);
        const std::string digits = name.substr(split);
        if (head == "x") return Symbol::state(checked_index(t, digits, dims_.n, "state"));
        if (head == "u") return Symbol::control(checked_index(t, digits, dims_.r, "control"));
        if (head == "p") return jet_symbol(t, digits, 0);
        if (head == "dp") return jet_symbol(t, digits, 1);
        if (head == "ddp") return jet_symbol(t, digits, 2);
        if (head == "psi") {
            if (!options_.allow_costate) fail_at(t, "costate symbol '" + name + "' not allowed here");
            if (digits == "0") return Symbol::costate0();
            return Symbol::costate(checked_index(t, digits, dims_.n, "state"));
        }
        if (head == "du") {
            if (!options_.allow_control_dot) fail_at(t, "control derivative '" + name + "' not allowed here");
            return Symbol::control_dot(checked_index(t, digits, dims_.r, "control"));
        }
        fail_at(t, "unknown symbol '" + name + "'");
    }

    Lexer lexer_;
    Dimensions dims_;
    ParseOptions options_;
    Token tok_;
};

}  // namespace

Expr parse(std::string_view text, const Dimensions& dims, const ParseOptions& options) {
    Parser p(text, dims, options);
    return p.parse_all();
}

}  // namespace noether
