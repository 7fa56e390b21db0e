#include "conefield/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "conefield/error.hpp"

namespace conefield {

bool is_boolean_op(Op op) {
    switch (op) {
        case Op::Ge:
        case Op::Le:
        case Op::Gt:
        case Op::Lt:
        case Op::Not:
        case Op::And:
        case Op::Or:
            return true;
        default:
            return false;
    }
}

bool operator==(const Node& a, const Node& b) {
    if (a.op != b.op || a.args.size() != b.args.size()) return false;
    if (a.op == Op::Number && a.value != b.value) return false;
    if ((a.op == Op::Coord || a.op == Op::Tangent || a.op == Op::Pow) && a.index != b.index) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!(a.args[i] == b.args[i])) return false;
    return true;
}

namespace {

enum class Tok {
    Number,
    Ident,
    Ge,
    Le,
    Gt,
    Lt,
    AndAnd,
    OrOr,
    Bang,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
};

struct Token {
    Tok kind;
    std::string_view text;
    std::size_t offset;
};

const std::vector<std::string> kOperandStart = {"!", "(", "-", "identifier", "number"};

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    while (i < s.size()) {
        const char c = s[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        const std::size_t start = i;
        auto two = [&](char next) { return i + 1 < s.size() && s[i + 1] == next; };
        if (is_digit(c)) {
            while (i < s.size() && is_digit(s[i])) ++i;
            if (i < s.size() && s[i] == '.') {
                ++i;
                while (i < s.size() && is_digit(s[i])) ++i;
            }
            if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
                if (j < s.size() && is_digit(s[j])) {
                    while (j < s.size() && is_digit(s[j])) ++j;
                    i = j;
                } else {
                    throw ParseError(j, {"digit"}, fmt::format("malformed exponent at offset {}", j));
                }
            }
            out.push_back({Tok::Number, s.substr(start, i - start), start});
            continue;
        }
        if (is_alpha(c)) {
            while (i < s.size() && (is_alpha(s[i]) || is_digit(s[i]))) ++i;
            out.push_back({Tok::Ident, s.substr(start, i - start), start});
            continue;
        }
        Tok kind;
        std::size_t len = 1;
        switch (c) {
            case '>':
                kind = two('=') ? Tok::Ge : Tok::Gt;
                len = two('=') ? 2 : 1;
                break;
            case '<':
                kind = two('=') ? Tok::Le : Tok::Lt;
                len = two('=') ? 2 : 1;
                break;
            case '&':
                if (!two('&')) throw ParseError(i + 1, {"&&"}, fmt::format("expected '&&' at offset {}", start));
                kind = Tok::AndAnd;
                len = 2;
                break;
            case '|':
                if (!two('|')) throw ParseError(i + 1, {"||"}, fmt::format("expected '||' at offset {}", start));
                kind = Tok::OrOr;
                len = 2;
                break;
            case '!': kind = Tok::Bang; break;
            case '+': kind = Tok::Plus; break;
            case '-': kind = Tok::Minus; break;
            case '*': kind = Tok::Star; break;
            case '/': kind = Tok::Slash; break;
            case '^': kind = Tok::Caret; break;
            case '(': kind = Tok::LParen; break;
            case ')': kind = Tok::RParen; break;
            case ',': kind = Tok::Comma; break;
            default:
                throw ParseError(start, {"token"}, fmt::format("unexpected character '{}' at offset {}", c, start));
        }
        out.push_back({kind, s.substr(start, len), start});
        i += len;
    }
    // End of input is reported at the last token so errors point into the text.
    out.push_back({Tok::End, {}, out.empty() ? 0 : out.back().offset});
    return out;
}

class Parser {
public:
    Parser(std::string_view text, std::size_t dim) : tokens_(tokenize(text)), dim_(dim) {}

    Node parse() {
        Node n = parse_or();
        if (peek().kind != Tok::End)
            fail({"&&", "||", "*", "+", "-", "/", "<", "<=", ">", ">=", "^", "end of input"});
        return n;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() { return tokens_[pos_++]; }
    bool accept(Tok k) {
        if (peek().kind != k) return false;
        ++pos_;
        return true;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const Token& t = peek();
        std::string found = t.kind == Tok::End ? "end of input" : fmt::format("'{}'", t.text);
        std::string list;
        for (std::size_t i = 0; i < expected.size(); ++i) list += (i ? ", " : "") + expected[i];
        throw ParseError(t.offset, std::move(expected),
                         fmt::format("parse error at offset {}: found {}, expected one of {}", t.offset, found, list));
    }

    static void require_numeric(const Node& n) {
        if (is_boolean_op(n.op))
            throw ParseError(n.offset, {"numeric expression"},
                             fmt::format("parse error at offset {}: boolean operand where a number is required", n.offset));
    }
    static void require_boolean(const Node& n) {
        if (!is_boolean_op(n.op))
            throw ParseError(n.offset, {"comparison"},
                             fmt::format("parse error at offset {}: numeric operand where a condition is required", n.offset));
    }

    static Node binary(Op op, Node a, Node b, std::size_t offset) {
        Node n;
        n.op = op;
        n.offset = offset;
        n.args.push_back(std::move(a));
        n.args.push_back(std::move(b));
        return n;
    }

    Node parse_or() {
        Node lhs = parse_and();
        while (peek().kind == Tok::OrOr) {
            next();
            Node rhs = parse_and();
            require_boolean(lhs);
            require_boolean(rhs);
            const auto off = lhs.offset;
            lhs = binary(Op::Or, std::move(lhs), std::move(rhs), off);
        }
        return lhs;
    }

    Node parse_and() {
        Node lhs = parse_not();
        while (peek().kind == Tok::AndAnd) {
            next();
            Node rhs = parse_not();
            require_boolean(lhs);
            require_boolean(rhs);
            const auto off = lhs.offset;
            lhs = binary(Op::And, std::move(lhs), std::move(rhs), off);
        }
        return lhs;
    }

    Node parse_not() {
        if (peek().kind == Tok::Bang) {
            const auto off = next().offset;
            Node inner = parse_not();
            require_boolean(inner);
            Node n;
            n.op = Op::Not;
            n.offset = off;
            n.args.push_back(std::move(inner));
            return n;
        }
        return parse_cmp();
    }

    Node parse_cmp() {
        Node lhs = parse_sum();
        Op op;
        switch (peek().kind) {
            case Tok::Ge: op = Op::Ge; break;
            case Tok::Le: op = Op::Le; break;
            case Tok::Gt: op = Op::Gt; break;
            case Tok::Lt: op = Op::Lt; break;
            default: return lhs;
        }
        next();
        Node rhs = parse_sum();
        require_numeric(lhs);
        require_numeric(rhs);
        const auto off = lhs.offset;
        return binary(op, std::move(lhs), std::move(rhs), off);
    }

    Node parse_sum() {
        Node lhs = parse_term();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const Op op = next().kind == Tok::Plus ? Op::Add : Op::Sub;
            Node rhs = parse_term();
            require_numeric(lhs);
            require_numeric(rhs);
            const auto off = lhs.offset;
            lhs = binary(op, std::move(lhs), std::move(rhs), off);
        }
        return lhs;
    }

    Node parse_term() {
        Node lhs = parse_unary();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const Op op = next().kind == Tok::Star ? Op::Mul : Op::Div;
            Node rhs = parse_unary();
            require_numeric(lhs);
            require_numeric(rhs);
            const auto off = lhs.offset;
            lhs = binary(op, std::move(lhs), std::move(rhs), off);
        }
        return lhs;
    }

    // Unary minus binds looser than '^', so -x^2 is -(x^2).
    Node parse_unary() {
        if (peek().kind == Tok::Minus) {
            const auto off = next().offset;
            Node inner = parse_unary();
            require_numeric(inner);
            Node n;
            n.op = Op::Neg;
            n.offset = off;
            n.args.push_back(std::move(inner));
            return n;
        }
        return parse_pow();
    }

    Node parse_pow() {
        Node base = parse_atom();
        std::vector<int> exponents;
        while (peek().kind == Tok::Caret) {
            next();
            const Token& t = peek();
            int e = 0;
            const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), e);
            if (t.kind != Tok::Number || ec != std::errc{} || ptr != t.text.data() + t.text.size() || e > 1024)
                fail({"nonnegative integer"});
            next();
            exponents.push_back(e);
        }
        if (exponents.empty()) return base;
        require_numeric(base);
        // Right-associative: x^a^b = x^(a^b); exponents are literals, so fold them.
        long long e = exponents.back();
        for (std::size_t i = exponents.size() - 1; i-- > 0;) {
            long long r = 1;
            for (long long k = 0; k < e; ++k) {
                r *= exponents[i];
                if (r > 1024) break;
            }
            e = r;
        }
        if (e > 1024) throw ParseError(base.offset, {"exponent <= 1024"}, "exponent too large");
        Node n;
        n.op = Op::Pow;
        n.index = static_cast<int>(e);
        n.offset = base.offset;
        n.args.push_back(std::move(base));
        return n;
    }

    Node parse_atom() {
        const Token& t = peek();
        if (t.kind == Tok::Number) {
            next();
            Node n;
            n.op = Op::Number;
            n.offset = t.offset;
            const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), n.value);
            if (ec != std::errc{} || ptr != t.text.data() + t.text.size() || !std::isfinite(n.value))
                throw ParseError(t.offset, {"finite number"}, fmt::format("number '{}' out of range", t.text));
            return n;
        }
        if (t.kind == Tok::LParen) {
            next();
            Node inner = parse_or();
            if (!accept(Tok::RParen)) fail({")"});
            return inner;
        }
        if (t.kind == Tok::Ident) {
            next();
            return parse_identifier(t);
        }
        fail(kOperandStart);
    }

    Node parse_identifier(const Token& t) {
        const std::string_view name = t.text;
        if (name == "abs" || name == "min" || name == "max") {
            if (!accept(Tok::LParen)) fail({"("});
            Node n;
            n.op = name == "abs" ? Op::Abs : (name == "min" ? Op::Min : Op::Max);
            n.offset = t.offset;
            n.args.push_back(parse_or());
            while (accept(Tok::Comma)) n.args.push_back(parse_or());
            if (!accept(Tok::RParen)) fail({")", ","});
            for (const auto& a : n.args) require_numeric(a);
            if (n.op == Op::Abs && n.args.size() != 1)
                throw ArityError(fmt::format("abs takes 1 argument, got {} (offset {})", n.args.size(), t.offset));
            if (n.op != Op::Abs && n.args.size() < 2)
                throw ArityError(fmt::format("{} takes at least 2 arguments, got {} (offset {})", name, n.args.size(), t.offset));
            return n;
        }
        if ((name[0] == 'x' || name[0] == 'v') && name.size() > 1) {
            int idx = 0;
            const auto digits = name.substr(1);
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
            if (ec == std::errc{} && ptr == digits.data() + digits.size()) {
                if (idx < 1 || static_cast<std::size_t>(idx) > dim_)
                    throw ArityError(fmt::format("'{}' at offset {}: index out of range 1..{}", name, t.offset, dim_));
                Node n;
                n.op = name[0] == 'x' ? Op::Coord : Op::Tangent;
                n.index = idx - 1;
                n.offset = t.offset;
                return n;
            }
        }
        throw ArityError(fmt::format("unknown identifier '{}' at offset {}", name, t.offset));
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t dim_;
};

const char* op_symbol(Op op) {
    switch (op) {
        case Op::Add: return " + ";
        case Op::Sub: return " - ";
        case Op::Mul: return " * ";
        case Op::Div: return " / ";
        case Op::Ge: return " >= ";
        case Op::Le: return " <= ";
        case Op::Gt: return " > ";
        case Op::Lt: return " < ";
        case Op::And: return " && ";
        case Op::Or: return " || ";
        default: return "?";
    }
}

void render(const Node& n, std::string& out) {
    switch (n.op) {
        case Op::Number: out += fmt::format("{:.17g}", n.value); return;
        case Op::Coord: out += fmt::format("x{}", n.index + 1); return;
        case Op::Tangent: out += fmt::format("v{}", n.index + 1); return;
        case Op::Neg:
            out += "-(";
            render(n.args[0], out);
            out += ")";
            return;
        case Op::Not:
            out += "!(";
            render(n.args[0], out);
            out += ")";
            return;
        case Op::Pow:
            out += "(";
            render(n.args[0], out);
            out += fmt::format(")^{}", n.index);
            return;
        case Op::Abs:
        case Op::Min:
        case Op::Max:
            out += n.op == Op::Abs ? "abs(" : (n.op == Op::Min ? "min(" : "max(");
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ", ";
                render(n.args[i], out);
            }
            out += ")";
            return;
        default:
            out += "(";
            render(n.args[0], out);
            out += op_symbol(n.op);
            render(n.args[1], out);
            out += ")";
    }
}

bool mentions_tangent(const Node& n) {
    if (n.op == Op::Tangent) return true;
    for (const auto& a : n.args)
        if (mentions_tangent(a)) return true;
    return false;
}

}  // namespace

Expr::Expr(Node root, std::size_t dim) : root_(std::move(root)), dim_(dim) {
    uses_tangent_ = mentions_tangent(root_);
    compile(root_);
    std::size_t depth = 0;
    for (const auto& ins : program_) {
        switch (ins.op) {
            case Op::Number:
            case Op::Coord:
            case Op::Tangent: ++depth; break;
            case Op::Neg:
            case Op::Not:
            case Op::Abs:
            case Op::Pow: break;
            case Op::Min:
            case Op::Max: depth -= static_cast<std::size_t>(ins.arg) - 1; break;
            default: --depth;
        }
        max_depth_ = std::max(max_depth_, depth);
    }
}

void Expr::compile(const Node& n) {
    for (const auto& a : n.args) compile(a);
    Instr ins{n.op, 0, 0.0};
    if (n.op == Op::Number) ins.value = n.value;
    if (n.op == Op::Coord || n.op == Op::Tangent || n.op == Op::Pow) ins.arg = n.index;
    if (n.op == Op::Min || n.op == Op::Max) ins.arg = static_cast<int>(n.args.size());
    program_.push_back(ins);
}

double Expr::evaluate(const Vec& x, const Vec& v) const {
    std::array<double, 64> small{};
    std::vector<double> large;
    double* stack = small.data();
    if (max_depth_ > small.size()) {
        large.resize(max_depth_);
        stack = large.data();
    }
    std::size_t top = 0;
    for (const auto& ins : program_) {
        switch (ins.op) {
            case Op::Number: stack[top++] = ins.value; break;
            case Op::Coord: stack[top++] = x[static_cast<std::size_t>(ins.arg)]; break;
            case Op::Tangent: stack[top++] = v[static_cast<std::size_t>(ins.arg)]; break;
            case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::Abs: stack[top - 1] = std::fabs(stack[top - 1]); break;
            case Op::Not: stack[top - 1] = stack[top - 1] != 0.0 ? 0.0 : 1.0; break;
            case Op::Pow: {
                const double b = stack[top - 1];
                double r = 1.0;
                for (int k = 0; k < ins.arg; ++k) r *= b;
                stack[top - 1] = r;
                break;
            }
            case Op::Min:
            case Op::Max: {
                const std::size_t n = static_cast<std::size_t>(ins.arg);
                double r = stack[top - n];
                for (std::size_t k = top - n + 1; k < top; ++k)
                    r = ins.op == Op::Min ? std::min(r, stack[k]) : std::max(r, stack[k]);
                top -= n;
                stack[top++] = r;
                break;
            }
            default: {
                const double b = stack[--top];
                double& a = stack[top - 1];
                switch (ins.op) {
                    case Op::Add: a = a + b; break;
                    case Op::Sub: a = a - b; break;
                    case Op::Mul: a = a * b; break;
                    case Op::Div:
                        if (b == 0.0) throw EvalError("division by zero");
                        a = a / b;
                        break;
                    case Op::Ge: a = a >= b ? 1.0 : 0.0; break;
                    case Op::Le: a = a <= b ? 1.0 : 0.0; break;
                    case Op::Gt: a = a > b ? 1.0 : 0.0; break;
                    case Op::Lt: a = a < b ? 1.0 : 0.0; break;
                    case Op::And: a = (a != 0.0 && b != 0.0) ? 1.0 : 0.0; break;
                    case Op::Or: a = (a != 0.0 || b != 0.0) ? 1.0 : 0.0; break;
                    default: break;
                }
            }
        }
    }
    return stack[0];
}

std::string Expr::to_string() const {
    std::string out;
    render(root_, out);
    return out;
}

Expr parse_expr(std::string_view text, std::size_t dim) {
    if (dim < 1 || dim > kMaxDim) throw ArityError(fmt::format("dimension {} outside [1, {}]", dim, kMaxDim));
    bool blank = true;
    for (char c : text) blank = blank && (c == ' ' || c == '\t' || c == '\n' || c == '\r');
    if (blank) throw ParseError(0, {"expression"}, "empty expression");
    Parser p(text, dim);
    return Expr(p.parse(), dim);
}

}  // namespace conefield
