#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "conefield/geometry.hpp"

namespace conefield {

enum class Op {
    Number,
    Coord,    // x1..xd, index is 0-based
    Tangent,  // v1..vd, index is 0-based
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,  // integer exponent stored in `index`
    Abs,
    Min,
    Max,
    Ge,
    Le,
    Gt,
    Lt,
    Not,
    And,
    Or,
};

bool is_boolean_op(Op op);

struct Node {
    Op op = Op::Number;
    double value = 0.0;
    int index = 0;
    std::vector<Node> args;
    std::size_t offset = 0;  // byte offset in the source text; ignored by ==

    friend bool operator==(const Node& a, const Node& b);
};

/// Parsed expression over coordinates x1..xd and tangent components v1..vd.
/// Immutable; evaluation runs on a compiled stack program.
class Expr {
public:
    Expr(Node root, std::size_t dim);

    const Node& root() const { return root_; }
    std::size_t dim() const { return dim_; }
    bool is_boolean() const { return is_boolean_op(root_.op); }
    bool uses_tangent() const { return uses_tangent_; }

    /// Numeric value; booleans evaluate to 0 or 1. Throws EvalError on
    /// division by zero.
    double evaluate(const Vec& x, const Vec& v) const;
    bool holds(const Vec& x, const Vec& v) const { return evaluate(x, v) != 0.0; }

    /// Fully parenthesized rendering that reparses to an identical tree.
    std::string to_string() const;

private:
    struct Instr {
        Op op;
        int arg;
        double value;
    };

    void compile(const Node& n);

    Node root_;
    std::size_t dim_;
    bool uses_tangent_ = false;
    std::vector<Instr> program_;
    std::size_t max_depth_ = 0;
};

Expr parse_expr(std::string_view text, std::size_t dim);

}  // namespace conefield
