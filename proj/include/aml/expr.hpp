// Expression trees over system variables: boolean predicates, linear
// integer arithmetic, enum/boolean comparisons, primed references.
#pragma once

#include <cassert>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aml/value.hpp"

namespace aml {

enum class ExprKind {
    BoolLit,
    IntLit,
    LabelLit, // unresolved identifier; typing turns it into a ValueLit
    ValueLit, // typed literal carrying its domain
    VarRef,
    Not,
    And,
    Or,
    Cmp,
    Add,
    Sub,
    Mul, // one operand is a constant
    Mod, // constant positive divisor, mathematical remainder
    IfThenElse,
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

inline const char* cmp_op_text(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

/// Value category of a typed expression.
struct ExprType {
    enum Kind { Untyped, Bool, Int, Enum } kind = Untyped;
    Domain domain; // Enum: the member domain; Int over a variable keeps its domain too

    static ExprType untyped() { return {}; }
    static ExprType boolean() { return {Bool, {}}; }
    static ExprType integer() { return {Int, {}}; }
    static ExprType enumeration(Domain d) { return {Enum, std::move(d)}; }
};

class Expr;

struct ExprNode {
    ExprKind kind;
    CmpOp cmp = CmpOp::Eq;
    std::int64_t value = 0;  // BoolLit (0/1), IntLit, ValueLit
    std::string name;        // VarRef / LabelLit
    bool primed = false;     // VarRef
    int var_slot = -1;       // VarRef: index into the typing layout
    std::vector<Expr> kids;
    ExprType type;
    int line = 0, column = 0;
};

/// Immutable shared expression tree. Copies are cheap; all operations
/// producing "modified" expressions build new nodes.
class Expr {
public:
    Expr() = default;
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}

    static Expr make(ExprNode n) { return Expr(std::make_shared<const ExprNode>(std::move(n))); }

    bool valid() const { return node_ != nullptr; }
    const ExprNode& node() const { return *node_; }
    ExprKind kind() const { return node_->kind; }
    const std::vector<Expr>& kids() const { return node_->kids; }

    friend bool operator==(const Expr& a, const Expr& b) { return structurally_equal(a, b); }
    friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

    static bool structurally_equal(const Expr& a, const Expr& b) {
        if (!a.valid() || !b.valid()) return a.valid() == b.valid();
        const ExprNode& x = a.node();
        const ExprNode& y = b.node();
        if (x.kind != y.kind || x.cmp != y.cmp || x.value != y.value || x.name != y.name ||
            x.primed != y.primed || x.kids.size() != y.kids.size())
            return false;
        for (std::size_t i = 0; i < x.kids.size(); ++i)
            if (!structurally_equal(x.kids[i], y.kids[i])) return false;
        return true;
    }

private:
    std::shared_ptr<const ExprNode> node_;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace exprs {

inline Expr bool_lit(bool b) {
    ExprNode n{ExprKind::BoolLit};
    n.value = b ? 1 : 0;
    n.type = ExprType::boolean();
    return Expr::make(std::move(n));
}

inline Expr int_lit(std::int64_t v) {
    ExprNode n{ExprKind::IntLit};
    n.value = v;
    n.type = ExprType::integer();
    return Expr::make(std::move(n));
}

inline Expr label_lit(std::string label, int line = 0, int col = 0) {
    ExprNode n{ExprKind::LabelLit};
    n.name = std::move(label);
    n.line = line;
    n.column = col;
    return Expr::make(std::move(n));
}

inline Expr var(std::string name, bool primed = false, int line = 0, int col = 0) {
    ExprNode n{ExprKind::VarRef};
    n.name = std::move(name);
    n.primed = primed;
    n.line = line;
    n.column = col;
    return Expr::make(std::move(n));
}

inline Expr unary(ExprKind k, Expr a) {
    ExprNode n{k};
    n.kids = {std::move(a)};
    return Expr::make(std::move(n));
}

inline Expr binary(ExprKind k, Expr a, Expr b) {
    ExprNode n{k};
    n.kids = {std::move(a), std::move(b)};
    return Expr::make(std::move(n));
}

inline Expr not_(Expr a) { return unary(ExprKind::Not, std::move(a)); }
inline Expr and_(Expr a, Expr b) { return binary(ExprKind::And, std::move(a), std::move(b)); }
inline Expr or_(Expr a, Expr b) { return binary(ExprKind::Or, std::move(a), std::move(b)); }

inline Expr cmp(CmpOp op, Expr a, Expr b) {
    ExprNode n{ExprKind::Cmp};
    n.cmp = op;
    n.kids = {std::move(a), std::move(b)};
    return Expr::make(std::move(n));
}

inline Expr eq(Expr a, Expr b) { return cmp(CmpOp::Eq, std::move(a), std::move(b)); }

inline Expr add(Expr a, Expr b) { return binary(ExprKind::Add, std::move(a), std::move(b)); }
inline Expr sub(Expr a, Expr b) { return binary(ExprKind::Sub, std::move(a), std::move(b)); }
inline Expr mul(Expr a, Expr b) { return binary(ExprKind::Mul, std::move(a), std::move(b)); }
inline Expr mod(Expr a, Expr b) { return binary(ExprKind::Mod, std::move(a), std::move(b)); }

inline Expr ite(Expr c, Expr t, Expr e) {
    ExprNode n{ExprKind::IfThenElse};
    n.kids = {std::move(c), std::move(t), std::move(e)};
    return Expr::make(std::move(n));
}

/// Disjunction of a nonempty list, left-folded.
inline Expr any_of(const std::vector<Expr>& xs) {
    if (xs.empty()) return bool_lit(false);
    Expr acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc = or_(acc, xs[i]);
    return acc;
}

inline Expr all_of(const std::vector<Expr>& xs) {
    if (xs.empty()) return bool_lit(true);
    Expr acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc = and_(acc, xs[i]);
    return acc;
}

} // namespace exprs

// ---------------------------------------------------------------------------
// Typing
// ---------------------------------------------------------------------------

namespace detail {

[[noreturn]] inline void type_fail(const ExprNode& n, const std::string& msg) {
    if (n.line > 0) throw ParseError(msg, n.line, n.column);
    throw ValidationError(msg);
}

inline bool is_const_int(const Expr& e) {
    return e.kind() == ExprKind::IntLit ||
           (e.kind() == ExprKind::ValueLit && e.node().type.kind == ExprType::Int);
}

} // namespace detail

/// Type-checks `e` against `layout`, resolving variable slots and enum
/// labels. Returns a new, fully typed tree. `expected` guides bare labels
/// and if/then/else branches (bidirectional where needed).
inline Expr type_expr(const Expr& e, const VariableLayout& layout, bool allow_primed,
                      const ExprType* expected = nullptr) {
    const ExprNode& n = e.node();
    switch (n.kind) {
        case ExprKind::BoolLit:
        case ExprKind::IntLit:
            return e;
        case ExprKind::ValueLit:
            return e;
        case ExprKind::LabelLit: {
            if (!expected || expected->kind != ExprType::Enum)
                detail::type_fail(n, "unknown identifier '" + n.name + "'");
            std::int64_t idx = expected->domain.label_index(n.name);
            if (idx < 0)
                detail::type_fail(n, "'" + n.name + "' is not a member of " +
                                         expected->domain.to_string());
            ExprNode out{ExprKind::ValueLit};
            out.value = idx;
            out.name = n.name;
            out.type = *expected;
            out.line = n.line;
            out.column = n.column;
            return Expr::make(std::move(out));
        }
        case ExprKind::VarRef: {
            int slot = layout.index_of(n.name);
            if (slot < 0) {
                // A bare identifier that names no variable can still be an
                // enum label when the context expects one.
                if (!n.primed && expected && expected->kind == ExprType::Enum) {
                    std::int64_t idx = expected->domain.label_index(n.name);
                    if (idx >= 0) {
                        ExprNode out{ExprKind::ValueLit};
                        out.value = idx;
                        out.name = n.name;
                        out.type = *expected;
                        out.line = n.line;
                        out.column = n.column;
                        return Expr::make(std::move(out));
                    }
                }
                detail::type_fail(n, "unknown variable '" + n.name + "'");
            }
            if (n.primed && !allow_primed)
                detail::type_fail(n, "primed variable '" + n.name + "'' not allowed here");
            ExprNode out = n;
            out.var_slot = slot;
            const Domain& d = layout.vars[static_cast<std::size_t>(slot)].domain;
            switch (d.kind) {
                case DomainKind::Boolean: out.type = ExprType::boolean(); break;
                case DomainKind::BoundedInt:
                    out.type = ExprType::integer();
                    out.type.domain = d;
                    break;
                case DomainKind::Enumeration: out.type = ExprType::enumeration(d); break;
            }
            return Expr::make(std::move(out));
        }
        case ExprKind::Not: {
            Expr kid = type_expr(n.kids[0], layout, allow_primed);
            if (kid.node().type.kind != ExprType::Bool)
                detail::type_fail(n, "'not' needs a boolean operand");
            ExprNode out = n;
            out.kids = {std::move(kid)};
            out.type = ExprType::boolean();
            return Expr::make(std::move(out));
        }
        case ExprKind::And:
        case ExprKind::Or: {
            Expr a = type_expr(n.kids[0], layout, allow_primed);
            Expr b = type_expr(n.kids[1], layout, allow_primed);
            if (a.node().type.kind != ExprType::Bool || b.node().type.kind != ExprType::Bool)
                detail::type_fail(n, "boolean connective needs boolean operands");
            ExprNode out = n;
            out.kids = {std::move(a), std::move(b)};
            out.type = ExprType::boolean();
            return Expr::make(std::move(out));
        }
        case ExprKind::Cmp: {
            // Type the side that is resolvable on its own first, so an enum
            // label on the other side can pick up its domain.
            auto self_resolvable = [&](const Expr& e) {
                return e.kind() != ExprKind::VarRef || e.node().primed ||
                       layout.index_of(e.node().name) >= 0;
            };
            Expr a, b;
            if (!self_resolvable(n.kids[0]) && self_resolvable(n.kids[1])) {
                b = type_expr(n.kids[1], layout, allow_primed);
                ExprType t = b.node().type;
                a = type_expr(n.kids[0], layout, allow_primed, &t);
            } else {
                a = type_expr(n.kids[0], layout, allow_primed);
                ExprType t = a.node().type;
                b = type_expr(n.kids[1], layout, allow_primed, &t);
            }
            const ExprType& ta = a.node().type;
            const ExprType& tb = b.node().type;
            if (ta.kind != tb.kind)
                detail::type_fail(n, "comparison between differently typed operands");
            if (ta.kind == ExprType::Enum && !(ta.domain == tb.domain))
                detail::type_fail(n, "comparison between different enum domains");
            ExprNode out = n;
            out.kids = {std::move(a), std::move(b)};
            out.type = ExprType::boolean();
            return Expr::make(std::move(out));
        }
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Mod: {
            Expr a = type_expr(n.kids[0], layout, allow_primed);
            Expr b = type_expr(n.kids[1], layout, allow_primed);
            if (a.node().type.kind != ExprType::Int || b.node().type.kind != ExprType::Int)
                detail::type_fail(n, "arithmetic needs bounded-integer operands");
            if (n.kind == ExprKind::Mul && !detail::is_const_int(a) && !detail::is_const_int(b))
                detail::type_fail(n, "multiplication needs a constant operand");
            if (n.kind == ExprKind::Mod) {
                if (!detail::is_const_int(b))
                    detail::type_fail(n, "modulo needs a constant divisor");
                if (b.node().value <= 0) detail::type_fail(n, "modulo divisor must be positive");
            }
            ExprNode out = n;
            out.kids = {std::move(a), std::move(b)};
            out.type = ExprType::integer();
            return Expr::make(std::move(out));
        }
        case ExprKind::IfThenElse: {
            Expr c = type_expr(n.kids[0], layout, allow_primed);
            if (c.node().type.kind != ExprType::Bool)
                detail::type_fail(n, "'if' condition must be boolean");
            Expr t, f;
            if (n.kids[1].kind() == ExprKind::LabelLit && expected) {
                t = type_expr(n.kids[1], layout, allow_primed, expected);
            } else {
                t = type_expr(n.kids[1], layout, allow_primed, expected);
            }
            ExprType tt = t.node().type;
            f = type_expr(n.kids[2], layout, allow_primed, &tt);
            const ExprType& tf = f.node().type;
            if (tt.kind != tf.kind || (tt.kind == ExprType::Enum && !(tt.domain == tf.domain)))
                detail::type_fail(n, "'if' branches have different types");
            ExprNode out = n;
            out.kids = {std::move(c), std::move(t), std::move(f)};
            out.type = tt;
            return Expr::make(std::move(out));
        }
    }
    throw Error("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluates a typed expression. `next` resolves primed references and must
/// be present iff the expression mentions any.
inline std::int64_t eval_value(const Expr& e, const Valuation& current, const Valuation* next) {
    const ExprNode& n = e.node();
    switch (n.kind) {
        case ExprKind::BoolLit:
        case ExprKind::IntLit:
        case ExprKind::ValueLit:
            return n.value;
        case ExprKind::LabelLit: throw Error("evaluating untyped label '" + n.name + "'");
        case ExprKind::VarRef: {
            const Valuation& v = n.primed ? *next : current;
            if (n.var_slot >= 0 && static_cast<std::size_t>(n.var_slot) < v.values.size() &&
                v.layout->vars[static_cast<std::size_t>(n.var_slot)].name == n.name)
                return v.values[static_cast<std::size_t>(n.var_slot)];
            return v.get(n.name);
        }
        case ExprKind::Not: return eval_value(n.kids[0], current, next) ? 0 : 1;
        case ExprKind::And:
            return eval_value(n.kids[0], current, next) && eval_value(n.kids[1], current, next);
        case ExprKind::Or:
            return eval_value(n.kids[0], current, next) || eval_value(n.kids[1], current, next);
        case ExprKind::Cmp: {
            std::int64_t a = eval_value(n.kids[0], current, next);
            std::int64_t b = eval_value(n.kids[1], current, next);
            switch (n.cmp) {
                case CmpOp::Eq: return a == b;
                case CmpOp::Ne: return a != b;
                case CmpOp::Lt: return a < b;
                case CmpOp::Le: return a <= b;
                case CmpOp::Gt: return a > b;
                case CmpOp::Ge: return a >= b;
            }
            return 0;
        }
        case ExprKind::Add:
            return eval_value(n.kids[0], current, next) + eval_value(n.kids[1], current, next);
        case ExprKind::Sub:
            return eval_value(n.kids[0], current, next) - eval_value(n.kids[1], current, next);
        case ExprKind::Mul:
            return eval_value(n.kids[0], current, next) * eval_value(n.kids[1], current, next);
        case ExprKind::Mod: {
            std::int64_t a = eval_value(n.kids[0], current, next);
            std::int64_t m = eval_value(n.kids[1], current, next);
            std::int64_t r = a % m;
            return r < 0 ? r + m : r;
        }
        case ExprKind::IfThenElse:
            return eval_value(n.kids[0], current, next) ? eval_value(n.kids[1], current, next)
                                                        : eval_value(n.kids[2], current, next);
    }
    throw Error("unreachable expression kind");
}

inline bool eval_predicate(const Expr& p, const Valuation& current,
                           const Valuation* next = nullptr) {
    return eval_value(p, current, next) != 0;
}

inline bool mentions_primed(const Expr& e) {
    const ExprNode& n = e.node();
    if (n.kind == ExprKind::VarRef) return n.primed;
    for (const Expr& k : n.kids)
        if (mentions_primed(k)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Rendering (parseable by the DSL expression grammar)
// ---------------------------------------------------------------------------

namespace detail {

inline int precedence(const ExprNode& n) {
    switch (n.kind) {
        case ExprKind::Or: return 1;
        case ExprKind::And: return 2;
        case ExprKind::Not: return 3;
        case ExprKind::Cmp: return 4;
        case ExprKind::Add:
        case ExprKind::Sub: return 5;
        case ExprKind::Mul:
        case ExprKind::Mod: return 6;
        case ExprKind::IfThenElse: return 0;
        default: return 7;
    }
}

inline void render_rec(const Expr& e, std::string& out, int parent_prec, bool right_side) {
    const ExprNode& n = e.node();
    int prec = precedence(n);
    bool parens = prec < parent_prec || (prec == parent_prec && right_side && prec != 7);
    if (parens) out += "(";
    switch (n.kind) {
        case ExprKind::BoolLit: out += n.value ? "true" : "false"; break;
        case ExprKind::IntLit: out += std::to_string(n.value); break;
        case ExprKind::ValueLit:
            out += n.type.kind == ExprType::Enum ? n.name
                   : n.type.kind == ExprType::Bool ? (n.value ? "true" : "false")
                                                   : std::to_string(n.value);
            break;
        case ExprKind::LabelLit: out += n.name; break;
        case ExprKind::VarRef:
            out += n.name;
            if (n.primed) out += "'";
            break;
        case ExprKind::Not:
            out += "not ";
            render_rec(n.kids[0], out, prec, true);
            break;
        case ExprKind::And:
        case ExprKind::Or:
            render_rec(n.kids[0], out, prec, false);
            out += n.kind == ExprKind::And ? " and " : " or ";
            render_rec(n.kids[1], out, prec, true);
            break;
        case ExprKind::Cmp:
            render_rec(n.kids[0], out, prec + 1, false);
            out += " ";
            out += cmp_op_text(n.cmp);
            out += " ";
            render_rec(n.kids[1], out, prec + 1, true);
            break;
        case ExprKind::Add:
        case ExprKind::Sub:
            render_rec(n.kids[0], out, prec, false);
            out += n.kind == ExprKind::Add ? " + " : " - ";
            render_rec(n.kids[1], out, prec, true);
            break;
        case ExprKind::Mul:
        case ExprKind::Mod:
            render_rec(n.kids[0], out, prec, false);
            out += n.kind == ExprKind::Mul ? " * " : " mod ";
            render_rec(n.kids[1], out, prec, true);
            break;
        case ExprKind::IfThenElse:
            out += "if ";
            render_rec(n.kids[0], out, 1, false);
            out += " then ";
            render_rec(n.kids[1], out, 1, false);
            out += " else ";
            render_rec(n.kids[2], out, 1, false);
            break;
    }
    if (parens) out += ")";
}

} // namespace detail

inline std::string render_expr(const Expr& e) {
    std::string out;
    detail::render_rec(e, out, 0, false);
    return out;
}

// ---------------------------------------------------------------------------
// Static interval bounds for integer expressions
// ---------------------------------------------------------------------------

struct Interval {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
};

/// Conservative bounds of a typed integer expression; nullopt when no
/// finite bound can be derived cheaply.
inline std::optional<Interval> static_interval(const Expr& e) {
    const ExprNode& n = e.node();
    switch (n.kind) {
        case ExprKind::IntLit:
        case ExprKind::ValueLit:
            return Interval{n.value, n.value};
        case ExprKind::VarRef:
            if (n.type.kind == ExprType::Int && n.type.domain.kind == DomainKind::BoundedInt)
                return Interval{n.type.domain.lo, n.type.domain.hi};
            return std::nullopt;
        case ExprKind::Add: {
            auto a = static_interval(n.kids[0]);
            auto b = static_interval(n.kids[1]);
            if (!a || !b) return std::nullopt;
            return Interval{a->lo + b->lo, a->hi + b->hi};
        }
        case ExprKind::Sub: {
            auto a = static_interval(n.kids[0]);
            auto b = static_interval(n.kids[1]);
            if (!a || !b) return std::nullopt;
            return Interval{a->lo - b->hi, a->hi - b->lo};
        }
        case ExprKind::Mul: {
            auto a = static_interval(n.kids[0]);
            auto b = static_interval(n.kids[1]);
            if (!a || !b) return std::nullopt;
            std::int64_t c[4] = {a->lo * b->lo, a->lo * b->hi, a->hi * b->lo, a->hi * b->hi};
            Interval r{c[0], c[0]};
            for (std::int64_t x : c) {
                if (x < r.lo) r.lo = x;
                if (x > r.hi) r.hi = x;
            }
            return r;
        }
        case ExprKind::Mod: {
            auto b = static_interval(n.kids[1]);
            if (!b) return std::nullopt;
            return Interval{0, b->hi - 1};
        }
        case ExprKind::IfThenElse: {
            auto a = static_interval(n.kids[1]);
            auto b = static_interval(n.kids[2]);
            if (!a || !b) return std::nullopt;
            return Interval{std::min(a->lo, b->lo), std::max(a->hi, b->hi)};
        }
        default:
            return std::nullopt;
    }
}

} // namespace aml
