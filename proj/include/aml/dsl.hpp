// Text format for system definitions and reference automata (.ts-dsl).
// Line-oriented: one statement per line (or ';'-separated), '#' comments.
//
//   state s: enum { Off, On } observe
//   input temp: int[0..9] observe
//   init s = Off
//   k 6
//   on temp >= 8 { s' = On }
//   on temp <= 2 { s' = Off }
//   otherwise { s' = s }
//   reference {
//     states q0 q1
//     initial q0
//     edge q0 -> q0 [ s = Off and temp <= 7 ]
//     ...
//   }
#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "aml/automaton.hpp"
#include "aml/expr.hpp"
#include "aml/system.hpp"

namespace aml {

namespace dsl {

enum class TokKind { End, Newline, Ident, Int, Sym };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    std::int64_t value = 0;
    int line = 1, column = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> lex() {
        std::vector<Token> out;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            if (c == '\n') {
                out.push_back(make(TokKind::Newline, "\n"));
                advance();
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                Token t = make(TokKind::Int, "");
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    t.text += src_[pos_];
                    advance();
                }
                t.value = std::stoll(t.text);
                out.push_back(std::move(t));
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                Token t = make(TokKind::Ident, "");
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                    t.text += src_[pos_];
                    advance();
                }
                out.push_back(std::move(t));
                continue;
            }
            // multi-char symbols first
            static const char* two[] = {"->", "..", "!=", "<=", ">="};
            bool matched = false;
            for (const char* s : two) {
                if (src_.compare(pos_, 2, s) == 0) {
                    out.push_back(make(TokKind::Sym, s));
                    advance();
                    advance();
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            static const std::string singles = ":;{}[]()'=<>+-*,";
            if (singles.find(c) != std::string::npos) {
                out.push_back(make(TokKind::Sym, std::string(1, c)));
                advance();
                continue;
            }
            throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
        }
        out.push_back(make(TokKind::End, ""));
        return out;
    }

private:
    Token make(TokKind k, std::string text) {
        Token t;
        t.kind = k;
        t.text = std::move(text);
        t.line = line_;
        t.column = col_;
        return t;
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

struct RawAssignment {
    std::string target;
    Expr value;
    int line = 0, column = 0;
};

struct RawCommand {
    Expr guard; // invalid() for `otherwise`
    bool is_otherwise = false;
    std::vector<RawAssignment> assignments;
    int line = 0, column = 0;
};

struct RawEdge {
    std::string from, to;
    Expr label;
    int line = 0, column = 0;
};

struct RawReference {
    std::vector<std::string> states;
    std::vector<std::string> initial;
    std::vector<RawEdge> edges;
};

struct RawSystem {
    std::vector<VariableDecl> variables;
    Expr init;
    int declared_k = 0;
    std::vector<RawCommand> commands;
    std::optional<RawReference> reference;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    RawSystem parse_document() {
        RawSystem sys;
        skip_separators();
        while (!at_end()) {
            const Token& t = peek();
            if (is_kw(t, "state") || is_kw(t, "input")) {
                parse_var_decl(sys);
            } else if (is_kw(t, "init")) {
                next();
                if (sys.init.valid()) fail(t, "duplicate init declaration");
                sys.init = parse_expr();
            } else if (is_kw(t, "k")) {
                next();
                const Token& v = expect(TokKind::Int, "induction bound");
                if (v.value < 2) fail(v, "k must be at least 2");
                sys.declared_k = static_cast<int>(v.value);
            } else if (is_kw(t, "on") || is_kw(t, "otherwise")) {
                sys.commands.push_back(parse_command());
            } else if (is_kw(t, "reference")) {
                if (sys.reference) fail(t, "duplicate reference block");
                sys.reference = parse_reference();
            } else {
                fail(t, "expected a declaration ('state', 'input', 'init', 'k', 'on', "
                        "'otherwise' or 'reference')");
            }
            end_statement();
        }
        if (!sys.init.valid())
            throw ParseError("missing init declaration", 1, 1);
        return sys;
    }

    /// Entry point for a bare predicate (model labels, tests).
    Expr parse_bare_expr() {
        skip_separators();
        Expr e = parse_expr();
        skip_separators();
        if (!at_end()) fail(peek(), "trailing input after expression");
        return e;
    }

private:
    // -- statements ---------------------------------------------------------

    void parse_var_decl(RawSystem& sys) {
        const Token& kw = next();
        VariableDecl d;
        d.role = kw.text == "state" ? VarRole::State : VarRole::Input;
        const Token& name = expect(TokKind::Ident, "variable name");
        if (is_keyword(name.text)) fail(name, "'" + name.text + "' is a reserved word");
        d.name = name.text;
        for (const auto& prev : sys.variables)
            if (prev.name == d.name) fail(name, "duplicate variable '" + d.name + "'");
        expect_sym(":");
        d.domain = parse_domain();
        if (peek().kind == TokKind::Ident && peek().text == "observe") {
            next();
            d.observed = true;
        }
        sys.variables.push_back(std::move(d));
    }

    Domain parse_domain() {
        const Token& t = next();
        if (is_kw(t, "bool")) return Domain::boolean();
        if (is_kw(t, "int")) {
            expect_sym("[");
            std::int64_t lo = parse_signed_int();
            const Token& dots = peek();
            expect_sym("..");
            std::int64_t hi = parse_signed_int();
            expect_sym("]");
            if (lo > hi)
                throw ParseError("int domain has lo > hi: [" + std::to_string(lo) + ".." +
                                     std::to_string(hi) + "]",
                                 dots.line, dots.column);
            return Domain::bounded_int(lo, hi);
        }
        if (is_kw(t, "enum")) {
            expect_sym("{");
            std::vector<std::string> labels;
            while (true) {
                const Token& l = expect(TokKind::Ident, "enum label");
                if (is_keyword(l.text)) fail(l, "'" + l.text + "' is a reserved word");
                for (const auto& prev : labels)
                    if (prev == l.text) fail(l, "duplicate enum label '" + l.text + "'");
                labels.push_back(l.text);
                if (peek_sym(",")) {
                    next();
                    continue;
                }
                break;
            }
            expect_sym("}");
            return Domain::enumeration(std::move(labels));
        }
        fail(t, "expected a domain ('bool', 'int[lo..hi]' or 'enum { ... }')");
    }

    std::int64_t parse_signed_int() {
        bool neg = false;
        if (peek_sym("-")) {
            next();
            neg = true;
        }
        const Token& t = expect(TokKind::Int, "integer");
        return neg ? -t.value : t.value;
    }

    RawCommand parse_command() {
        const Token& kw = next();
        RawCommand cmd;
        cmd.line = kw.line;
        cmd.column = kw.column;
        if (kw.text == "otherwise") {
            cmd.is_otherwise = true;
        } else {
            cmd.guard = parse_expr();
        }
        expect_sym("{");
        skip_separators();
        while (!peek_sym("}")) {
            RawAssignment a;
            const Token& name = expect(TokKind::Ident, "assignment target");
            a.target = name.text;
            a.line = name.line;
            a.column = name.column;
            expect_sym("'");
            expect_sym("=");
            a.value = parse_expr();
            cmd.assignments.push_back(std::move(a));
            if (peek_sym(";") || peek().kind == TokKind::Newline) {
                skip_separators();
                continue;
            }
            break;
        }
        expect_sym("}");
        return cmd;
    }

    RawReference parse_reference() {
        next(); // 'reference'
        expect_sym("{");
        skip_separators();
        RawReference ref;
        while (!peek_sym("}")) {
            const Token& t = peek();
            if (is_kw(t, "states")) {
                next();
                while (peek().kind == TokKind::Ident) ref.states.push_back(next().text);
                if (ref.states.empty()) fail(t, "'states' lists no state names");
            } else if (is_kw(t, "initial")) {
                next();
                while (peek().kind == TokKind::Ident) ref.initial.push_back(next().text);
                if (ref.initial.empty()) fail(t, "'initial' lists no state names");
            } else if (is_kw(t, "edge")) {
                next();
                RawEdge e;
                e.line = t.line;
                e.column = t.column;
                e.from = expect(TokKind::Ident, "source state").text;
                expect_sym("->");
                e.to = expect(TokKind::Ident, "target state").text;
                expect_sym("[");
                e.label = parse_expr();
                expect_sym("]");
                ref.edges.push_back(std::move(e));
            } else {
                fail(t, "expected 'states', 'initial' or 'edge'");
            }
            skip_separators();
        }
        expect_sym("}");
        return ref;
    }

    // -- expressions --------------------------------------------------------

    Expr parse_expr() { return parse_or(); }

    Expr parse_or() {
        Expr e = parse_and();
        while (is_kw(peek(), "or")) {
            next();
            e = exprs::or_(e, parse_and());
        }
        return e;
    }

    Expr parse_and() {
        Expr e = parse_not();
        while (is_kw(peek(), "and")) {
            next();
            e = exprs::and_(e, parse_not());
        }
        return e;
    }

    Expr parse_not() {
        if (is_kw(peek(), "not")) {
            next();
            return exprs::not_(parse_not());
        }
        return parse_cmp();
    }

    Expr parse_cmp() {
        Expr e = parse_add();
        const Token& t = peek();
        CmpOp op;
        if (peek_sym("=")) op = CmpOp::Eq;
        else if (peek_sym("!=")) op = CmpOp::Ne;
        else if (peek_sym("<")) op = CmpOp::Lt;
        else if (peek_sym("<=")) op = CmpOp::Le;
        else if (peek_sym(">")) op = CmpOp::Gt;
        else if (peek_sym(">=")) op = CmpOp::Ge;
        else return e;
        next();
        (void)t;
        return exprs::cmp(op, e, parse_add());
    }

    Expr parse_add() {
        Expr e = parse_mul();
        while (peek_sym("+") || peek_sym("-")) {
            bool plus = next().text == "+";
            Expr rhs = parse_mul();
            e = plus ? exprs::add(e, rhs) : exprs::sub(e, rhs);
        }
        return e;
    }

    Expr parse_mul() {
        Expr e = parse_unary();
        while (peek_sym("*") || is_kw(peek(), "mod")) {
            bool times = next().text == "*";
            Expr rhs = parse_unary();
            e = times ? exprs::mul(e, rhs) : exprs::mod(e, rhs);
        }
        return e;
    }

    Expr parse_unary() {
        if (peek_sym("-")) {
            const Token& t = next();
            Expr inner = parse_unary();
            if (inner.kind() == ExprKind::IntLit)
                return exprs::int_lit(-inner.node().value);
            (void)t;
            return exprs::sub(exprs::int_lit(0), inner);
        }
        return parse_primary();
    }

    Expr parse_primary() {
        const Token& t = peek();
        if (t.kind == TokKind::Int) {
            next();
            return exprs::int_lit(t.value);
        }
        if (peek_sym("(")) {
            next();
            Expr e = parse_expr();
            expect_sym(")");
            return e;
        }
        if (t.kind == TokKind::Ident) {
            if (t.text == "true" || t.text == "false") {
                next();
                return exprs::bool_lit(t.text == "true");
            }
            if (t.text == "if") {
                next();
                Expr c = parse_expr();
                if (!is_kw(peek(), "then")) fail(peek(), "expected 'then'");
                next();
                Expr a = parse_expr();
                if (!is_kw(peek(), "else")) fail(peek(), "expected 'else'");
                next();
                Expr b = parse_expr();
                return exprs::ite(c, a, b);
            }
            if (is_keyword(t.text)) fail(t, "unexpected keyword '" + t.text + "' in expression");
            next();
            bool primed = false;
            if (peek_sym("'")) {
                next();
                primed = true;
            }
            // Variables and enum labels are both bare identifiers here;
            // typing tells them apart against the scope.
            ExprNode n{ExprKind::VarRef};
            n.name = t.text;
            n.primed = primed;
            n.line = t.line;
            n.column = t.column;
            return Expr::make(std::move(n));
        }
        fail(t, "expected an expression");
    }

    // -- plumbing ------------------------------------------------------------

    static bool is_keyword(const std::string& s) {
        static const char* kws[] = {"state", "input", "bool", "int", "enum", "observe", "init",
                                    "k", "on", "otherwise", "reference", "states", "initial",
                                    "edge", "true", "false", "and", "or", "not", "mod", "if",
                                    "then", "else"};
        for (const char* k : kws)
            if (s == k) return true;
        return false;
    }

    static bool is_kw(const Token& t, const char* k) {
        return t.kind == TokKind::Ident && t.text == k;
    }

    bool at_end() const { return toks_[pos_].kind == TokKind::End; }
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    bool peek_sym(const char* s) const {
        return peek().kind == TokKind::Sym && peek().text == s;
    }

    const Token& expect(TokKind k, const char* what) {
        if (peek().kind != k) fail(peek(), std::string("expected ") + what);
        return next();
    }

    void expect_sym(const char* s) {
        if (!peek_sym(s)) fail(peek(), std::string("expected '") + s + "'");
        next();
    }

    void skip_separators() {
        while (peek().kind == TokKind::Newline || peek_sym(";")) next();
    }

    void end_statement() {
        if (at_end()) return;
        if (peek().kind != TokKind::Newline && !peek_sym(";"))
            fail(peek(), "expected end of statement");
        skip_separators();
    }

    [[noreturn]] void fail(const Token& t, const std::string& msg) const {
        std::string got = t.kind == TokKind::End ? "end of input"
                          : t.kind == TokKind::Newline ? "end of line"
                                                       : "'" + t.text + "'";
        throw ParseError(msg + " (got " + got + ")", t.line, t.column);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace dsl

struct ParsedSystem {
    TransitionSystem system;
    std::optional<SymbolicNfa> reference;
};

/// Parses and fully validates a .ts-dsl document.
inline ParsedSystem parse_system(const std::string& text, const SystemLimits& limits = {}) {
    dsl::Parser parser(dsl::Lexer(text).lex());
    dsl::RawSystem raw = parser.parse_document();

    // Desugar `otherwise`: the negation of the disjunction of all prior guards.
    std::vector<GuardedCommand> commands;
    bool saw_otherwise = false;
    for (std::size_t i = 0; i < raw.commands.size(); ++i) {
        const auto& rc = raw.commands[i];
        if (saw_otherwise) throw ParseError("'otherwise' must be the last command", rc.line, rc.column);
        GuardedCommand gc;
        if (rc.is_otherwise) {
            saw_otherwise = true;
            if (i == 0) {
                gc.guard = exprs::bool_lit(true);
            } else {
                std::vector<Expr> prior;
                for (std::size_t j = 0; j < i; ++j) prior.push_back(commands[j].guard);
                gc.guard = exprs::not_(exprs::any_of(prior));
            }
            gc.is_otherwise = true;
        } else {
            gc.guard = rc.guard;
        }
        for (const auto& a : rc.assignments) gc.assignments.push_back({a.target, a.value, -1});
        commands.push_back(std::move(gc));
    }

    TransitionSystem system(raw.variables, raw.init, std::move(commands), raw.declared_k, limits);

    std::optional<SymbolicNfa> reference;
    if (raw.reference) {
        const auto& rr = *raw.reference;
        std::vector<std::string> names = rr.states;
        auto state_id = [&](const std::string& n, int line, int col) {
            for (std::size_t i = 0; i < names.size(); ++i)
                if (names[i] == n) return static_cast<int>(i);
            throw ParseError("unknown reference state '" + n + "'", line, col);
        };
        std::vector<int> initial;
        for (const auto& n : rr.initial) initial.push_back(state_id(n, 0, 0));
        std::vector<NfaTransition> edges;
        for (const auto& e : rr.edges) {
            NfaTransition t;
            t.from = state_id(e.from, e.line, e.column);
            t.to = state_id(e.to, e.line, e.column);
            t.label = type_expr(e.label, *system.observed_layout(), false);
            edges.push_back(std::move(t));
        }
        reference.emplace(system.observed_layout(), std::move(names), std::move(initial),
                          std::move(edges));
        if (!reference->all_states_reachable())
            throw ValidationError("reference automaton has states unreachable from its initial set");
    }
    return ParsedSystem{std::move(system), std::move(reference)};
}

/// Parses a bare predicate against a variable layout (model import, tests).
inline Expr parse_predicate(const std::string& text, const VariableLayout& layout,
                            bool allow_primed = false) {
    dsl::Parser parser(dsl::Lexer(text).lex());
    return type_expr(parser.parse_bare_expr(), layout, allow_primed);
}

/// Canonical text for a system (and optional reference). parse(render(s))
/// is structurally identical to s; no boolean simplification happens.
inline std::string render_system(const TransitionSystem& sys,
                                 const SymbolicNfa* reference = nullptr) {
    std::string out;
    for (const auto& v : sys.full_layout()->vars) {
        out += v.role == VarRole::State ? "state " : "input ";
        out += v.name + ": " + v.domain.to_string();
        if (v.observed) out += " observe";
        out += "\n";
    }
    out += "init " + render_expr(sys.init()) + "\n";
    if (sys.declared_k() > 0) out += "k " + std::to_string(sys.declared_k()) + "\n";
    for (const auto& c : sys.commands()) {
        out += c.is_otherwise ? "otherwise" : "on " + render_expr(c.guard);
        out += " {";
        for (std::size_t i = 0; i < c.assignments.size(); ++i) {
            out += i ? "; " : " ";
            out += c.assignments[i].target + "' = " + render_expr(c.assignments[i].value);
        }
        out += c.assignments.empty() ? "}" : " }";
        out += "\n";
    }
    if (reference) {
        out += "reference {\n  states";
        for (const auto& n : reference->state_names()) out += " " + n;
        out += "\n  initial";
        for (int q : reference->initial_states())
            out += " " + reference->state_names()[static_cast<std::size_t>(q)];
        out += "\n";
        for (const auto& t : reference->transitions()) {
            out += "  edge " + reference->state_names()[static_cast<std::size_t>(t.from)] + " -> " +
                   reference->state_names()[static_cast<std::size_t>(t.to)] + " [ " +
                   render_expr(t.label) + " ]\n";
        }
        out += "}\n";
    }
    return out;
}

/// Rebuilds an automaton from its JSON export; labels are re-parsed
/// against the given observed layout.
inline SymbolicNfa nfa_from_json(const nlohmann::json& j, const LayoutPtr& observed) {
    if (!j.contains("states") || !j.contains("initial") || !j.contains("transitions"))
        throw ValidationError("model JSON lacks states/initial/transitions");
    if (j.contains("variables")) {
        const auto& vars = j.at("variables");
        if (vars.size() != observed->vars.size())
            throw ValidationError("model observes " + std::to_string(vars.size()) +
                                  " variables but the system observes " +
                                  std::to_string(observed->vars.size()));
        for (std::size_t i = 0; i < observed->vars.size(); ++i) {
            std::string name = vars.at(i).at("name").get<std::string>();
            if (name != observed->vars[i].name)
                throw ValidationError("model variable '" + name + "' does not match observed '" +
                                      observed->vars[i].name + "'");
        }
    }
    std::vector<std::string> names;
    for (const auto& s : j.at("states")) names.push_back(s.at("name").get<std::string>());
    std::vector<int> initial = j.at("initial").get<std::vector<int>>();
    std::vector<NfaTransition> edges;
    for (const auto& e : j.at("transitions")) {
        NfaTransition t;
        t.from = e.at("from").get<int>();
        t.to = e.at("to").get<int>();
        t.label = parse_predicate(e.at("label").get<std::string>(), *observed);
        edges.push_back(std::move(t));
    }
    return SymbolicNfa(observed, std::move(names), std::move(initial), std::move(edges));
}

} // namespace aml
