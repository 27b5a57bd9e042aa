// Completeness conditions extracted from a candidate abstraction. One
// initial condition (from Init and the initial states' outgoing predicates)
// plus one condition per (state, distinct incoming predicate) pair: any
// system step from a state satisfying the incoming predicate must land in
// some outgoing predicate of that automaton state.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "aml/automaton.hpp"
#include "aml/system.hpp"

namespace aml {

struct Condition {
    enum Kind { Initial, Step } kind = Step;
    std::string id;
    Expr antecedent;                // Initial: over state variables; Step: over observations
    std::vector<Expr> consequent;   // disjuncts over the next observation; may be empty
    int source_state = -1;          // Step: the automaton state the incoming predicate enters
    std::string source_state_name;
    std::string incoming_text;      // Step: rendered incoming predicate ("init" otherwise)
    std::vector<Valuation> strengthenings; // observation valuations excluded as spurious

    /// r and every accumulated exclusion.
    bool antecedent_holds(const Valuation& v) const {
        if (!eval_predicate(antecedent, v)) return false;
        for (const auto& s : strengthenings)
            if (s == v) return false;
        return true;
    }

    bool consequent_holds(const Valuation& next_obs) const {
        for (const auto& p : consequent)
            if (eval_predicate(p, next_obs)) return true;
        return false;
    }
};

/// Appends the exclusion of one observation valuation to the antecedent.
/// Idempotent: excluding the same valuation twice is a no-op.
inline Condition strengthen(Condition cond, const Valuation& v_t) {
    for (const auto& s : cond.strengthenings)
        if (s == v_t) return cond;
    cond.strengthenings.push_back(v_t);
    return cond;
}

/// Structural extraction: reads only the automaton (plus Init). Ordered
/// deterministically: the initial condition first, then states ascending
/// with incoming predicates in first-edge order.
inline std::vector<Condition> extract_conditions(const SymbolicNfa& m,
                                                 const TransitionSystem& sys) {
    std::vector<Condition> out;

    auto outgoing_of = [&](const std::vector<int>& states) {
        std::vector<Expr> preds;
        std::set<std::string> seen;
        for (int q : states)
            for (int e : m.out_edges(q)) {
                const Expr& label = m.transitions()[static_cast<std::size_t>(e)].label;
                if (seen.insert(render_expr(label)).second) preds.push_back(label);
            }
        return preds;
    };

    Condition init;
    init.kind = Condition::Initial;
    init.id = "init";
    init.antecedent = sys.init();
    init.consequent = outgoing_of(m.initial_states());
    init.incoming_text = "init";
    out.push_back(std::move(init));

    for (int q = 0; q < static_cast<int>(m.state_count()); ++q) {
        std::vector<Expr> incoming;
        std::set<std::string> seen;
        for (const auto& t : m.transitions()) {
            if (t.to != q) continue;
            if (seen.insert(render_expr(t.label)).second) incoming.push_back(t.label);
        }
        std::vector<Expr> outgoing = outgoing_of({q});
        for (std::size_t i = 0; i < incoming.size(); ++i) {
            Condition c;
            c.kind = Condition::Step;
            c.id = "q" + std::to_string(q) + ":in" + std::to_string(i);
            c.antecedent = incoming[i];
            c.consequent = outgoing;
            c.source_state = q;
            c.source_state_name = m.state_names()[static_cast<std::size_t>(q)];
            c.incoming_text = render_expr(incoming[i]);
            out.push_back(std::move(c));
        }
    }
    return out;
}

enum class VerdictKind { Holds, Violated, Vacuous };

struct Verdict {
    VerdictKind kind = VerdictKind::Holds;
    // Violated only. For step conditions both are observation valuations;
    // for the initial condition v_t is the violating initial state valuation.
    Valuation v_t;
    Valuation v_t1;
};

enum class CexClass { Unclassified, Valid, Spurious, Inconclusive };

inline const char* cex_class_name(CexClass c) {
    switch (c) {
        case CexClass::Unclassified: return "unclassified";
        case CexClass::Valid: return "valid";
        case CexClass::Spurious: return "spurious";
        case CexClass::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct ConditionResult {
    std::string condition_id;
    Verdict verdict;
    CexClass classification = CexClass::Unclassified; // Violated only
};

/// Fraction of conditions whose final verdict is holds or vacuous.
inline double alpha(const std::vector<ConditionResult>& results) {
    if (results.empty()) throw Error("alpha of an empty result set");
    std::size_t held = 0;
    for (const auto& r : results)
        if (r.verdict.kind != VerdictKind::Violated) ++held;
    return static_cast<double>(held) / static_cast<double>(results.size());
}

/// One implication per line; the conditions of a complete model are
/// invariants of the system.
inline std::string render_invariant_report(const std::vector<Condition>& conditions,
                                           const std::vector<ConditionResult>* results = nullptr) {
    std::string out;
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        const Condition& c = conditions[i];
        out += c.id;
        if (c.kind == Condition::Step) out += " (state " + c.source_state_name + ")";
        out += ": ";
        std::string ant = render_expr(c.antecedent);
        for (const auto& s : c.strengthenings) {
            std::vector<Expr> eqs;
            ant += " and not (";
            for (std::size_t v = 0; v < s.values.size(); ++v) {
                if (v) ant += " and ";
                ant += s.layout->vars[v].name + " = " +
                       s.layout->vars[v].domain.value_to_string(s.values[v]);
            }
            ant += ")";
        }
        out += ant + "  =>  next ";
        if (c.consequent.empty()) {
            out += "false";
        } else {
            for (std::size_t p = 0; p < c.consequent.size(); ++p) {
                if (p) out += "  \\/  ";
                out += "(" + render_expr(c.consequent[p]) + ")";
            }
        }
        if (results) {
            for (const auto& r : *results)
                if (r.condition_id == c.id) {
                    out += r.verdict.kind == VerdictKind::Holds     ? "   [holds]"
                           : r.verdict.kind == VerdictKind::Vacuous ? "   [vacuous]"
                                                                    : "   [violated]";
                    break;
                }
        }
        out += "\n";
    }
    return out;
}

} // namespace aml
