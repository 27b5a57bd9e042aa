// Nondeterministic finite automata with predicate-labelled transitions over
// valuations of the observed variables. All states accept; a trace is
// rejected only by running into a dead end, so every language here is
// prefix-closed by construction.
#pragma once

#include <set>
#include <algorithm>
#include <deque>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "aml/expr.hpp"
#include "aml/value.hpp"

namespace aml {

struct NfaTransition {
    int from = 0;
    int to = 0;
    Expr label; // typed over the observed layout, unprimed
};

class SymbolicNfa {
public:
    SymbolicNfa() = default;
    SymbolicNfa(LayoutPtr observed, std::vector<std::string> state_names,
                std::vector<int> initial, std::vector<NfaTransition> transitions)
        : observed_(std::move(observed)),
          state_names_(std::move(state_names)),
          initial_(std::move(initial)),
          transitions_(std::move(transitions)) {
        if (state_names_.empty()) throw ValidationError("automaton has no states");
        if (initial_.empty()) throw ValidationError("automaton has no initial state");
        for (int q : initial_) require_state(q);
        for (const auto& t : transitions_) {
            require_state(t.from);
            require_state(t.to);
        }
        out_edges_.assign(state_names_.size(), {});
        for (std::size_t i = 0; i < transitions_.size(); ++i)
            out_edges_[static_cast<std::size_t>(transitions_[i].from)].push_back(
                static_cast<int>(i));
    }

    const LayoutPtr& observed_layout() const { return observed_; }
    std::size_t state_count() const { return state_names_.size(); }
    const std::vector<std::string>& state_names() const { return state_names_; }
    const std::vector<int>& initial_states() const { return initial_; }
    const std::vector<NfaTransition>& transitions() const { return transitions_; }
    const std::vector<int>& out_edges(int state) const {
        return out_edges_[static_cast<std::size_t>(state)];
    }

    /// States reachable from the initial set along transition edges.
    std::vector<bool> reachable_mask() const {
        std::vector<bool> seen(state_names_.size(), false);
        std::deque<int> queue;
        for (int q : initial_) {
            if (!seen[static_cast<std::size_t>(q)]) {
                seen[static_cast<std::size_t>(q)] = true;
                queue.push_back(q);
            }
        }
        while (!queue.empty()) {
            int q = queue.front();
            queue.pop_front();
            for (int e : out_edges_[static_cast<std::size_t>(q)]) {
                int to = transitions_[static_cast<std::size_t>(e)].to;
                if (!seen[static_cast<std::size_t>(to)]) {
                    seen[static_cast<std::size_t>(to)] = true;
                    queue.push_back(to);
                }
            }
        }
        return seen;
    }

    bool all_states_reachable() const {
        auto mask = reachable_mask();
        for (bool b : mask)
            if (!b) return false;
        return true;
    }

    /// Subset-construction walk. Returns the alive state set after each
    /// consumed observation; empty set means the trace was rejected there.
    std::vector<std::vector<int>> run(const std::vector<Valuation>& observations) const {
        std::vector<std::vector<int>> alive_per_step;
        std::vector<int> alive = initial_;
        for (const Valuation& obs : observations) {
            std::unordered_set<int> next;
            for (int q : alive)
                for (int e : out_edges_[static_cast<std::size_t>(q)]) {
                    const NfaTransition& t = transitions_[static_cast<std::size_t>(e)];
                    if (eval_predicate(t.label, obs)) next.insert(t.to);
                }
            alive.assign(next.begin(), next.end());
            std::sort(alive.begin(), alive.end());
            alive_per_step.push_back(alive);
            if (alive.empty()) break;
        }
        return alive_per_step;
    }

    bool accepts(const std::vector<Valuation>& observations) const {
        std::vector<int> alive = initial_;
        for (const Valuation& obs : observations) {
            std::unordered_set<int> next;
            for (int q : alive)
                for (int e : out_edges_[static_cast<std::size_t>(q)]) {
                    const NfaTransition& t = transitions_[static_cast<std::size_t>(e)];
                    if (eval_predicate(t.label, obs)) next.insert(t.to);
                }
            if (next.empty()) return false;
            alive.assign(next.begin(), next.end());
        }
        return true;
    }

    std::string to_dot() const {
        std::string s = "digraph abstraction {\n  rankdir=LR;\n  node [shape=circle];\n";
        for (std::size_t i = 0; i < initial_.size(); ++i) {
            s += "  __start" + std::to_string(i) + " [shape=point];\n";
            s += "  __start" + std::to_string(i) + " -> q" + std::to_string(initial_[i]) + ";\n";
        }
        for (std::size_t i = 0; i < state_names_.size(); ++i)
            s += "  q" + std::to_string(i) + " [label=\"" + state_names_[i] + "\"];\n";
        for (const auto& t : transitions_) {
            std::string label = render_expr(t.label);
            std::string esc;
            for (char c : label) {
                if (c == '"' || c == '\\') esc += '\\';
                esc += c;
            }
            s += "  q" + std::to_string(t.from) + " -> q" + std::to_string(t.to) + " [label=\"" +
                 esc + "\"];\n";
        }
        return s + "}\n";
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format"] = "aml-model";
        nlohmann::json vars = nlohmann::json::array();
        for (const auto& v : observed_->vars)
            vars.push_back({{"name", v.name}, {"domain", v.domain.to_string()}});
        j["variables"] = vars;
        nlohmann::json states = nlohmann::json::array();
        for (std::size_t i = 0; i < state_names_.size(); ++i)
            states.push_back({{"id", i}, {"name", state_names_[i]}});
        j["states"] = states;
        j["initial"] = initial_;
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& t : transitions_)
            edges.push_back({{"from", t.from}, {"to", t.to}, {"label", render_expr(t.label)}});
        j["transitions"] = edges;
        return j;
    }

private:
    void require_state(int q) const {
        if (q < 0 || static_cast<std::size_t>(q) >= state_names_.size())
            throw ValidationError("automaton references unknown state id " + std::to_string(q));
    }

    LayoutPtr observed_;
    std::vector<std::string> state_names_;
    std::vector<int> initial_;
    std::vector<NfaTransition> transitions_;
    std::vector<std::vector<int>> out_edges_;
};

/// Semantic equality of two predicates over a finite observation space,
/// decided by enumeration.
inline bool predicates_equivalent(const Expr& a, const Expr& b, const LayoutPtr& observed,
                                  std::uint64_t cap = 1ULL << 22) {
    ValuationEnumerator e(observed, cap);
    while (!e.done()) {
        Valuation v = e.current();
        if (eval_predicate(a, v) != eval_predicate(b, v)) return false;
        e.advance();
    }
    return true;
}

} // namespace aml
