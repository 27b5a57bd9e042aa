// Condition verification by exhaustive enumeration over finite domains.
//
// check_condition mirrors a 1-induction assume/assert proof: it quantifies
// over *arbitrary* states satisfying the antecedent, not only reachable
// ones, so a violation may name an unreachable state. is_spurious settles
// that with k-induction: a bounded breadth-first base case from the initial
// states plus a step case searching for a k-window over arbitrary states
// ending in the disputed valuation. Base and step both holding proves the
// counterexample spurious; a failing step case alone is inconclusive.
#pragma once

#include <set>
#include <deque>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "aml/conditions.hpp"
#include "aml/system.hpp"

namespace aml {

struct CheckerConfig {
    int k = 2;                                 // spuriousness induction depth, >= 2
    std::uint64_t enumeration_cap = 1ULL << 22; // state x input work bound
    std::uint64_t oracle_cap = 1ULL << 20;      // reachability / product-search node bound
};

namespace detail {

/// The checker's configuration space: a system state plus the observed
/// part of the input consumed on entry. When no input is observed this
/// degenerates to the state space.
class ConfigSpace {
public:
    explicit ConfigSpace(const TransitionSystem& sys) : sys_(sys) {
        std::vector<VariableDecl> vars = sys.state_layout()->vars;
        state_size_ = vars.size();
        for (const auto& v : sys.observed_input_layout()->vars) vars.push_back(v);
        layout_ = make_layout(std::move(vars));
    }

    const LayoutPtr& layout() const { return layout_; }

    std::uint64_t space_size(std::uint64_t cap) const { return layout_->space_size(cap); }

    /// Work bound for one exhaustive pass: configs times full input space.
    void require_within(std::uint64_t cap) const {
        unsigned __int128 work = 1;
        for (const auto& v : layout_->vars) work *= v.domain.cardinality();
        for (const auto& v : sys_.input_layout()->vars) work *= v.domain.cardinality();
        if (work > cap)
            throw CapacityError("condition check needs " +
                                std::to_string(static_cast<std::uint64_t>(
                                    work > ~0ULL ? ~0ULL : static_cast<std::uint64_t>(work))) +
                                " evaluations, cap is " + std::to_string(cap));
    }

    Valuation state_of(const Valuation& config) const {
        std::vector<std::int64_t> vals(config.values.begin(),
                                       config.values.begin() + static_cast<std::ptrdiff_t>(state_size_));
        return Valuation(sys_.state_layout(), std::move(vals));
    }

    Valuation obs_input_of(const Valuation& config) const {
        std::vector<std::int64_t> vals(config.values.begin() + static_cast<std::ptrdiff_t>(state_size_),
                                       config.values.end());
        return Valuation(sys_.observed_input_layout(), std::move(vals));
    }

    Valuation make(const Valuation& state, const Valuation& obs_input) const {
        std::vector<std::int64_t> vals = state.values;
        vals.insert(vals.end(), obs_input.values.begin(), obs_input.values.end());
        return Valuation(layout_, std::move(vals));
    }

    /// The observation consumed on entry to this configuration.
    Valuation observation(const Valuation& config) const {
        return sys_.make_observation_obs_input(state_of(config), obs_input_of(config));
    }

    /// Successor configuration under one full input valuation.
    Valuation next(const Valuation& config, const Valuation& input) const {
        return make(sys_.step(state_of(config), input), sys_.project_observed_input(input));
    }

private:
    const TransitionSystem& sys_;
    LayoutPtr layout_;
    std::size_t state_size_ = 0;
};

} // namespace detail

/// Exhaustive 1-induction check of one condition. Enumeration order is
/// lexicographic (declaration order, then domain order), so the first
/// counterexample is reproducible.
inline Verdict check_condition(const TransitionSystem& sys, const Condition& cond,
                               const CheckerConfig& cfg) {
    detail::ConfigSpace configs(sys);
    configs.require_within(cfg.enumeration_cap);
    bool antecedent_seen = false;

    if (cond.kind == Condition::Initial) {
        ValuationEnumerator states(sys.state_layout(), cfg.enumeration_cap);
        while (!states.done()) {
            Valuation s0 = states.current();
            if (eval_predicate(cond.antecedent, s0)) {
                antecedent_seen = true;
                ValuationEnumerator inputs(sys.input_layout(), cfg.enumeration_cap);
                while (!inputs.done()) {
                    Valuation u = inputs.current();
                    Valuation obs1 = sys.make_observation(sys.step(s0, u), u);
                    if (!cond.consequent_holds(obs1)) {
                        Verdict v;
                        v.kind = VerdictKind::Violated;
                        v.v_t = s0;
                        v.v_t1 = obs1;
                        return v;
                    }
                    inputs.advance();
                }
            }
            states.advance();
        }
        return Verdict{antecedent_seen ? VerdictKind::Holds : VerdictKind::Vacuous, {}, {}};
    }

    ValuationEnumerator cfgs(configs.layout(), cfg.enumeration_cap);
    while (!cfgs.done()) {
        Valuation c = cfgs.current();
        Valuation obs = configs.observation(c);
        if (cond.antecedent_holds(obs)) {
            antecedent_seen = true;
            Valuation state = configs.state_of(c);
            ValuationEnumerator inputs(sys.input_layout(), cfg.enumeration_cap);
            while (!inputs.done()) {
                Valuation u = inputs.current();
                Valuation nxt = sys.step(state, u);
                Valuation obs1 = sys.make_observation(nxt, u);
                if (!cond.consequent_holds(obs1)) {
                    Verdict v;
                    v.kind = VerdictKind::Violated;
                    v.v_t = obs;
                    v.v_t1 = obs1;
                    return v;
                }
                inputs.advance();
            }
        }
        cfgs.advance();
    }
    return Verdict{antecedent_seen ? VerdictKind::Holds : VerdictKind::Vacuous, {}, {}};
}

struct SpuriousResult {
    enum Kind { Spurious, Reachable, Inconclusive } kind = Spurious;
    std::vector<Valuation> witness; // Reachable: init-to-v_t observations;
                                    // Inconclusive: the failing step-case window
};

/// k-induction spuriousness check of a violated step condition's v_t
/// (an observation valuation).
///
/// Base case: breadth-first search from the initial states to depth k,
/// observing the initial state itself at depth 0 (with the observed input
/// part unconstrained, matching a havocked first input). Step case: search
/// for a window of k configurations, the first k-1 avoiding v_t, the last
/// equal to it, over arbitrary start states.
inline SpuriousResult is_spurious(const TransitionSystem& sys, const Valuation& v_t,
                                  const CheckerConfig& cfg) {
    if (cfg.k < 2) throw Error("spuriousness check needs k >= 2");
    detail::ConfigSpace configs(sys);
    configs.require_within(cfg.enumeration_cap);

    auto obs_matches = [&](const Valuation& config) { return configs.observation(config) == v_t; };

    // --- base case ---------------------------------------------------------
    struct Node {
        Valuation config;
        int parent;
    };
    std::vector<Node> nodes;
    std::unordered_set<Valuation, ValuationHash, ValuationEq> visited;
    std::deque<std::pair<std::size_t, int>> queue; // (node index, depth)

    auto witness_of = [&](std::size_t idx) {
        std::vector<Valuation> path;
        for (int i = static_cast<int>(idx); i >= 0; i = nodes[static_cast<std::size_t>(i)].parent)
            path.push_back(configs.observation(nodes[static_cast<std::size_t>(i)].config));
        std::reverse(path.begin(), path.end());
        return path;
    };

    {
        ValuationEnumerator states(sys.state_layout(), cfg.enumeration_cap);
        while (!states.done()) {
            Valuation s0 = states.current();
            if (eval_predicate(sys.init(), s0)) {
                ValuationEnumerator obs_inputs(sys.observed_input_layout(), cfg.enumeration_cap);
                while (!obs_inputs.done()) {
                    Valuation c0 = configs.make(s0, obs_inputs.current());
                    if (visited.insert(c0).second) {
                        nodes.push_back({c0, -1});
                        if (obs_matches(c0)) return {SpuriousResult::Reachable, witness_of(nodes.size() - 1)};
                        queue.emplace_back(nodes.size() - 1, 0);
                    }
                    obs_inputs.advance();
                }
            }
            states.advance();
        }
    }
    while (!queue.empty()) {
        auto [idx, depth] = queue.front();
        queue.pop_front();
        if (depth >= cfg.k) continue;
        Valuation config = nodes[idx].config;
        ValuationEnumerator inputs(sys.input_layout(), cfg.enumeration_cap);
        while (!inputs.done()) {
            Valuation nxt = configs.next(config, inputs.current());
            if (visited.insert(nxt).second) {
                if (nodes.size() + 1 > cfg.oracle_cap)
                    throw CapacityError("spuriousness base case exceeds the oracle cap");
                nodes.push_back({nxt, static_cast<int>(idx)});
                if (obs_matches(nxt)) return {SpuriousResult::Reachable, witness_of(nodes.size() - 1)};
                queue.emplace_back(nodes.size() - 1, depth + 1);
            }
            inputs.advance();
        }
    }

    // --- step case ---------------------------------------------------------
    // layers[j] = configs from which v_t is hit at window position k-1,
    // avoiding it strictly before. Built backwards from the matching set.
    using ConfigSet = std::unordered_set<Valuation, ValuationHash, ValuationEq>;
    ConfigSet layer;
    {
        ValuationEnumerator all(configs.layout(), cfg.enumeration_cap);
        while (!all.done()) {
            Valuation c = all.current();
            if (obs_matches(c)) layer.insert(c);
            all.advance();
        }
    }
    std::vector<ConfigSet> layers(static_cast<std::size_t>(cfg.k));
    layers[static_cast<std::size_t>(cfg.k - 1)] = std::move(layer);
    for (int j = cfg.k - 2; j >= 0; --j) {
        ConfigSet prev;
        const ConfigSet& next_layer = layers[static_cast<std::size_t>(j + 1)];
        if (!next_layer.empty()) {
            ValuationEnumerator all(configs.layout(), cfg.enumeration_cap);
            while (!all.done()) {
                Valuation c = all.current();
                if (!obs_matches(c)) {
                    ValuationEnumerator inputs(sys.input_layout(), cfg.enumeration_cap);
                    while (!inputs.done()) {
                        if (next_layer.count(configs.next(c, inputs.current()))) {
                            prev.insert(c);
                            break;
                        }
                        inputs.advance();
                    }
                }
                all.advance();
            }
        }
        layers[static_cast<std::size_t>(j)] = std::move(prev);
    }

    if (layers[0].empty()) return {SpuriousResult::Spurious, {}};

    // Deterministic witness: lexicographically least start, then least input.
    std::vector<Valuation> window;
    Valuation at;
    {
        ValuationEnumerator all(configs.layout(), cfg.enumeration_cap);
        while (!all.done()) {
            if (layers[0].count(all.current())) {
                at = all.current();
                break;
            }
            all.advance();
        }
    }
    window.push_back(configs.observation(at));
    for (int j = 1; j < cfg.k; ++j) {
        ValuationEnumerator inputs(sys.input_layout(), cfg.enumeration_cap);
        while (!inputs.done()) {
            Valuation nxt = configs.next(at, inputs.current());
            if (layers[static_cast<std::size_t>(j)].count(nxt)) {
                at = nxt;
                break;
            }
            inputs.advance();
        }
        window.push_back(configs.observation(at));
    }
    return {SpuriousResult::Inconclusive, std::move(window)};
}

/// True iff a reachable-verdict witness replays: its first observation is
/// produced directly by an initial state with a havocked input, and each
/// following observation by a consecutive step.
inline bool witness_replays(const TransitionSystem& sys, const std::vector<Valuation>& witness,
                            std::uint64_t cap = 1ULL << 22) {
    if (witness.empty()) return false;
    detail::ConfigSpace configs(sys);
    std::unordered_set<Valuation, ValuationHash, ValuationEq> alive;
    ValuationEnumerator states(sys.state_layout(), cap);
    while (!states.done()) {
        Valuation s0 = states.current();
        if (eval_predicate(sys.init(), s0)) {
            ValuationEnumerator obs_inputs(sys.observed_input_layout(), cap);
            while (!obs_inputs.done()) {
                Valuation c0 = configs.make(s0, obs_inputs.current());
                if (configs.observation(c0) == witness[0]) alive.insert(c0);
                obs_inputs.advance();
            }
        }
        states.advance();
    }
    for (std::size_t i = 1; i < witness.size(); ++i) {
        std::unordered_set<Valuation, ValuationHash, ValuationEq> next_alive;
        for (const auto& c : alive) {
            ValuationEnumerator inputs(sys.input_layout(), cap);
            while (!inputs.done()) {
                Valuation nxt = configs.next(c, inputs.current());
                if (configs.observation(nxt) == witness[i]) next_alive.insert(nxt);
                inputs.advance();
            }
        }
        if (next_alive.empty()) return false;
        alive = std::move(next_alive);
    }
    return !alive.empty();
}

/// Every observation valuation any execution can produce, the initial
/// havocked observation included. The exact oracle spuriousness verdicts
/// are cross-checked against.
inline std::vector<Valuation> reachable_observations(const TransitionSystem& sys,
                                                     std::uint64_t cap) {
    detail::ConfigSpace configs(sys);
    std::unordered_set<Valuation, ValuationHash, ValuationEq> visited;
    std::unordered_set<Valuation, ValuationHash, ValuationEq> seen_obs;
    std::vector<Valuation> obs_order;
    std::deque<Valuation> queue;
    ValuationEnumerator states(sys.state_layout(), cap);
    while (!states.done()) {
        Valuation s0 = states.current();
        if (eval_predicate(sys.init(), s0)) {
            ValuationEnumerator obs_inputs(sys.observed_input_layout(), cap);
            while (!obs_inputs.done()) {
                Valuation c0 = configs.make(s0, obs_inputs.current());
                if (visited.insert(c0).second) queue.push_back(c0);
                obs_inputs.advance();
            }
        }
        states.advance();
    }
    for (const auto& c : visited)
        if (seen_obs.insert(configs.observation(c)).second)
            obs_order.push_back(configs.observation(c));
    while (!queue.empty()) {
        Valuation c = queue.front();
        queue.pop_front();
        ValuationEnumerator inputs(sys.input_layout(), cap);
        while (!inputs.done()) {
            Valuation nxt = configs.next(c, inputs.current());
            if (visited.insert(nxt).second) {
                if (visited.size() > cap)
                    throw CapacityError("reachable observation set exceeds the cap");
                if (seen_obs.insert(configs.observation(nxt)).second)
                    obs_order.push_back(configs.observation(nxt));
                queue.push_back(nxt);
            }
            inputs.advance();
        }
    }
    return obs_order;
}

struct InclusionResult {
    bool holds = true;
    std::vector<Valuation> counterexample; // a positive trace the automaton rejects
};

/// Exhaustive trace-inclusion oracle: breadth-first product search over
/// (reachable system state, alive automaton state set). A transition whose
/// observation empties the alive set yields a rejected positive trace.
inline InclusionResult trace_inclusion_oracle(const TransitionSystem& sys, const SymbolicNfa& m,
                                              const CheckerConfig& cfg) {
    struct Node {
        Valuation state;
        std::vector<int> alive;
        int parent;
        Valuation obs;
    };
    auto key_of = [](const Valuation& state, const std::vector<int>& alive) {
        std::string k;
        for (std::int64_t v : state.values) {
            k += std::to_string(v);
            k += ',';
        }
        k += '|';
        for (int q : alive) {
            k += std::to_string(q);
            k += ',';
        }
        return k;
    };
    auto advance_alive = [&](const std::vector<int>& alive, const Valuation& obs) {
        std::set<int> next;
        for (int q : alive)
            for (int e : m.out_edges(q)) {
                const NfaTransition& t = m.transitions()[static_cast<std::size_t>(e)];
                if (eval_predicate(t.label, obs)) next.insert(t.to);
            }
        return std::vector<int>(next.begin(), next.end());
    };

    std::vector<Node> nodes;
    std::unordered_set<std::string> visited;
    std::deque<std::size_t> queue;
    auto trace_of = [&](int idx, const Valuation& last_obs) {
        std::vector<Valuation> path{last_obs};
        for (int i = idx; i >= 0; i = nodes[static_cast<std::size_t>(i)].parent)
            path.push_back(nodes[static_cast<std::size_t>(i)].obs);
        std::reverse(path.begin(), path.end());
        return path;
    };

    for (const auto& s0 : sys.initial_valuations(cfg.enumeration_cap)) {
        ValuationEnumerator inputs(sys.input_layout(), cfg.enumeration_cap);
        while (!inputs.done()) {
            Valuation u = inputs.current();
            Valuation s1 = sys.step(s0, u);
            Valuation obs1 = sys.make_observation(s1, u);
            std::vector<int> alive = advance_alive(m.initial_states(), obs1);
            if (alive.empty()) return {false, {obs1}};
            if (visited.insert(key_of(s1, alive)).second) {
                nodes.push_back({s1, alive, -1, obs1});
                queue.push_back(nodes.size() - 1);
            }
            inputs.advance();
        }
    }
    while (!queue.empty()) {
        std::size_t idx = queue.front();
        queue.pop_front();
        Valuation state = nodes[idx].state;
        std::vector<int> alive = nodes[idx].alive;
        ValuationEnumerator inputs(sys.input_layout(), cfg.enumeration_cap);
        while (!inputs.done()) {
            Valuation u = inputs.current();
            Valuation nxt = sys.step(state, u);
            Valuation obs = sys.make_observation(nxt, u);
            std::vector<int> alive2 = advance_alive(alive, obs);
            if (alive2.empty()) return {false, trace_of(static_cast<int>(idx), obs)};
            if (visited.insert(key_of(nxt, alive2)).second) {
                if (nodes.size() + 1 > cfg.oracle_cap)
                    throw CapacityError("inclusion search exceeds the oracle cap");
                nodes.push_back({nxt, alive2, static_cast<int>(idx), obs});
                queue.push_back(nodes.size() - 1);
            }
            inputs.advance();
        }
    }
    return {true, {}};
}

} // namespace aml
