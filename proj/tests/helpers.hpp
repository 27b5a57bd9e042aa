// Shared fixtures for the test suites: tiny systems, hand-built automata,
// and a generator of random-but-valid systems for property tests.
#pragma once

#include <string>
#include <vector>

#include "aml/aml.hpp"

namespace test {

inline aml::ParsedSystem counter_mod4() {
    return aml::parse_system(
        "state c: int[0..3] observe\n"
        "init c = 0\n"
        "k 8\n"
        "on true { c' = (c + 1) mod 4 }\n");
}

inline aml::ParsedSystem skip_counter() {
    return aml::parse_system(
        "state c: int[0..3] observe\n"
        "init c = 0\n"
        "k 2\n"
        "on true { c' = (c + 2) mod 4 }\n");
}

inline aml::ParsedSystem stuck_system() {
    return aml::parse_system(
        "state c: int[0..3] observe\n"
        "init c = 0\n"
        "k 2\n"
        "on true { c' = c }\n");
}

/// Bang-bang heater: boolean abstraction of the temperature input.
inline aml::ParsedSystem heater_bool() {
    return aml::parse_system(
        "state s: enum { Off, On } observe\n"
        "input hot: bool\n"
        "init s = Off\n"
        "k 4\n"
        "on hot { s' = On }\n"
        "otherwise { s' = Off }\n");
}

/// Hysteresis heater with the observed temperature input (the bundled
/// benchmark without its reference block).
inline aml::ParsedSystem heater_hysteresis() {
    return aml::parse_system(
        "state s: enum { Off, On } observe\n"
        "input temp: int[0..9] observe\n"
        "init s = Off\n"
        "k 6\n"
        "on temp >= 8 { s' = On }\n"
        "on temp <= 2 { s' = Off }\n"
        "otherwise { s' = s }\n");
}

/// The two-state mode-switch automaton over (s, temp) observations:
/// dwell edges on each mode, threshold-guarded switch edges.
inline aml::SymbolicNfa fig2_automaton(const aml::LayoutPtr& observed) {
    using namespace aml;
    auto pred = [&](const std::string& text) { return parse_predicate(text, *observed); };
    std::vector<NfaTransition> edges;
    edges.push_back({0, 0, pred("s = Off")});
    edges.push_back({0, 1, pred("temp > 5 and s = On")});
    edges.push_back({1, 1, pred("s = On")});
    edges.push_back({1, 0, pred("not (temp > 5) and s = Off")});
    return SymbolicNfa(observed, {"q1", "q2"}, {0}, std::move(edges));
}

inline aml::Valuation obs_of(const aml::LayoutPtr& layout,
                             std::vector<std::int64_t> values) {
    return aml::Valuation(layout, std::move(values));
}

inline aml::Trace make_trace(const aml::LayoutPtr& layout,
                             const std::vector<std::vector<std::int64_t>>& rows) {
    aml::Trace t;
    for (const auto& r : rows) t.observations.emplace_back(layout, r);
    return t;
}

/// Random valid system: bounded-int and enum state variables updated by
/// in-domain arithmetic under a single always-firing command, plus an
/// optional boolean input mixed in through a conditional.
inline aml::ParsedSystem random_system(std::uint64_t seed) {
    aml::SplitMix64 rng(seed);
    std::string src;
    int state_vars = 1 + static_cast<int>(rng.below(2));
    bool has_input = rng.below(2) == 0;
    std::vector<std::string> names;
    std::vector<int> cards;
    for (int i = 0; i < state_vars; ++i) {
        std::string name(1, static_cast<char>('a' + i));
        int card = 2 + static_cast<int>(rng.below(4));
        names.push_back(name);
        cards.push_back(card);
        src += "state " + name + ": int[0.." + std::to_string(card - 1) + "]";
        if (rng.below(3) != 0) src += " observe";
        src += "\n";
    }
    if (has_input) src += "input u: bool" + std::string(rng.below(2) ? " observe" : "") + "\n";
    src += "init " + names[0] + " <= " + std::to_string(rng.below(static_cast<std::uint64_t>(cards[0]))) + "\n";
    src += "on true {";
    for (int i = 0; i < state_vars; ++i) {
        int inc = 1 + static_cast<int>(rng.below(3));
        std::string update = "(" + names[static_cast<std::size_t>(i)] + " + " +
                             std::to_string(inc) + ") mod " + std::to_string(cards[static_cast<std::size_t>(i)]);
        if (has_input && rng.below(2) == 0)
            update = "if u then " + update + " else " + names[static_cast<std::size_t>(i)];
        src += std::string(i ? ";" : "") + " " + names[static_cast<std::size_t>(i)] + "' = " + update;
    }
    src += " }\n";
    return aml::parse_system(src);
}

/// Random automaton over a small observation space, every state reachable.
/// Labels partition the space by value classes of one fresh partitioning.
inline aml::SymbolicNfa random_automaton(std::uint64_t seed) {
    using namespace aml;
    SplitMix64 rng(seed);
    int domain_card = 2 + static_cast<int>(rng.below(4));
    auto layout = make_layout({VariableDecl{
        "x", Domain::bounded_int(0, domain_card - 1), VarRole::State, true}});
    int states = 1 + static_cast<int>(rng.below(7));
    std::vector<std::string> names;
    for (int i = 0; i < states; ++i) names.push_back("n" + std::to_string(i));
    std::vector<NfaTransition> edges;
    auto label = [&](int value) {
        return parse_predicate("x = " + std::to_string(value), *layout);
    };
    // spanning path keeps every state reachable
    for (int i = 1; i < states; ++i)
        edges.push_back({static_cast<int>(rng.below(static_cast<std::uint64_t>(i))), i,
                         label(static_cast<int>(rng.below(static_cast<std::uint64_t>(domain_card))))});
    int extra = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * states + 1)));
    for (int i = 0; i < extra; ++i)
        edges.push_back({static_cast<int>(rng.below(static_cast<std::uint64_t>(states))),
                         static_cast<int>(rng.below(static_cast<std::uint64_t>(states))),
                         label(static_cast<int>(rng.below(static_cast<std::uint64_t>(domain_card))))});
    return SymbolicNfa(layout, std::move(names), {0}, std::move(edges));
}

/// A trace the automaton accepts, built by walking live edges and picking
/// a satisfying observation for each label.
inline std::vector<aml::Valuation> random_accepted_trace(const aml::SymbolicNfa& m,
                                                         std::uint64_t seed,
                                                         std::size_t max_len = 12) {
    using namespace aml;
    SplitMix64 rng(seed);
    std::vector<Valuation> obs_space;
    ValuationEnumerator e(m.observed_layout(), 1ULL << 16);
    while (!e.done()) {
        obs_space.push_back(e.current());
        e.advance();
    }
    std::vector<Valuation> trace;
    std::vector<int> alive = m.initial_states();
    std::size_t len = 1 + rng.below(max_len);
    for (std::size_t step = 0; step < len; ++step) {
        std::vector<Valuation> choices;
        for (int q : alive)
            for (int eidx : m.out_edges(q)) {
                const NfaTransition& t = m.transitions()[static_cast<std::size_t>(eidx)];
                for (const auto& o : obs_space)
                    if (eval_predicate(t.label, o)) choices.push_back(o);
            }
        if (choices.empty()) break;
        Valuation pick = choices[static_cast<std::size_t>(rng.below(choices.size()))];
        std::vector<int> next;
        std::set<int> next_set;
        for (int q : alive)
            for (int eidx : m.out_edges(q)) {
                const NfaTransition& t = m.transitions()[static_cast<std::size_t>(eidx)];
                if (eval_predicate(t.label, pick)) next_set.insert(t.to);
            }
        next.assign(next_set.begin(), next_set.end());
        trace.push_back(pick);
        alive = std::move(next);
    }
    return trace;
}

} // namespace test
