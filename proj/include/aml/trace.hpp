// Execution traces: seeded random simulation, persistence (JSON canonical,
// CSV secondary) and replay checking against the generating system.
#pragma once

#include <map>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "aml/system.hpp"
#include "aml/value.hpp"

namespace aml {

struct Provenance {
    enum Kind { RandomSimulation, Counterexample } kind = RandomSimulation;
    std::uint64_t seed = 0;   // RandomSimulation
    int iteration = 0;        // Counterexample
    std::string condition_id; // Counterexample

    static Provenance random(std::uint64_t seed) { return {RandomSimulation, seed, 0, {}}; }
    static Provenance counterexample(int iteration, std::string cond) {
        Provenance p;
        p.kind = Counterexample;
        p.iteration = iteration;
        p.condition_id = std::move(cond);
        return p;
    }

    std::string to_string() const {
        if (kind == RandomSimulation) return "random-simulation(seed=" + std::to_string(seed) + ")";
        return "counterexample(iteration=" + std::to_string(iteration) + ",condition=" +
               condition_id + ")";
    }
};

/// A finite sequence of observations (valuations of the observed variables).
struct Trace {
    std::vector<Valuation> observations;
    Provenance provenance;
    bool verified_positive = true; // false marks fallback counterexample traces

    std::size_t length() const { return observations.size(); }

    Trace prefix(std::size_t n) const {
        Trace t;
        t.observations.assign(observations.begin(),
                              observations.begin() + static_cast<std::ptrdiff_t>(n));
        t.provenance = provenance;
        t.verified_positive = verified_positive;
        return t;
    }

    std::string content_key() const {
        std::string k;
        for (const auto& obs : observations) {
            for (std::int64_t v : obs.values) {
                k += std::to_string(v);
                k += ',';
            }
            k += ';';
        }
        return k;
    }
};

/// Content-deduplicated trace collection. First insertion wins the
/// provenance slot.
struct TraceSet {
    std::vector<Trace> traces;
    std::unordered_set<std::string> keys;

    bool insert(Trace t) {
        if (t.observations.empty()) return false;
        if (!keys.insert(t.content_key()).second) return false;
        traces.push_back(std::move(t));
        return true;
    }

    bool contains(const Trace& t) const { return keys.count(t.content_key()) > 0; }
    std::size_t size() const { return traces.size(); }
    bool empty() const { return traces.empty(); }
};

/// One seeded run: uniformly random init valuation, then a uniformly random
/// input valuation per step. The trace records observations only, starting
/// one step after the chosen initial state.
inline Trace simulate(const TransitionSystem& sys, std::uint64_t seed, std::size_t length,
                      std::uint64_t cap = 1ULL << 22) {
    if (length < 1) throw Error("trace length must be >= 1");
    SplitMix64 rng(seed);
    auto inits = sys.initial_valuations(cap);
    Valuation state = inits[static_cast<std::size_t>(rng.below(inits.size()))];
    const auto& input_layout = sys.input_layout();
    Trace trace;
    trace.provenance = Provenance::random(seed);
    for (std::size_t i = 0; i < length; ++i) {
        std::vector<std::int64_t> in(input_layout->size());
        for (std::size_t v = 0; v < input_layout->size(); ++v) {
            const Domain& d = input_layout->vars[v].domain;
            in[v] = d.value_at(rng.below(d.cardinality()));
        }
        Valuation input(input_layout, std::move(in));
        Valuation next = sys.step(state, input);
        trace.observations.push_back(sys.make_observation(next, input));
        state = std::move(next);
    }
    return trace;
}

/// n seeded simulations (per-trace seeds derived from `seed`), deduplicated.
inline TraceSet generate_trace_set(const TransitionSystem& sys, std::size_t n, std::size_t length,
                                   std::uint64_t seed) {
    if (n < 1) throw Error("trace count must be >= 1");
    TraceSet set;
    for (std::size_t i = 0; i < n; ++i)
        set.insert(simulate(sys, SplitMix64::mix(seed, i), length));
    return set;
}

/// True iff the observation sequence corresponds to a system execution
/// path starting one step after some initial valuation. Decided exactly by
/// a breadth-first walk over compatible state sets.
inline bool trace_replays(const TransitionSystem& sys, const std::vector<Valuation>& observations,
                          std::uint64_t cap = 1ULL << 22) {
    if (observations.empty()) return false;
    std::unordered_set<Valuation, ValuationHash, ValuationEq> compatible;
    for (const auto& s0 : sys.initial_valuations(cap)) compatible.insert(s0);
    for (const auto& obs : observations) {
        std::unordered_set<Valuation, ValuationHash, ValuationEq> next_set;
        for (const auto& s : compatible) {
            ValuationEnumerator inputs(sys.input_layout(), cap);
            while (!inputs.done()) {
                Valuation u = inputs.current();
                Valuation nxt = sys.step(s, u);
                if (sys.make_observation(nxt, u) == obs) next_set.insert(nxt);
                inputs.advance();
            }
        }
        if (next_set.empty()) return false;
        compatible = std::move(next_set);
    }
    return true;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline nlohmann::json traces_to_json(const TraceSet& set, const LayoutPtr& observed) {
    nlohmann::json j;
    j["format"] = "aml-traces";
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : observed->vars)
        vars.push_back({{"name", v.name}, {"domain", v.domain.to_string()}});
    j["variables"] = vars;
    nlohmann::json traces = nlohmann::json::array();
    for (const auto& t : set.traces) {
        nlohmann::json jt;
        if (t.provenance.kind == Provenance::RandomSimulation)
            jt["provenance"] = {{"kind", "random-simulation"}, {"seed", t.provenance.seed}};
        else
            jt["provenance"] = {{"kind", "counterexample"},
                                {"iteration", t.provenance.iteration},
                                {"condition", t.provenance.condition_id}};
        if (!t.verified_positive) jt["flagged"] = true;
        nlohmann::json obs = nlohmann::json::array();
        for (const auto& v : t.observations) {
            nlohmann::json row = nlohmann::json::object();
            for (std::size_t i = 0; i < v.values.size(); ++i) {
                const auto& decl = observed->vars[i];
                switch (decl.domain.kind) {
                    case DomainKind::Boolean: row[decl.name] = v.values[i] != 0; break;
                    case DomainKind::BoundedInt: row[decl.name] = v.values[i]; break;
                    case DomainKind::Enumeration:
                        row[decl.name] = decl.domain.value_to_string(v.values[i]);
                        break;
                }
            }
            obs.push_back(std::move(row));
        }
        jt["observations"] = std::move(obs);
        traces.push_back(std::move(jt));
    }
    j["traces"] = std::move(traces);
    return j;
}

inline TraceSet traces_from_json(const nlohmann::json& j, const LayoutPtr& observed) {
    if (!j.contains("traces")) throw ValidationError("trace document lacks a 'traces' array");
    if (j.contains("variables")) {
        const auto& vars = j.at("variables");
        if (vars.size() != observed->vars.size())
            throw ValidationError("trace document records " + std::to_string(vars.size()) +
                                  " variables but the system observes " +
                                  std::to_string(observed->vars.size()));
        for (std::size_t i = 0; i < observed->vars.size(); ++i)
            if (vars.at(i).at("name").get<std::string>() != observed->vars[i].name)
                throw ValidationError("trace document variable order differs at position " +
                                      std::to_string(i));
    }
    TraceSet set;
    for (const auto& jt : j.at("traces")) {
        Trace t;
        if (jt.contains("provenance")) {
            const auto& p = jt.at("provenance");
            if (p.at("kind") == "random-simulation")
                t.provenance = Provenance::random(p.at("seed").get<std::uint64_t>());
            else
                t.provenance = Provenance::counterexample(p.at("iteration").get<int>(),
                                                          p.at("condition").get<std::string>());
        }
        if (jt.contains("flagged")) t.verified_positive = !jt.at("flagged").get<bool>();
        for (const auto& row : jt.at("observations")) {
            std::vector<std::int64_t> vals(observed->vars.size());
            for (std::size_t i = 0; i < observed->vars.size(); ++i) {
                const auto& decl = observed->vars[i];
                if (!row.contains(decl.name))
                    throw ValidationError("observation is missing variable '" + decl.name + "'");
                const auto& cell = row.at(decl.name);
                std::int64_t v;
                switch (decl.domain.kind) {
                    case DomainKind::Boolean: v = cell.get<bool>() ? 1 : 0; break;
                    case DomainKind::BoundedInt: v = cell.get<std::int64_t>(); break;
                    case DomainKind::Enumeration:
                        v = decl.domain.label_index(cell.get<std::string>());
                        if (v < 0)
                            throw ValidationError("'" + cell.get<std::string>() +
                                                  "' is not a member of " +
                                                  decl.domain.to_string());
                        break;
                }
                if (!decl.domain.contains(v))
                    throw ValidationError("value of '" + decl.name + "' is outside " +
                                          decl.domain.to_string());
                vals[i] = v;
            }
            t.observations.emplace_back(observed, std::move(vals));
        }
        if (!t.observations.empty()) set.insert(std::move(t));
    }
    return set;
}

/// CSV: header `trace,step,provenance,<variables...>`, one observation per
/// row. Round-trips content and provenance.
inline std::string traces_to_csv(const TraceSet& set, const LayoutPtr& observed) {
    std::string out = "trace,step,provenance";
    for (const auto& v : observed->vars) out += "," + v.name;
    out += "\n";
    for (std::size_t ti = 0; ti < set.traces.size(); ++ti) {
        const Trace& t = set.traces[ti];
        for (std::size_t si = 0; si < t.observations.size(); ++si) {
            out += std::to_string(ti) + "," + std::to_string(si + 1) + "," +
                   t.provenance.to_string();
            const Valuation& v = t.observations[si];
            for (std::size_t i = 0; i < v.values.size(); ++i)
                out += "," + observed->vars[i].domain.value_to_string(v.values[i]);
            out += "\n";
        }
    }
    return out;
}

inline TraceSet traces_from_csv(const std::string& text, const LayoutPtr& observed) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        cells.push_back(cur);
        return cells;
    };
    if (!std::getline(in, line)) return TraceSet{};
    ++line_no;
    auto header = split(line);
    if (header.size() != observed->vars.size() + 3 || header[0] != "trace")
        throw ParseError("CSV header must be 'trace,step,provenance,<variables>'", 1, 1);
    for (std::size_t i = 0; i < observed->vars.size(); ++i)
        if (header[i + 3] != observed->vars[i].name)
            throw ParseError("CSV header variable '" + header[i + 3] +
                                 "' does not match observed '" + observed->vars[i].name + "'",
                             1, 1);
    std::map<long, Trace> by_index;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != observed->vars.size() + 3)
            throw ParseError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(observed->vars.size() + 3),
                             line_no, 1);
        long idx = std::stol(cells[0]);
        Trace& t = by_index[idx];
        if (t.observations.empty()) {
            const std::string& p = cells[2];
            if (p.rfind("random-simulation(seed=", 0) == 0) {
                t.provenance = Provenance::random(
                    std::stoull(p.substr(23, p.size() - 24)));
            } else if (p.rfind("counterexample(iteration=", 0) == 0) {
                auto comma = p.find(",condition=");
                t.provenance = Provenance::counterexample(
                    std::stoi(p.substr(25, comma - 25)),
                    p.substr(comma + 11, p.size() - comma - 12));
            }
        }
        std::vector<std::int64_t> vals(observed->vars.size());
        for (std::size_t i = 0; i < observed->vars.size(); ++i) {
            const Domain& d = observed->vars[i].domain;
            std::int64_t v = d.value_from_string(cells[i + 3]);
            if (!d.contains(v))
                throw ParseError("'" + cells[i + 3] + "' is not a value of " + d.to_string() +
                                     " (variable '" + observed->vars[i].name + "')",
                                 line_no, 1);
            vals[i] = v;
        }
        t.observations.emplace_back(observed, std::move(vals));
    }
    TraceSet set;
    for (auto& [idx, t] : by_index) set.insert(std::move(t));
    return set;
}

} // namespace aml
