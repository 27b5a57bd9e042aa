// Passive model learning from trace sets. Both strategies generalize over a
// finite abstracted alphabet: mutually exclusive, jointly exhaustive
// predicate classes derived from the observations. The learned automaton
// always accepts every input trace; all states accept, so its language is
// prefix-closed.
#pragma once

#include <functional>
#include <deque>
#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "aml/automaton.hpp"
#include "aml/trace.hpp"

namespace aml {

struct LearnerConfig {
    enum Strategy { PtaExact, KTails } strategy = KTails;
    int k_merge = 1; // KTails: observation-context length
    enum Abstraction { ValueEquality, IntervalSplit } abstraction = ValueEquality;
    int max_splits = 2;                      // IntervalSplit only
    std::uint64_t alphabet_cap = 1ULL << 16; // product-cell count bound

    std::string strategy_name() const { return strategy == PtaExact ? "pta-exact" : "ktails"; }
    std::string abstraction_name() const {
        return abstraction == ValueEquality ? "value-equality" : "interval-split";
    }
};

/// The abstracted observation alphabet: a per-variable partition whose
/// product cells classify every observation into exactly one class.
class Alphabet {
public:
    Alphabet(const TraceSet& set, const LayoutPtr& observed, const LearnerConfig& cfg)
        : observed_(observed) {
        if (set.empty()) throw Error("cannot abstract an empty trace set");
        const std::size_t nvars = observed->vars.size();
        std::vector<std::set<std::int64_t>> seen(nvars);
        for (const auto& t : set.traces)
            for (const auto& obs : t.observations)
                for (std::size_t i = 0; i < nvars; ++i) seen[i].insert(obs.values[i]);

        for (std::size_t i = 0; i < nvars; ++i) {
            const VariableDecl& decl = observed->vars[i];
            VarPartition part;
            std::vector<std::int64_t> values(seen[i].begin(), seen[i].end());
            bool intervals = cfg.abstraction == LearnerConfig::IntervalSplit &&
                             decl.domain.kind == DomainKind::BoundedInt;
            if (intervals) {
                part.kind = VarPartition::Intervals;
                part.boundaries = pick_boundaries(values, cfg.max_splits);
                part.count = part.boundaries.size() + 1;
            } else {
                part.kind = VarPartition::Values;
                part.values = std::move(values);
                part.covers_domain = part.values.size() == decl.domain.cardinality();
                part.count = part.values.size() + (part.covers_domain ? 0 : 1);
            }
            partitions_.push_back(std::move(part));
        }

        unsigned __int128 cells = 1;
        for (const auto& p : partitions_) {
            cells *= p.count;
            if (cells > cfg.alphabet_cap)
                throw CapacityError("abstracted alphabet exceeds " +
                                    std::to_string(cfg.alphabet_cap) + " classes");
        }
        cell_count_ = static_cast<std::size_t>(cells);
    }

    std::size_t size() const { return cell_count_; }
    const LayoutPtr& observed_layout() const { return observed_; }

    /// The unique class index of an observation.
    std::size_t class_of(const Valuation& obs) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < partitions_.size(); ++i)
            idx = idx * partitions_[i].count + partitions_[i].index_of(obs.values[i]);
        return idx;
    }

    /// Predicate characterizing one class, a conjunction over variables in
    /// declaration order with trivial conjuncts dropped.
    Expr class_predicate(std::size_t cell) const {
        std::vector<Expr> conjuncts;
        std::size_t rest = cell;
        std::vector<std::size_t> per_var(partitions_.size());
        for (std::size_t i = partitions_.size(); i-- > 0;) {
            per_var[i] = rest % partitions_[i].count;
            rest /= partitions_[i].count;
        }
        for (std::size_t i = 0; i < partitions_.size(); ++i) {
            Expr p = var_class_predicate(i, per_var[i]);
            if (p.kind() == ExprKind::BoolLit && p.node().value == 1) continue;
            conjuncts.push_back(std::move(p));
        }
        if (conjuncts.empty()) return exprs::bool_lit(true);
        return exprs::all_of(conjuncts);
    }

    std::vector<Expr> class_predicates() const {
        std::vector<Expr> out;
        out.reserve(cell_count_);
        for (std::size_t c = 0; c < cell_count_; ++c) out.push_back(class_predicate(c));
        return out;
    }

private:
    struct VarPartition {
        enum Kind { Values, Intervals } kind = Values;
        std::vector<std::int64_t> values;     // Values: observed, ascending
        bool covers_domain = false;           // Values: no complement class needed
        std::vector<std::int64_t> boundaries; // Intervals: ascending split points
        std::size_t count = 1;

        std::size_t index_of(std::int64_t v) const {
            if (kind == Values) {
                auto it = std::lower_bound(values.begin(), values.end(), v);
                if (it != values.end() && *it == v)
                    return static_cast<std::size_t>(it - values.begin());
                return values.size(); // complement class
            }
            auto it = std::lower_bound(boundaries.begin(), boundaries.end(), v);
            return static_cast<std::size_t>(it - boundaries.begin());
        }
    };

    /// Split points between observed values: one per consecutive pair when
    /// they fit, otherwise the max_splits-1 widest gaps (ties to the lower
    /// value). A boundary b separates x <= b from x > b.
    static std::vector<std::int64_t> pick_boundaries(const std::vector<std::int64_t>& values,
                                                     int max_splits) {
        if (values.size() <= 1 || max_splits <= 1) return {};
        std::vector<std::int64_t> candidates(values.begin(), values.end() - 1);
        std::size_t want = std::min<std::size_t>(candidates.size(),
                                                 static_cast<std::size_t>(max_splits - 1));
        std::vector<std::size_t> order(candidates.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            std::int64_t ga = values[a + 1] - values[a];
            std::int64_t gb = values[b + 1] - values[b];
            if (ga != gb) return ga > gb;
            return candidates[a] < candidates[b];
        });
        std::vector<std::int64_t> chosen;
        for (std::size_t i = 0; i < want; ++i) chosen.push_back(candidates[order[i]]);
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    }

    Expr var_class_predicate(std::size_t var, std::size_t cls) const {
        const VarPartition& p = partitions_[var];
        const VariableDecl& decl = observed_->vars[var];
        Expr v = type_expr(exprs::var(decl.name), *observed_, false);
        auto lit = [&](std::int64_t value) {
            switch (decl.domain.kind) {
                case DomainKind::Boolean: return exprs::bool_lit(value != 0);
                case DomainKind::BoundedInt: return exprs::int_lit(value);
                case DomainKind::Enumeration: {
                    ExprNode n{ExprKind::ValueLit};
                    n.value = value;
                    n.name = decl.domain.labels[static_cast<std::size_t>(value)];
                    n.type = ExprType::enumeration(decl.domain);
                    return Expr::make(std::move(n));
                }
            }
            return exprs::int_lit(value);
        };
        if (p.kind == VarPartition::Values) {
            if (cls < p.values.size()) return exprs::eq(v, lit(p.values[cls]));
            std::vector<Expr> eqs;
            for (std::int64_t val : p.values) eqs.push_back(exprs::eq(v, lit(val)));
            return exprs::not_(exprs::any_of(eqs));
        }
        if (p.boundaries.empty()) return exprs::bool_lit(true);
        if (cls == 0) return exprs::cmp(CmpOp::Le, v, lit(p.boundaries[0]));
        if (cls == p.boundaries.size())
            return exprs::cmp(CmpOp::Gt, v, lit(p.boundaries.back()));
        return exprs::and_(exprs::cmp(CmpOp::Gt, v, lit(p.boundaries[cls - 1])),
                           exprs::cmp(CmpOp::Le, v, lit(p.boundaries[cls])));
    }

    LayoutPtr observed_;
    std::vector<VarPartition> partitions_;
    std::size_t cell_count_ = 0;
};

/// The finite list of mutually exclusive, jointly exhaustive observation
/// predicates the learner generalizes over.
inline std::vector<Expr> abstract_alphabet(const TraceSet& set, const LayoutPtr& observed,
                                           const LearnerConfig& cfg) {
    return Alphabet(set, observed, cfg).class_predicates();
}

namespace detail {

struct ProtoAutomaton {
    // adjacency: state -> (class -> target states)
    std::vector<std::map<std::size_t, std::set<int>>> edges;
    int initial = 0;

    int add_state() {
        edges.emplace_back();
        return static_cast<int>(edges.size()) - 1;
    }
};

/// Exact prefix-tree acceptor over class sequences.
inline ProtoAutomaton build_pta(const std::vector<std::vector<std::size_t>>& sequences) {
    ProtoAutomaton a;
    a.initial = a.add_state();
    for (const auto& seq : sequences) {
        int at = a.initial;
        for (std::size_t cls : seq) {
            auto& targets = a.edges[static_cast<std::size_t>(at)][cls];
            if (targets.empty()) {
                int fresh = a.add_state();
                a.edges[static_cast<std::size_t>(at)][cls].insert(fresh);
                at = fresh;
            } else {
                at = *targets.begin();
            }
        }
    }
    return a;
}

/// Context automaton: one state per observed length-<=k class context,
/// edges from consecutive pairs, then a quotient that repeatedly merges
/// states with identical outgoing rows (equal tails) until stable.
inline ProtoAutomaton build_ktails(const std::vector<std::vector<std::size_t>>& sequences,
                                   int k) {
    ProtoAutomaton a;
    std::map<std::vector<std::size_t>, int> context_state;
    auto state_for = [&](const std::vector<std::size_t>& ctx) {
        auto it = context_state.find(ctx);
        if (it != context_state.end()) return it->second;
        int s = a.add_state();
        context_state.emplace(ctx, s);
        return s;
    };
    a.initial = state_for({});
    for (const auto& seq : sequences) {
        std::vector<std::size_t> ctx;
        int at = a.initial;
        for (std::size_t cls : seq) {
            ctx.push_back(cls);
            if (static_cast<int>(ctx.size()) > k) ctx.erase(ctx.begin());
            int to = state_for(ctx);
            a.edges[static_cast<std::size_t>(at)][cls].insert(to);
            at = to;
        }
    }

    // Quotient by iterated row equality. Targets are canonicalized through
    // the current union-find before comparing, so merges can cascade.
    std::vector<int> parent(a.edges.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        std::map<std::vector<std::pair<std::size_t, int>>, int> row_rep;
        for (std::size_t s = 0; s < a.edges.size(); ++s) {
            if (find(static_cast<int>(s)) != static_cast<int>(s)) continue;
            std::set<std::pair<std::size_t, int>> row;
            for (std::size_t q = 0; q < a.edges.size(); ++q) {
                if (find(static_cast<int>(q)) != static_cast<int>(s)) continue;
                for (const auto& [cls, targets] : a.edges[q])
                    for (int t : targets) row.emplace(cls, find(t));
            }
            std::vector<std::pair<std::size_t, int>> key(row.begin(), row.end());
            auto [it, fresh] = row_rep.emplace(std::move(key), static_cast<int>(s));
            if (!fresh) {
                parent[s] = it->second;
                changed = true;
            }
        }
    }

    // Rebuild the merged automaton.
    std::map<int, int> rep_to_new;
    ProtoAutomaton out;
    std::function<int(int)> new_id = [&](int old) {
        int rep = find(old);
        auto it = rep_to_new.find(rep);
        if (it != rep_to_new.end()) return it->second;
        int s = out.add_state();
        rep_to_new.emplace(rep, s);
        return s;
    };
    out.initial = new_id(a.initial);
    for (std::size_t s = 0; s < a.edges.size(); ++s) {
        int from = new_id(static_cast<int>(s));
        for (const auto& [cls, targets] : a.edges[s])
            for (int t : targets) out.edges[static_cast<std::size_t>(from)][cls].insert(new_id(t));
    }
    return out;
}

/// Canonical SymbolicNfa from a proto automaton: states renumbered by
/// breadth-first order (edges in class order), unreachable states dropped,
/// parallel class edges between the same state pair merged into one
/// disjunction label in class order.
inline SymbolicNfa finalize(const ProtoAutomaton& a, const Alphabet& alphabet) {
    std::vector<int> order;
    std::vector<int> number(a.edges.size(), -1);
    std::deque<int> queue;
    number[static_cast<std::size_t>(a.initial)] = 0;
    order.push_back(a.initial);
    queue.push_back(a.initial);
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (const auto& [cls, targets] : a.edges[static_cast<std::size_t>(s)])
            for (int t : targets)
                if (number[static_cast<std::size_t>(t)] < 0) {
                    number[static_cast<std::size_t>(t)] = static_cast<int>(order.size());
                    order.push_back(t);
                    queue.push_back(t);
                }
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < order.size(); ++i) names.push_back("s" + std::to_string(i));

    std::vector<NfaTransition> transitions;
    for (std::size_t i = 0; i < order.size(); ++i) {
        // group class edges by target, keep class order inside each label
        std::map<int, std::vector<std::size_t>> by_target;
        for (const auto& [cls, targets] : a.edges[static_cast<std::size_t>(order[i])])
            for (int t : targets) by_target[number[static_cast<std::size_t>(t)]].push_back(cls);
        for (auto& [target, classes] : by_target) {
            std::sort(classes.begin(), classes.end());
            std::vector<Expr> preds;
            for (std::size_t cls : classes) preds.push_back(alphabet.class_predicate(cls));
            NfaTransition t;
            t.from = static_cast<int>(i);
            t.to = target;
            t.label = exprs::any_of(preds);
            transitions.push_back(std::move(t));
        }
    }
    return SymbolicNfa(alphabet.observed_layout(), std::move(names), {0}, std::move(transitions));
}

} // namespace detail

/// Learns a SymbolicNfa accepting at least every trace in `set`.
/// Deterministic: identical (set, cfg) yield structurally identical
/// automata with stable state ids.
inline SymbolicNfa learn(const TraceSet& set, const LayoutPtr& observed, const LearnerConfig& cfg) {
    if (set.empty()) throw Error("cannot learn from an empty trace set");
    if (cfg.k_merge < 1) throw Error("k_merge must be >= 1");
    if (cfg.max_splits < 1) throw Error("max_splits must be >= 1");
    Alphabet alphabet(set, observed, cfg);
    std::vector<std::vector<std::size_t>> sequences;
    sequences.reserve(set.size());
    for (const auto& t : set.traces) {
        std::vector<std::size_t> seq;
        seq.reserve(t.observations.size());
        for (const auto& obs : t.observations) seq.push_back(alphabet.class_of(obs));
        sequences.push_back(std::move(seq));
    }
    detail::ProtoAutomaton proto = cfg.strategy == LearnerConfig::PtaExact
                                       ? detail::build_pta(sequences)
                                       : detail::build_ktails(sequences, cfg.k_merge);
    return detail::finalize(proto, alphabet);
}

inline bool accepts(const SymbolicNfa& m, const Trace& trace) { return m.accepts(trace.observations); }

} // namespace aml
