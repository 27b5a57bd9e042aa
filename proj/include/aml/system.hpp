// The system under learning: finite-domain variables, an initial-state
// predicate and guarded update commands, with executable semantics and an
// exhaustive reachability oracle.
#pragma once

#include <algorithm>
#include <deque>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "aml/expr.hpp"
#include "aml/value.hpp"

namespace aml {

struct Assignment {
    std::string target; // state variable name
    Expr value;         // over all variables, unprimed
    int target_slot = -1; // index into the state layout, set at validation
};

struct GuardedCommand {
    Expr guard; // over all variables, unprimed; `otherwise` is desugared before validation
    std::vector<Assignment> assignments; // unassigned state variables keep their value
    bool is_otherwise = false;           // remembered for rendering
};

struct SystemLimits {
    std::uint64_t validation_cap = 1ULL << 22; // guard/assignment enumeration bound
};

class SymbolicNfa; // automaton.hpp

/// S = (X, X', R, Init). State variables evolve by the unique firing
/// guarded command; input variables model environment nondeterminism and
/// are resampled every step. Immutable after validation.
class TransitionSystem {
public:
    TransitionSystem(std::vector<VariableDecl> variables, Expr init,
                     std::vector<GuardedCommand> commands, int declared_k = 0,
                     const SystemLimits& limits = {})
        : declared_k_(declared_k) {
        full_layout_ = make_layout(variables);
        std::vector<VariableDecl> st, in, obs;
        for (std::size_t i = 0; i < variables.size(); ++i) {
            const auto& v = variables[i];
            if (v.role == VarRole::State) {
                state_slot_of_full_.push_back(static_cast<int>(st.size()));
                st.push_back(v);
            } else {
                state_slot_of_full_.push_back(-1);
                in.push_back(v);
            }
            if (v.observed) obs.push_back(v);
        }
        state_layout_ = make_layout(st);
        input_layout_ = make_layout(in);
        observed_layout_ = make_layout(obs);
        if (st.empty()) throw ValidationError("system declares no state variable");

        // Observation wiring: per observed variable, where its value comes from.
        for (const auto& v : obs) {
            if (v.role == VarRole::State)
                obs_sources_.push_back({true, state_layout_->index_of(v.name)});
            else
                obs_sources_.push_back({false, input_layout_->index_of(v.name)});
        }
        for (const auto& v : in)
            if (v.observed) observed_input_decls_.push_back(v);
        observed_input_layout_ = make_layout(observed_input_decls_);
        for (const auto& v : observed_input_decls_)
            observed_input_slots_.push_back(input_layout_->index_of(v.name));

        init_ = type_expr(init, *state_layout_, false);
        for (auto& c : commands) {
            GuardedCommand out;
            out.guard = type_expr(c.guard, *full_layout_, false);
            out.is_otherwise = c.is_otherwise;
            for (auto& a : c.assignments) {
                int slot = state_layout_->index_of(a.target);
                if (slot < 0)
                    throw ValidationError("assignment target '" + a.target +
                                          "' is not a state variable");
                const Domain& dom = state_layout_->vars[static_cast<std::size_t>(slot)].domain;
                ExprType expected;
                switch (dom.kind) {
                    case DomainKind::Boolean: expected = ExprType::boolean(); break;
                    case DomainKind::BoundedInt:
                        expected = ExprType::integer();
                        expected.domain = dom;
                        break;
                    case DomainKind::Enumeration: expected = ExprType::enumeration(dom); break;
                }
                Assignment ta;
                ta.target = a.target;
                ta.target_slot = slot;
                ta.value = type_expr(a.value, *full_layout_, false, &expected);
                const ExprType& vt = ta.value.node().type;
                if ((expected.kind == ExprType::Bool && vt.kind != ExprType::Bool) ||
                    (expected.kind == ExprType::Int && vt.kind != ExprType::Int) ||
                    (expected.kind == ExprType::Enum &&
                     !(vt.kind == ExprType::Enum && vt.domain == dom)))
                    throw ValidationError("assignment to '" + a.target +
                                          "' has mismatched type");
                for (const auto& prev : out.assignments)
                    if (prev.target == a.target)
                        throw ValidationError("duplicate assignment to '" + a.target + "'");
                out.assignments.push_back(std::move(ta));
            }
            commands_.push_back(std::move(out));
        }
        if (commands_.empty()) throw ValidationError("system declares no update command");

        validate(limits);
    }

    const LayoutPtr& full_layout() const { return full_layout_; }
    const LayoutPtr& state_layout() const { return state_layout_; }
    const LayoutPtr& input_layout() const { return input_layout_; }
    const LayoutPtr& observed_layout() const { return observed_layout_; }
    const LayoutPtr& observed_input_layout() const { return observed_input_layout_; }
    const Expr& init() const { return init_; }
    const std::vector<GuardedCommand>& commands() const { return commands_; }
    int declared_k() const { return declared_k_; }
    bool has_observed_inputs() const { return !observed_input_decls_.empty(); }

    /// Fallback induction bound: twice the widest bounded-integer domain,
    /// never below 2.
    int heuristic_k() const {
        std::int64_t width = 0;
        for (const auto& v : full_layout_->vars)
            if (v.domain.kind == DomainKind::BoundedInt)
                width = std::max<std::int64_t>(width, v.domain.hi - v.domain.lo + 1);
        return static_cast<int>(std::max<std::int64_t>(2, 2 * width));
    }

    int effective_k() const { return declared_k_ >= 2 ? declared_k_ : heuristic_k(); }

    // -- semantics ----------------------------------------------------------

    /// Next state under the unique firing command. Deterministic.
    Valuation step(const Valuation& state, const Valuation& input) const {
        Valuation full = compose_full(state, input);
        const GuardedCommand* firing = nullptr;
        for (const auto& c : commands_) {
            if (eval_predicate(c.guard, full)) {
                firing = &c;
                break;
            }
        }
        if (!firing) throw ValidationError("no guard fires (validation should have caught this)");
        std::vector<std::int64_t> next = state.values;
        for (const auto& a : firing->assignments)
            next[static_cast<std::size_t>(a.target_slot)] = eval_value(a.value, full, nullptr);
        return Valuation(state_layout_, std::move(next));
    }

    /// All next states over the full input space, deduplicated.
    std::vector<Valuation> successors(const Valuation& state,
                                      std::uint64_t input_cap = 1ULL << 22) const {
        std::vector<Valuation> out;
        std::unordered_set<Valuation, ValuationHash, ValuationEq> seen;
        ValuationEnumerator inputs(input_layout_, input_cap);
        while (!inputs.done()) {
            Valuation nxt = step(state, inputs.current());
            if (seen.insert(nxt).second) out.push_back(std::move(nxt));
            inputs.advance();
        }
        return out;
    }

    /// Every state valuation satisfying Init; nonempty by validation.
    std::vector<Valuation> initial_valuations(std::uint64_t cap = 1ULL << 22) const {
        std::vector<Valuation> out;
        ValuationEnumerator states(state_layout_, cap);
        while (!states.done()) {
            Valuation v = states.current();
            if (eval_predicate(init_, v)) out.push_back(std::move(v));
            states.advance();
        }
        return out;
    }

    /// Breadth-first fixpoint of successors from the initial valuations.
    /// The exact oracle every approximate verdict is tested against.
    std::vector<Valuation> reachable_states(std::uint64_t cap) const {
        if (cap < 1) throw Error("reachable_states cap must be >= 1");
        std::vector<Valuation> order;
        std::unordered_set<Valuation, ValuationHash, ValuationEq> seen;
        std::deque<Valuation> queue;
        for (auto& v : initial_valuations(cap)) {
            if (seen.insert(v).second) {
                order.push_back(v);
                queue.push_back(v);
            }
        }
        while (!queue.empty()) {
            Valuation v = std::move(queue.front());
            queue.pop_front();
            for (auto& s : successors(v)) {
                if (seen.insert(s).second) {
                    if (order.size() + 1 > cap)
                        throw CapacityError("oracle unavailable at this scale (reachable set > " +
                                            std::to_string(cap) + ")");
                    order.push_back(s);
                    queue.push_back(s);
                }
            }
        }
        return order;
    }

    // -- observations -------------------------------------------------------

    /// The observation produced by a step: observed state variables from the
    /// post-state, observed input variables from the input consumed.
    Valuation make_observation(const Valuation& post_state, const Valuation& input) const {
        std::vector<std::int64_t> vals(obs_sources_.size());
        for (std::size_t i = 0; i < obs_sources_.size(); ++i) {
            const auto& src = obs_sources_[i];
            vals[i] = src.first ? post_state.values[static_cast<std::size_t>(src.second)]
                                : input.values[static_cast<std::size_t>(src.second)];
        }
        return Valuation(observed_layout_, std::move(vals));
    }

    /// Same, but the input part comes from a valuation over only the
    /// observed input variables (checker configuration space).
    Valuation make_observation_obs_input(const Valuation& post_state,
                                         const Valuation& obs_input) const {
        std::vector<std::int64_t> vals(obs_sources_.size());
        std::size_t next_obs_input = 0;
        for (std::size_t i = 0; i < obs_sources_.size(); ++i) {
            const auto& src = obs_sources_[i];
            vals[i] = src.first ? post_state.values[static_cast<std::size_t>(src.second)]
                                : obs_input.values[next_obs_input++];
        }
        return Valuation(observed_layout_, std::move(vals));
    }

    /// Projection of a full input valuation onto the observed input variables.
    Valuation project_observed_input(const Valuation& input) const {
        std::vector<std::int64_t> vals(observed_input_slots_.size());
        for (std::size_t i = 0; i < observed_input_slots_.size(); ++i)
            vals[i] = input.values[static_cast<std::size_t>(observed_input_slots_[i])];
        return Valuation(observed_input_layout_, std::move(vals));
    }

private:
    Valuation compose_full(const Valuation& state, const Valuation& input) const {
        std::vector<std::int64_t> vals(full_layout_->size());
        std::size_t si = 0, ii = 0;
        for (std::size_t i = 0; i < full_layout_->size(); ++i)
            vals[i] = full_layout_->vars[i].role == VarRole::State ? state.values[si++]
                                                                   : input.values[ii++];
        return Valuation(full_layout_, std::move(vals));
    }

    bool guard_is_literal_true(const GuardedCommand& c) const {
        return c.guard.kind() == ExprKind::BoolLit && c.guard.node().value == 1;
    }

    void validate(const SystemLimits& limits) {
        // Init satisfiability.
        bool init_ok = false;
        ValuationEnumerator st(state_layout_, limits.validation_cap);
        while (!st.done()) {
            if (eval_predicate(init_, st.current())) {
                init_ok = true;
                break;
            }
            st.advance();
        }
        if (!init_ok) throw ValidationError("init predicate is unsatisfiable");

        // Assignments provably in-domain by static intervals where possible.
        bool all_static = true;
        for (const auto& c : commands_) {
            for (const auto& a : c.assignments) {
                const Domain& dom =
                    state_layout_->vars[static_cast<std::size_t>(a.target_slot)].domain;
                if (dom.kind != DomainKind::BoundedInt) continue; // enum/bool typed exactly
                auto iv = static_interval(a.value);
                if (!iv || iv->lo < dom.lo || iv->hi > dom.hi) all_static = false;
            }
        }

        // Guard partition: exactly one command fires per (state, input).
        // A single literal-true guard is a partition by construction; that
        // shortcut keeps very large but trivially-guarded systems loadable.
        bool trivially_exhaustive = commands_.size() == 1 && guard_is_literal_true(commands_[0]);
        if (trivially_exhaustive && all_static) return;

        std::uint64_t space =
            state_layout_->space_size(limits.validation_cap); // throws over cap
        unsigned __int128 joint =
            static_cast<unsigned __int128>(space) * input_layout_->space_size(limits.validation_cap);
        if (joint > limits.validation_cap)
            throw CapacityError("state x input space exceeds the validation cap of " +
                                std::to_string(limits.validation_cap));

        ValuationEnumerator states(state_layout_, limits.validation_cap);
        while (!states.done()) {
            Valuation s = states.current();
            ValuationEnumerator inputs(input_layout_, limits.validation_cap);
            while (!inputs.done()) {
                Valuation in = inputs.current();
                Valuation full = compose_full(s, in);
                int firing = 0;
                const GuardedCommand* cmd = nullptr;
                for (const auto& c : commands_) {
                    if (eval_predicate(c.guard, full)) {
                        ++firing;
                        if (!cmd) cmd = &c;
                    }
                }
                if (firing == 0)
                    throw ValidationError("guards are not exhaustive: no command fires at " +
                                          full.to_string());
                if (firing > 1)
                    throw ValidationError("guards overlap: " + std::to_string(firing) +
                                          " commands fire at " + full.to_string());
                for (const auto& a : cmd->assignments) {
                    std::int64_t v = eval_value(a.value, full, nullptr);
                    const Domain& dom =
                        state_layout_->vars[static_cast<std::size_t>(a.target_slot)].domain;
                    if (!dom.contains(v))
                        throw ValidationError("assignment to '" + a.target + "' leaves " +
                                              dom.to_string() + " (value " + std::to_string(v) +
                                              " at " + full.to_string() + ")");
                }
                inputs.advance();
            }
            states.advance();
        }
    }

    LayoutPtr full_layout_;
    LayoutPtr state_layout_;
    LayoutPtr input_layout_;
    LayoutPtr observed_layout_;
    LayoutPtr observed_input_layout_;
    std::vector<int> state_slot_of_full_;
    std::vector<std::pair<bool, int>> obs_sources_; // (from_state, slot)
    std::vector<VariableDecl> observed_input_decls_;
    std::vector<int> observed_input_slots_;
    Expr init_;
    std::vector<GuardedCommand> commands_;
    int declared_k_ = 0;
};

} // namespace aml
