// The active learning loop: learn a candidate from the trace set, extract
// completeness conditions, check them, classify violations, fold valid
// counterexamples back into the trace set, repeat until every condition
// holds or a resource limit is hit.
#pragma once

#include <set>
#include <deque>
#include <ctime>
#include <chrono>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aml/checker.hpp"
#include "aml/conditions.hpp"
#include "aml/learner.hpp"
#include "aml/trace.hpp"

namespace aml {

struct LoopConfig {
    std::size_t initial_traces = 50;
    std::size_t trace_length = 50;
    std::uint64_t seed = 1;
    LearnerConfig learner;
    CheckerConfig checker; // checker.k <= 0 resolves from the system
    int max_iterations = 40;
    double timeout_seconds = 600.0;
    bool batch_refinement = true; // off: relearn after the first valid violation
    int jobs = 1;                 // parallel condition checks per iteration
};

enum class RunStatus { Success, Incomplete, Timeout, Capacity };

inline const char* run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Success: return "success";
        case RunStatus::Incomplete: return "incomplete";
        case RunStatus::Timeout: return "timeout";
        case RunStatus::Capacity: return "capacity";
    }
    return "?";
}

struct IterationStats {
    int iteration = 0;
    int conditions = 0;
    int holds = 0;
    int vacuous = 0;
    int violated_valid = 0;
    int violated_inconclusive = 0;
    int pre_strengthening_violations = 0;
    int spurious_eliminated = 0;
    int duplicate_strengthenings = 0;
    int ce_traces = 0;
    int states = 0;
    double alpha = 0.0;
};

struct ClassificationEvent {
    int iteration = 0;
    std::string condition_id;
    Valuation v_t;  // the disputed observation
    Valuation v_t1; // the violating successor observation
    SpuriousResult::Kind kind = SpuriousResult::Spurious;
    std::vector<Valuation> witness; // reachable: init path; inconclusive: step window
};

struct LoopReport {
    RunStatus status = RunStatus::Incomplete;
    int iterations = 0;
    int final_states = 0;
    std::size_t alpha_held = 0;
    std::size_t alpha_total = 0;
    double alpha = 0.0;
    std::optional<double> d;
    std::vector<IterationStats> per_iteration;
    std::vector<ClassificationEvent> classifications; // every is_spurious outcome
    std::vector<ClassificationEvent> inconclusive;    // recorded for future reference
    std::string capacity_message;
    int flagged_ce_traces = 0;

    // timing
    double total_seconds = 0.0;
    double learn_seconds = 0.0;
    double check_seconds = 0.0;
    std::string timestamp_utc;

    // in-memory artifacts for analysis and tests (not serialized)
    std::vector<SymbolicNfa> iteration_automata;
    std::vector<TraceSet> iteration_ce_sets;
    std::vector<ConditionResult> final_results;
    std::vector<Condition> final_conditions;
};

// ---------------------------------------------------------------------------
// Counterexample traces
// ---------------------------------------------------------------------------

/// Builds the new traces for one valid condition violation.
///
/// Step conditions: for every trace with a smallest prefix ending in an
/// antecedent-satisfying observation, splice (v_t, v_t+1) in place of that
/// observation's step and keep what replays on the system; if nothing
/// replays (or no prefix matches), fall back to the bare two-observation
/// trace, flagged. Initial conditions yield the one-observation trace of
/// the rejected first observation, which is positive by construction.
inline TraceSet build_counterexample_traces(const TransitionSystem& sys, const TraceSet& traces,
                                            const Condition& cond, const Verdict& verdict,
                                            int iteration) {
    TraceSet out;
    Provenance prov = Provenance::counterexample(iteration, cond.id);
    if (cond.kind == Condition::Initial) {
        Trace t;
        t.provenance = prov;
        t.observations = {verdict.v_t1};
        t.verified_positive = true;
        out.insert(std::move(t));
        return out;
    }
    for (const auto& sigma : traces.traces) {
        for (std::size_t j = 0; j < sigma.observations.size(); ++j) {
            if (!cond.antecedent_holds(sigma.observations[j])) continue;
            Trace t;
            t.provenance = prov;
            t.observations.assign(sigma.observations.begin(),
                                  sigma.observations.begin() + static_cast<std::ptrdiff_t>(j));
            t.observations.push_back(verdict.v_t);
            t.observations.push_back(verdict.v_t1);
            if (trace_replays(sys, t.observations)) out.insert(std::move(t));
            break; // smallest prefix of this trace only
        }
    }
    if (out.empty()) {
        Trace bare;
        bare.provenance = prov;
        bare.observations = {verdict.v_t, verdict.v_t1};
        bare.verified_positive = false; // fallback is always flagged for review
        out.insert(std::move(bare));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reference match score
// ---------------------------------------------------------------------------

/// Fraction of reference transitions matched by the learned abstraction
/// under a greedy state correspondence grown by simultaneous breadth-first
/// search from the initial states; predicate matching is semantic
/// equivalence over the finite observation space.
inline double score_d(const SymbolicNfa& m, const SymbolicNfa& ref,
                      std::uint64_t equivalence_cap = 1ULL << 22) {
    if (ref.transitions().empty()) return m.transitions().empty() ? 1.0 : 0.0;
    const LayoutPtr& obs = ref.observed_layout();
    std::vector<int> map(ref.state_count(), -1);
    std::deque<int> queue;
    {
        std::vector<int> ri = ref.initial_states();
        std::vector<int> mi = m.initial_states();
        std::sort(ri.begin(), ri.end());
        std::sort(mi.begin(), mi.end());
        for (std::size_t i = 0; i < ri.size() && i < mi.size(); ++i) {
            map[static_cast<std::size_t>(ri[i])] = mi[i];
            queue.push_back(ri[i]);
        }
    }
    while (!queue.empty()) {
        int r = queue.front();
        queue.pop_front();
        int q = map[static_cast<std::size_t>(r)];
        for (int e : ref.out_edges(r)) {
            const NfaTransition& rt = ref.transitions()[static_cast<std::size_t>(e)];
            int chosen = -1;
            for (int me : m.out_edges(q)) {
                const NfaTransition& mt = m.transitions()[static_cast<std::size_t>(me)];
                if (!predicates_equivalent(rt.label, mt.label, obs, equivalence_cap)) continue;
                if (map[static_cast<std::size_t>(rt.to)] == mt.to) {
                    chosen = -1; // already consistently mapped; nothing to extend
                    break;
                }
                if (map[static_cast<std::size_t>(rt.to)] < 0 && chosen < 0) chosen = mt.to;
            }
            if (chosen >= 0 && map[static_cast<std::size_t>(rt.to)] < 0) {
                map[static_cast<std::size_t>(rt.to)] = chosen;
                queue.push_back(rt.to);
            }
        }
    }
    std::size_t matched = 0;
    for (const auto& rt : ref.transitions()) {
        int from = map[static_cast<std::size_t>(rt.from)];
        int to = map[static_cast<std::size_t>(rt.to)];
        if (from < 0 || to < 0) continue;
        for (int me : m.out_edges(from)) {
            const NfaTransition& mt = m.transitions()[static_cast<std::size_t>(me)];
            if (mt.to == to && predicates_equivalent(rt.label, mt.label, obs, equivalence_cap)) {
                ++matched;
                break;
            }
        }
    }
    return static_cast<double>(matched) / static_cast<double>(ref.transitions().size());
}

// ---------------------------------------------------------------------------
// The loop
// ---------------------------------------------------------------------------

struct RunResult {
    std::optional<SymbolicNfa> automaton;
    LoopReport report;
};

namespace detail {

struct ProcessedCondition {
    ConditionResult result;
    int strengthen_count = 0;
    int duplicate_strengthenings = 0;
    bool pre_strengthening_violated = false;
    std::vector<ClassificationEvent> events;
};

inline ProcessedCondition process_condition(const TransitionSystem& sys, Condition cond,
                                            const CheckerConfig& ck, int iteration) {
    ProcessedCondition out;
    out.result.condition_id = cond.id;
    Verdict verdict = check_condition(sys, cond, ck);
    out.pre_strengthening_violated = verdict.kind == VerdictKind::Violated;
    while (verdict.kind == VerdictKind::Violated && cond.kind == Condition::Step) {
        SpuriousResult sp = is_spurious(sys, verdict.v_t, ck);
        ClassificationEvent ev;
        ev.iteration = iteration;
        ev.condition_id = cond.id;
        ev.v_t = verdict.v_t;
        ev.v_t1 = verdict.v_t1;
        ev.kind = sp.kind;
        ev.witness = sp.witness;
        out.events.push_back(std::move(ev));
        if (sp.kind == SpuriousResult::Spurious) {
            std::size_t before = cond.strengthenings.size();
            cond = strengthen(cond, verdict.v_t);
            if (cond.strengthenings.size() == before)
                ++out.duplicate_strengthenings;
            else
                ++out.strengthen_count;
            verdict = check_condition(sys, cond, ck);
            continue;
        }
        out.result.classification =
            sp.kind == SpuriousResult::Reachable ? CexClass::Valid : CexClass::Inconclusive;
        break;
    }
    if (verdict.kind == VerdictKind::Violated && cond.kind == Condition::Initial)
        out.result.classification = CexClass::Valid;
    out.result.verdict = std::move(verdict);
    return out;
}

inline std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

} // namespace detail

/// Runs the loop to completion or to a limit. Deterministic given
/// (system, config): parallel condition checks join in condition order.
/// `initial_traces` overrides the seeded initial trace set when given.
inline RunResult run(const TransitionSystem& sys, const std::optional<SymbolicNfa>& reference,
                     const LoopConfig& config, const TraceSet* initial_traces = nullptr) {
    using clock = std::chrono::steady_clock;
    auto started = clock::now();
    auto deadline = started + std::chrono::duration_cast<clock::duration>(
                                  std::chrono::duration<double>(config.timeout_seconds));
    auto seconds_since = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    LoopConfig cfg = config;
    if (cfg.checker.k < 2) cfg.checker.k = sys.effective_k();
    if (cfg.max_iterations < 1) throw Error("max_iterations must be >= 1");

    RunResult rr;
    LoopReport& report = rr.report;
    report.timestamp_utc = detail::utc_timestamp();

    TraceSet traces;
    if (initial_traces) {
        for (const auto& t : initial_traces->traces) traces.insert(t);
        if (traces.empty()) throw Error("initial trace set is empty");
    } else {
        traces = generate_trace_set(sys, cfg.initial_traces, cfg.trace_length, cfg.seed);
    }

    try {
        for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
            if (clock::now() > deadline) {
                report.status = RunStatus::Timeout;
                break;
            }
            auto t0 = clock::now();
            SymbolicNfa m = learn(traces, sys.observed_layout(), cfg.learner);
            auto t1 = clock::now();
            report.learn_seconds += seconds_since(t0, t1);
            report.iterations = iter;

            std::vector<Condition> conditions = extract_conditions(m, sys);
            std::vector<detail::ProcessedCondition> processed(conditions.size());
            auto t2 = clock::now();
            bool timed_out = false;
            if (cfg.jobs > 1) {
                std::vector<std::future<detail::ProcessedCondition>> futures;
                futures.reserve(conditions.size());
                for (const auto& cond : conditions)
                    futures.push_back(std::async(std::launch::async, [&sys, cond, &cfg, iter] {
                        return detail::process_condition(sys, cond, cfg.checker, iter);
                    }));
                for (std::size_t i = 0; i < futures.size(); ++i) processed[i] = futures[i].get();
            } else {
                for (std::size_t i = 0; i < conditions.size(); ++i) {
                    processed[i] =
                        detail::process_condition(sys, conditions[i], cfg.checker, iter);
                    if (clock::now() > deadline && i + 1 < conditions.size()) {
                        // keep already-computed verdicts only
                        processed.resize(i + 1);
                        conditions.resize(i + 1);
                        timed_out = true;
                        break;
                    }
                }
            }
            report.check_seconds += seconds_since(t2, clock::now());

            IterationStats stats;
            stats.iteration = iter;
            stats.conditions = static_cast<int>(conditions.size());
            stats.states = static_cast<int>(m.state_count());
            std::vector<ConditionResult> results;
            for (auto& p : processed) {
                results.push_back(p.result);
                stats.spurious_eliminated += p.strengthen_count;
                stats.duplicate_strengthenings += p.duplicate_strengthenings;
                if (p.pre_strengthening_violated) ++stats.pre_strengthening_violations;
                for (auto& ev : p.events) {
                    if (ev.kind == SpuriousResult::Inconclusive) report.inconclusive.push_back(ev);
                    report.classifications.push_back(std::move(ev));
                }
                switch (p.result.verdict.kind) {
                    case VerdictKind::Holds: ++stats.holds; break;
                    case VerdictKind::Vacuous: ++stats.vacuous; break;
                    case VerdictKind::Violated:
                        if (p.result.classification == CexClass::Inconclusive)
                            ++stats.violated_inconclusive;
                        else
                            ++stats.violated_valid;
                        break;
                }
            }
            stats.alpha = alpha(results);

            report.final_states = static_cast<int>(m.state_count());
            report.final_results = results;
            report.final_conditions = conditions;
            report.alpha_total = results.size();
            report.alpha_held = static_cast<std::size_t>(stats.holds + stats.vacuous);
            report.alpha = stats.alpha;

            bool any_violation = stats.violated_valid + stats.violated_inconclusive > 0;
            if (!any_violation && !timed_out) {
                report.per_iteration.push_back(stats);
                rr.automaton = std::move(m);
                report.status = RunStatus::Success;
                break;
            }
            if (timed_out) {
                report.per_iteration.push_back(stats);
                rr.automaton = std::move(m);
                report.status = RunStatus::Timeout;
                break;
            }

            TraceSet ce;
            for (std::size_t i = 0; i < conditions.size(); ++i) {
                const auto& p = processed[i];
                if (p.result.verdict.kind != VerdictKind::Violated) continue;
                // spurious-only violations were resolved inside process_condition;
                // what is left here is valid or inconclusive, both refined on
                TraceSet one =
                    build_counterexample_traces(sys, traces, conditions[i], p.result.verdict, iter);
                for (auto& t : one.traces) {
                    if (!t.verified_positive) ++report.flagged_ce_traces;
                    if (!traces.contains(t)) ce.insert(std::move(t));
                }
                if (!cfg.batch_refinement) break;
            }
            stats.ce_traces = static_cast<int>(ce.size());
            report.per_iteration.push_back(stats);
            report.iteration_automata.push_back(m);
            report.iteration_ce_sets.push_back(ce);

            if (ce.empty()) {
                // nothing new to learn from; a livelock would follow
                rr.automaton = std::move(m);
                report.status = RunStatus::Incomplete;
                break;
            }
            for (auto& t : ce.traces) traces.insert(std::move(t));
            if (iter == cfg.max_iterations) {
                rr.automaton = std::move(m);
                report.status = RunStatus::Incomplete;
            }
        }
    } catch (const CapacityError& e) {
        report.status = RunStatus::Capacity;
        report.capacity_message = e.what();
    }

    if (rr.automaton && reference) report.d = score_d(*rr.automaton, *reference);
    report.total_seconds = seconds_since(started, clock::now());
    return rr;
}

/// Passive baseline: n random traces, one learning pass, one checking pass
/// (spurious violations are still strengthened away), no refinement.
inline RunResult baseline_random(const TransitionSystem& sys,
                                 const std::optional<SymbolicNfa>& reference, std::size_t n,
                                 const LoopConfig& config) {
    using clock = std::chrono::steady_clock;
    auto started = clock::now();
    LoopConfig cfg = config;
    if (cfg.checker.k < 2) cfg.checker.k = sys.effective_k();

    RunResult rr;
    LoopReport& report = rr.report;
    report.timestamp_utc = detail::utc_timestamp();
    report.iterations = 1;

    try {
        TraceSet traces = generate_trace_set(sys, n, cfg.trace_length, cfg.seed);
        auto t0 = clock::now();
        SymbolicNfa m = learn(traces, sys.observed_layout(), cfg.learner);
        report.learn_seconds = std::chrono::duration<double>(clock::now() - t0).count();

        std::vector<Condition> conditions = extract_conditions(m, sys);
        IterationStats stats;
        stats.iteration = 1;
        stats.conditions = static_cast<int>(conditions.size());
        stats.states = static_cast<int>(m.state_count());
        std::vector<ConditionResult> results;
        auto t1 = clock::now();
        for (const auto& cond : conditions) {
            auto p = detail::process_condition(sys, cond, cfg.checker, 1);
            stats.spurious_eliminated += p.strengthen_count;
            if (p.pre_strengthening_violated) ++stats.pre_strengthening_violations;
            for (auto& ev : p.events) {
                if (ev.kind == SpuriousResult::Inconclusive) report.inconclusive.push_back(ev);
                report.classifications.push_back(std::move(ev));
            }
            switch (p.result.verdict.kind) {
                case VerdictKind::Holds: ++stats.holds; break;
                case VerdictKind::Vacuous: ++stats.vacuous; break;
                case VerdictKind::Violated:
                    if (p.result.classification == CexClass::Inconclusive)
                        ++stats.violated_inconclusive;
                    else
                        ++stats.violated_valid;
                    break;
            }
            results.push_back(std::move(p.result));
        }
        report.check_seconds = std::chrono::duration<double>(clock::now() - t1).count();
        stats.alpha = alpha(results);
        report.per_iteration.push_back(stats);
        report.final_states = static_cast<int>(m.state_count());
        report.final_results = results;
        report.final_conditions = conditions;
        report.alpha_total = results.size();
        report.alpha_held = static_cast<std::size_t>(stats.holds + stats.vacuous);
        report.alpha = stats.alpha;
        report.status = report.alpha == 1.0 ? RunStatus::Success : RunStatus::Incomplete;
        rr.automaton = std::move(m);
    } catch (const CapacityError& e) {
        report.status = RunStatus::Capacity;
        report.capacity_message = e.what();
    }
    if (rr.automaton && reference) report.d = score_d(*rr.automaton, *reference);
    report.total_seconds = std::chrono::duration<double>(clock::now() - started).count();
    return rr;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline nlohmann::json valuation_to_json(const Valuation& v) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        const auto& decl = v.layout->vars[i];
        switch (decl.domain.kind) {
            case DomainKind::Boolean: row[decl.name] = v.values[i] != 0; break;
            case DomainKind::BoundedInt: row[decl.name] = v.values[i]; break;
            case DomainKind::Enumeration:
                row[decl.name] = decl.domain.value_to_string(v.values[i]);
                break;
        }
    }
    return row;
}

inline nlohmann::json report_to_json(const LoopReport& r) {
    nlohmann::json j;
    j["format"] = "aml-report";
    j["status"] = run_status_name(r.status);
    j["iterations"] = r.iterations;
    j["states"] = r.final_states;
    j["alpha"] = {{"held", r.alpha_held}, {"total", r.alpha_total}, {"value", r.alpha}};
    if (r.d)
        j["d"] = *r.d;
    else
        j["d"] = nullptr;
    j["flagged_ce_traces"] = r.flagged_ce_traces;
    if (!r.capacity_message.empty()) j["capacity_message"] = r.capacity_message;
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& s : r.per_iteration) {
        iters.push_back({{"iteration", s.iteration},
                         {"conditions", s.conditions},
                         {"holds", s.holds},
                         {"vacuous", s.vacuous},
                         {"violated_valid", s.violated_valid},
                         {"violated_inconclusive", s.violated_inconclusive},
                         {"pre_strengthening_violations", s.pre_strengthening_violations},
                         {"spurious_eliminated", s.spurious_eliminated},
                         {"duplicate_strengthenings", s.duplicate_strengthenings},
                         {"ce_traces", s.ce_traces},
                         {"states", s.states},
                         {"alpha", s.alpha}});
    }
    j["per_iteration"] = std::move(iters);
    nlohmann::json inconclusive = nlohmann::json::array();
    for (const auto& ev : r.inconclusive) {
        nlohmann::json w = nlohmann::json::array();
        for (const auto& o : ev.witness) w.push_back(valuation_to_json(o));
        inconclusive.push_back({{"iteration", ev.iteration},
                                {"condition", ev.condition_id},
                                {"v_t", valuation_to_json(ev.v_t)},
                                {"v_t1", valuation_to_json(ev.v_t1)},
                                {"step_window", std::move(w)}});
    }
    j["inconclusive_counterexamples"] = std::move(inconclusive);
    double total = r.total_seconds > 0 ? r.total_seconds : 1e-9;
    double learn_frac = r.learn_seconds / total;
    double check_frac = r.check_seconds / total;
    j["wallclock"] = {{"timestamp_utc", r.timestamp_utc},
                      {"total_seconds", r.total_seconds},
                      {"learn_seconds", r.learn_seconds},
                      {"check_seconds", r.check_seconds},
                      {"learn_fraction", learn_frac},
                      {"check_fraction", check_frac},
                      {"overhead_fraction", 1.0 - learn_frac - check_frac}};
    return j;
}

} // namespace aml
