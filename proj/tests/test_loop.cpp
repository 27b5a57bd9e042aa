#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "helpers.hpp"
#include "aml/cli.hpp"

using namespace aml;

namespace {

Verdict violated(const LayoutPtr& layout, std::vector<std::int64_t> v_t,
                 std::vector<std::int64_t> v_t1) {
    Verdict v;
    v.kind = VerdictKind::Violated;
    v.v_t = Valuation(layout, std::move(v_t));
    v.v_t1 = Valuation(layout, std::move(v_t1));
    return v;
}

} // namespace

TEST_CASE("counterexample splicing keeps the prefix before the matching step") {
    auto counter = test::counter_mod4();
    const auto& layout = counter.system.observed_layout();
    TraceSet traces;
    traces.insert(test::make_trace(layout, {{1}, {2}, {3}})); // A, B, C with B |= r

    Condition cond;
    cond.kind = Condition::Step;
    cond.id = "q:in0";
    cond.antecedent = parse_predicate("c = 2", *layout);
    cond.consequent = {parse_predicate("c = 0", *layout)};

    TraceSet ce = build_counterexample_traces(counter.system, traces, cond,
                                              violated(layout, {2}, {3}), 1);
    REQUIRE(ce.size() == 1);
    std::vector<std::int64_t> got;
    for (const auto& o : ce.traces[0].observations) got.push_back(o.values[0]);
    CHECK(got == std::vector<std::int64_t>{1, 2, 3}); // prefix v1, then v_t, v_t+1
    CHECK(ce.traces[0].verified_positive);
    CHECK(ce.traces[0].provenance.kind == Provenance::Counterexample);
    CHECK(ce.traces[0].provenance.condition_id == "q:in0");
}

TEST_CASE("a first observation matching r yields the bare pair") {
    auto counter = test::counter_mod4();
    const auto& layout = counter.system.observed_layout();
    TraceSet traces;
    traces.insert(test::make_trace(layout, {{1}, {2}}));

    Condition cond;
    cond.kind = Condition::Step;
    cond.id = "q:in0";
    cond.antecedent = parse_predicate("c = 1", *layout);
    cond.consequent = {parse_predicate("c = 0", *layout)};

    TraceSet ce = build_counterexample_traces(counter.system, traces, cond,
                                              violated(layout, {1}, {2}), 2);
    REQUIRE(ce.size() == 1);
    std::vector<std::int64_t> got;
    for (const auto& o : ce.traces[0].observations) got.push_back(o.values[0]);
    CHECK(got == std::vector<std::int64_t>{1, 2}); // empty prefix before v_j
}

TEST_CASE("traces sharing the smallest prefix deduplicate to one counterexample") {
    auto counter = test::counter_mod4();
    const auto& layout = counter.system.observed_layout();
    TraceSet traces;
    traces.insert(test::make_trace(layout, {{1}, {2}, {3}}));
    traces.insert(test::make_trace(layout, {{1}, {2}, {3}, {0}}));

    Condition cond;
    cond.kind = Condition::Step;
    cond.id = "q:in0";
    cond.antecedent = parse_predicate("c = 2", *layout);
    cond.consequent = {parse_predicate("c = 0", *layout)};

    TraceSet ce = build_counterexample_traces(counter.system, traces, cond,
                                              violated(layout, {2}, {3}), 1);
    CHECK(ce.size() == 1);
}

TEST_CASE("no matching prefix falls back to a flagged bare trace") {
    auto skip = test::skip_counter();
    const auto& layout = skip.system.observed_layout();
    TraceSet traces;
    traces.insert(test::make_trace(layout, {{2}, {0}}));

    Condition cond;
    cond.kind = Condition::Step;
    cond.id = "q:in0";
    cond.antecedent = parse_predicate("c = 1 or c = 3", *layout);
    cond.consequent = {parse_predicate("c = 0", *layout)};

    TraceSet ce = build_counterexample_traces(skip.system, traces, cond,
                                              violated(layout, {1}, {3}), 1);
    REQUIRE(ce.size() == 1);
    CHECK(!ce.traces[0].verified_positive);
    CHECK(ce.traces[0].observations.size() == 2);
}

TEST_CASE("initial violations yield the rejected first observation") {
    auto counter = test::counter_mod4();
    const auto& layout = counter.system.observed_layout();
    TraceSet traces;
    Condition cond;
    cond.kind = Condition::Initial;
    cond.id = "init";
    cond.antecedent = counter.system.init();

    Verdict v;
    v.kind = VerdictKind::Violated;
    v.v_t = Valuation(counter.system.state_layout(), {0});
    v.v_t1 = Valuation(layout, {1});
    TraceSet ce = build_counterexample_traces(counter.system, traces, cond, v, 1);
    REQUIRE(ce.size() == 1);
    REQUIRE(ce.traces[0].observations.size() == 1);
    CHECK(ce.traces[0].observations[0].values == std::vector<std::int64_t>{1});
    CHECK(ce.traces[0].verified_positive);
    CHECK(trace_replays(counter.system, ce.traces[0].observations));
}

TEST_CASE("a fully exercised system converges in one iteration") {
    auto counter = test::counter_mod4();
    LoopConfig cfg;
    cfg.seed = 3;
    RunResult rr = run(counter.system, std::nullopt, cfg);
    CHECK(rr.report.status == RunStatus::Success);
    CHECK(rr.report.iterations == 1);
    CHECK(rr.report.alpha == 1.0);
    REQUIRE(rr.automaton.has_value());
    CHECK(rr.automaton->state_count() == 4);
}

TEST_CASE("a starved initial set still converges with d = 1") {
    auto heater = parse_system(read_file(std::string(AML_BENCHMARKS_DIR) + "/heater.ts-dsl"));
    // find a seed whose small initial set never shows mode On
    std::uint64_t starving_seed = 0;
    bool found = false;
    for (std::uint64_t seed = 0; seed < 5000 && !found; ++seed) {
        TraceSet set = generate_trace_set(heater.system, 5, 5, seed);
        bool has_on = false;
        for (const auto& t : set.traces)
            for (const auto& o : t.observations) has_on = has_on || o.get("s") == 1;
        if (!has_on) {
            starving_seed = seed;
            found = true;
        }
    }
    REQUIRE(found);
    LoopConfig cfg;
    cfg.initial_traces = 5;
    cfg.trace_length = 5;
    cfg.seed = starving_seed;
    RunResult rr = run(heater.system, heater.reference, cfg);
    CHECK(rr.report.iterations >= 2);
    CHECK(rr.report.status == RunStatus::Success);
    CHECK(rr.report.alpha == 1.0);
    REQUIRE(rr.report.d.has_value());
    CHECK(*rr.report.d == 1.0);
}

TEST_CASE("every refinement iteration grows the language at witness level") {
    auto skip = parse_system(read_file(std::string(AML_BENCHMARKS_DIR) + "/skip_counter.ts-dsl"));
    LoopConfig cfg;
    cfg.learner.abstraction = LearnerConfig::IntervalSplit;
    cfg.learner.max_splits = 2;
    RunResult rr = run(skip.system, skip.reference, cfg);
    REQUIRE(rr.report.status == RunStatus::Success);
    REQUIRE(rr.report.iterations >= 2);
    REQUIRE(rr.report.iteration_automata.size() >= 1);
    for (std::size_t j = 0; j < rr.report.iteration_ce_sets.size(); ++j) {
        const SymbolicNfa& before = rr.report.iteration_automata[j];
        const SymbolicNfa& after = j + 1 < rr.report.iteration_automata.size()
                                       ? rr.report.iteration_automata[j + 1]
                                       : *rr.automaton;
        bool grew = false;
        for (const auto& t : rr.report.iteration_ce_sets[j].traces)
            grew = grew || (!before.accepts(t.observations) && after.accepts(t.observations));
        CHECK(grew);
    }
}

TEST_CASE("score_d: identical automata score one, partial matches score fractionally") {
    auto heater = test::heater_hysteresis();
    auto layout = heater.system.observed_layout();
    SymbolicNfa ref = test::fig2_automaton(layout);
    CHECK(score_d(ref, ref) == 1.0);

    // drop the switch edges: both dwell loops still match under the
    // identity correspondence, the two switches cannot
    std::vector<NfaTransition> half;
    half.push_back({0, 0, parse_predicate("s = Off", *layout)});
    half.push_back({1, 1, parse_predicate("s = On", *layout)});
    half.push_back({0, 1, parse_predicate("temp > 5 and s = On", *layout)});
    SymbolicNfa partial(layout, {"a", "b"}, {0}, std::move(half));
    CHECK(score_d(partial, ref) == 0.75);

    SymbolicNfa empty(layout, {"only"}, {0}, {});
    CHECK(score_d(empty, ref) == 0.0);
}

TEST_CASE("score_d matches predicates semantically, not textually") {
    auto counter = test::counter_mod4();
    auto layout = counter.system.observed_layout();
    SymbolicNfa ref(layout, {"r"}, {0}, {{0, 0, parse_predicate("c <= 1", *layout)}});
    SymbolicNfa m(layout, {"s"}, {0}, {{0, 0, parse_predicate("c = 0 or c = 1", *layout)}});
    CHECK(score_d(m, ref) == 1.0);
}

TEST_CASE("passive baseline on a trivially covered system reaches alpha one") {
    auto counter = test::counter_mod4();
    LoopConfig cfg;
    cfg.trace_length = 20;
    RunResult rr = baseline_random(counter.system, std::nullopt, 20, cfg);
    CHECK(rr.report.status == RunStatus::Success);
    CHECK(rr.report.alpha == 1.0);
    CHECK(rr.report.iterations == 1);
}

TEST_CASE("report timing fractions account for the whole runtime") {
    auto counter = test::counter_mod4();
    LoopConfig cfg;
    RunResult rr = run(counter.system, std::nullopt, cfg);
    nlohmann::json j = report_to_json(rr.report);
    double lf = j["wallclock"]["learn_fraction"].get<double>();
    double cf = j["wallclock"]["check_fraction"].get<double>();
    double of = j["wallclock"]["overhead_fraction"].get<double>();
    CHECK(lf >= 0.0);
    CHECK(cf >= 0.0);
    CHECK(std::abs(lf + cf + of - 1.0) < 1e-9);
}

TEST_CASE("parallel condition checking returns identical reports") {
    auto heater = parse_system(read_file(std::string(AML_BENCHMARKS_DIR) + "/heater.ts-dsl"));
    LoopConfig serial;
    serial.seed = 9;
    LoopConfig parallel = serial;
    parallel.jobs = 4;
    RunResult a = run(heater.system, heater.reference, serial);
    RunResult b = run(heater.system, heater.reference, parallel);
    nlohmann::json ja = report_to_json(a.report);
    nlohmann::json jb = report_to_json(b.report);
    ja.erase("wallclock");
    jb.erase("wallclock");
    CHECK(ja.dump() == jb.dump());
    CHECK(a.automaton->to_json().dump() == b.automaton->to_json().dump());
}

TEST_CASE("cli: exit codes follow the contract") {
    std::ostringstream out, err;
    std::string tmp = (std::filesystem::temp_directory_path() / "aml-cli-test").string();
    std::string bench = std::string(AML_BENCHMARKS_DIR);

    CHECK(run_cli({"learn", "--system", bench + "/counter.ts-dsl", "--out-dir", tmp + "/c"},
                  out, err) == 0);
    CHECK(run_cli({"learn", "--system", bench + "/wide_register.ts-dsl", "--out-dir", tmp + "/w"},
                  out, err) == 3);
    CHECK(run_cli({"learn", "--system", "/nonexistent.ts-dsl"}, out, err) == 2);
    CHECK(run_cli({"bogus-subcommand"}, out, err) == 2);
    CHECK(run_cli({"learn"}, out, err) == 2); // missing required option
    CHECK(run_cli({"check", "--system", bench + "/counter.ts-dsl", "--model",
                   tmp + "/c/model.json"},
                  out, err) == 0);
    CHECK(run_cli({"score", "--system", bench + "/counter.ts-dsl", "--model",
                   tmp + "/c/model.json"},
                  out, err) == 0);
    CHECK(out.str().find("d=1") != std::string::npos);
}

TEST_CASE("cli: trace files replay byte for byte under one seed") {
    std::ostringstream out, err;
    std::string tmp = (std::filesystem::temp_directory_path() / "aml-trace-test").string();
    std::filesystem::create_directories(tmp);
    std::string bench = std::string(AML_BENCHMARKS_DIR);
    REQUIRE(run_cli({"trace", "--system", bench + "/heater.ts-dsl", "-n", "5", "--len", "6",
                     "--seed", "11", "--out", tmp + "/a.json"},
                    out, err) == 0);
    REQUIRE(run_cli({"trace", "--system", bench + "/heater.ts-dsl", "-n", "5", "--len", "6",
                     "--seed", "11", "--out", tmp + "/b.json"},
                    out, err) == 0);
    CHECK(read_file(tmp + "/a.json") == read_file(tmp + "/b.json"));
    REQUIRE(run_cli({"trace", "--system", bench + "/heater.ts-dsl", "--out", tmp + "/c.csv"},
                    out, err) == 0);
    CHECK(read_file(tmp + "/c.csv").rfind("trace,step,provenance,s,temp", 0) == 0);
}

TEST_CASE("cli: learn consumes a pre-generated trace document") {
    std::ostringstream out, err;
    std::string tmp = (std::filesystem::temp_directory_path() / "aml-traces-in-test").string();
    std::filesystem::create_directories(tmp);
    std::string bench = std::string(AML_BENCHMARKS_DIR);
    REQUIRE(run_cli({"trace", "--system", bench + "/rare_guard.ts-dsl", "-n", "20", "--len",
                     "20", "--seed", "4", "--out", tmp + "/t.json"},
                    out, err) == 0);
    int rc = run_cli({"learn", "--system", bench + "/rare_guard.ts-dsl", "--traces",
                      tmp + "/t.json", "--out-dir", tmp + "/run"},
                     out, err);
    CHECK(rc == 0);
    // refinement happened, so the counterexample document exists and parses
    auto parsed = parse_system(read_file(bench + "/rare_guard.ts-dsl"));
    TraceSet ce = traces_from_json(nlohmann::json::parse(read_file(tmp + "/run/ce_traces.json")),
                                   parsed.system.observed_layout());
    CHECK(!ce.empty());
    for (const auto& t : ce.traces) CHECK(t.provenance.kind == Provenance::Counterexample);
}

TEST_CASE("cli: the environment supplies a default output directory") {
    std::ostringstream out, err;
    std::string tmp = (std::filesystem::temp_directory_path() / "aml-envdir-test").string();
    std::filesystem::remove_all(tmp);
    setenv("AML_OUT_DIR", tmp.c_str(), 1);
    std::string bench = std::string(AML_BENCHMARKS_DIR);
    int rc = run_cli({"learn", "--system", bench + "/counter.ts-dsl"}, out, err);
    unsetenv("AML_OUT_DIR");
    CHECK(rc == 0);
    CHECK(std::filesystem::exists(tmp + "/report.json"));
}

TEST_CASE("cli: manifests replay to identical artifacts") {
    std::ostringstream out, err;
    std::string tmp = (std::filesystem::temp_directory_path() / "aml-replay-test").string();
    std::string bench = std::string(AML_BENCHMARKS_DIR);
    REQUIRE(run_cli({"learn", "--system", bench + "/security_modes.ts-dsl", "--out-dir",
                     tmp + "/one", "--seed", "21"},
                    out, err) == 0);
    REQUIRE(run_cli({"replay", "--manifest", tmp + "/one/manifest.json", "--out-dir",
                     tmp + "/two"},
                    out, err) == 0);
    auto scrub = [](const std::string& path) {
        nlohmann::json j = nlohmann::json::parse(read_file(path));
        j.erase("wallclock");
        return j.dump();
    };
    CHECK(scrub(tmp + "/one/report.json") == scrub(tmp + "/two/report.json"));
    CHECK(read_file(tmp + "/one/model.json") == read_file(tmp + "/two/model.json"));
    CHECK(read_file(tmp + "/one/invariants.txt") == read_file(tmp + "/two/invariants.txt"));
}
