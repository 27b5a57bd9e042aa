#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace aml;

static const std::string kSuiteDir = AML_BENCHMARKS_DIR;

TEST_CASE("the suite manifest loads and no entry fails to parse") {
    auto entries = load_benchmark_suite(kSuiteDir);
    CHECK(entries.size() >= 8);
    for (const auto& e : entries) {
        INFO(e.name);
        CHECK(e.k >= 2);
        ParsedSystem parsed = load_benchmark(e, kSuiteDir);
        CHECK(parsed.system.effective_k() == e.k);
        if (!e.capacity_demo) {
            REQUIRE(parsed.reference.has_value());
            CHECK(parsed.reference->all_states_reachable());
            CHECK(e.expected_alpha == 1.0);
        }
    }
}

TEST_CASE("the heater entry matches the published two-state shape") {
    auto entries = load_benchmark_suite(kSuiteDir);
    const BenchmarkEntry* heater = nullptr;
    for (const auto& e : entries)
        if (e.name == "heater") heater = &e;
    REQUIRE(heater != nullptr);
    ParsedSystem parsed = load_benchmark(*heater, kSuiteDir);
    REQUIRE(parsed.reference.has_value());
    CHECK(parsed.reference->state_count() == 2);
    CHECK(parsed.reference->transitions().size() == 4);
}

TEST_CASE("suite policy: desk-scale reachable state spaces") {
    auto entries = load_benchmark_suite(kSuiteDir);
    for (const auto& e : entries) {
        if (e.capacity_demo) continue;
        INFO(e.name);
        ParsedSystem parsed = load_benchmark(e, kSuiteDir);
        auto reachable = parsed.system.reachable_states(100000);
        CHECK(reachable.size() <= 100000);
        CHECK(!reachable.empty());
    }
}

TEST_CASE("the scheduler entry exercises the width heuristic for k") {
    auto entries = load_benchmark_suite(kSuiteDir);
    for (const auto& e : entries) {
        if (e.name != "counter_scheduler") continue;
        ParsedSystem parsed = load_benchmark(e, kSuiteDir);
        CHECK(parsed.system.declared_k() == 0); // nothing declared in the file
        CHECK(parsed.system.heuristic_k() == 12);
        CHECK(parsed.system.effective_k() == e.k);
    }
}

TEST_CASE("reference automata admit the system's random traces") {
    auto entries = load_benchmark_suite(kSuiteDir);
    for (const auto& e : entries) {
        if (e.capacity_demo) continue;
        INFO(e.name);
        ParsedSystem parsed = load_benchmark(e, kSuiteDir);
        TraceSet set = generate_trace_set(parsed.system, 20, 30, 5);
        for (const auto& t : set.traces) CHECK(parsed.reference->accepts(t.observations));
    }
}
