// Bundled benchmark suite: .ts-dsl systems with reference automata and a
// manifest of expected outcomes.
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aml/dsl.hpp"
#include "aml/loop.hpp"

namespace aml {

struct BenchmarkEntry {
    std::string name;
    std::string file; // relative to the suite directory
    int k = 2;
    bool rare_guard = false;    // baseline-separation experiment subject
    bool capacity_demo = false; // expected to exit with the capacity status
    // expectations for non-capacity entries
    int expected_i_min = 1;
    int expected_i_max = 1;
    int expected_states = 0;
    double expected_alpha = 1.0;
    double expected_d = 1.0;
    LoopConfig config; // learner/trace overrides from the manifest

    std::string path(const std::string& suite_dir) const { return suite_dir + "/" + file; }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<BenchmarkEntry> load_benchmark_suite(const std::string& suite_dir) {
    nlohmann::json j = nlohmann::json::parse(read_file(suite_dir + "/suite.json"));
    if (j.value("format", "") != "aml-suite") throw ValidationError("not an aml-suite manifest");
    std::vector<BenchmarkEntry> out;
    for (const auto& je : j.at("benchmarks")) {
        BenchmarkEntry e;
        e.name = je.at("name").get<std::string>();
        e.file = je.at("file").get<std::string>();
        e.k = je.value("k", 2);
        e.rare_guard = je.value("rare_guard", false);
        e.capacity_demo = je.value("capacity_demo", false);
        if (je.contains("expected")) {
            const auto& ex = je.at("expected");
            e.expected_i_min = ex.value("i_min", 1);
            e.expected_i_max = ex.value("i_max", e.expected_i_min);
            e.expected_states = ex.value("states", 0);
            e.expected_alpha = ex.value("alpha", 1.0);
            e.expected_d = ex.value("d", 1.0);
        }
        if (je.contains("config")) {
            const auto& c = je.at("config");
            e.config.initial_traces = c.value("traces", e.config.initial_traces);
            e.config.trace_length = c.value("length", e.config.trace_length);
            e.config.seed = c.value("seed", e.config.seed);
            e.config.max_iterations = c.value("max_iterations", e.config.max_iterations);
            std::string strategy = c.value("strategy", "ktails");
            e.config.learner.strategy =
                strategy == "pta-exact" ? LearnerConfig::PtaExact : LearnerConfig::KTails;
            e.config.learner.k_merge = c.value("k_merge", e.config.learner.k_merge);
            std::string abstraction = c.value("abstraction", "value-equality");
            e.config.learner.abstraction = abstraction == "interval-split"
                                               ? LearnerConfig::IntervalSplit
                                               : LearnerConfig::ValueEquality;
            e.config.learner.max_splits = c.value("max_splits", e.config.learner.max_splits);
        }
        out.push_back(std::move(e));
    }
    if (out.empty()) throw ValidationError("benchmark suite is empty");
    return out;
}

/// Parses one entry's system file; every entry of a valid suite parses.
inline ParsedSystem load_benchmark(const BenchmarkEntry& entry, const std::string& suite_dir) {
    return parse_system(read_file(entry.path(suite_dir)));
}

} // namespace aml
