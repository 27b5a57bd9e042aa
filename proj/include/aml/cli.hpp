// Command-line workflows. Exit codes: 0 success (alpha = 1), 1 incomplete
// (alpha < 1), 2 usage or malformed input, 3 capacity or timeout.
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aml/aml.hpp"

namespace aml {

namespace cli {

constexpr int kExitSuccess = 0;
constexpr int kExitIncomplete = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCapacity = 3;

struct LearnOptions {
    std::string system_path;
    std::string traces_path;
    std::string out_dir = "aml-out";
    std::size_t n = 50;
    std::size_t length = 50;
    std::uint64_t seed = 1;
    std::string strategy = "ktails";
    int k_merge = 1;
    std::string abstraction = "value-equality";
    int max_splits = 2;
    int k = 0; // 0: from the system file or the width heuristic
    int max_iterations = 40;
    double timeout_seconds = 600.0;
    int jobs = 1;
    bool passive = false;
    std::size_t passive_n = 1000;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
}

inline LoopConfig loop_config_of(const LearnOptions& o) {
    LoopConfig cfg;
    cfg.initial_traces = o.n;
    cfg.trace_length = o.length;
    cfg.seed = o.seed;
    cfg.learner.strategy =
        o.strategy == "pta-exact" ? LearnerConfig::PtaExact : LearnerConfig::KTails;
    cfg.learner.k_merge = o.k_merge;
    cfg.learner.abstraction = o.abstraction == "interval-split" ? LearnerConfig::IntervalSplit
                                                                : LearnerConfig::ValueEquality;
    cfg.learner.max_splits = o.max_splits;
    cfg.checker.k = o.k;
    cfg.max_iterations = o.max_iterations;
    cfg.timeout_seconds = o.timeout_seconds;
    cfg.jobs = o.jobs;
    return cfg;
}

inline nlohmann::json manifest_of(const LearnOptions& o) {
    nlohmann::json m;
    m["format"] = "aml-manifest";
    m["subcommand"] = o.passive ? "learn --passive" : "learn";
    m["system"] = o.system_path;
    if (o.traces_path.empty())
        m["traces"] = nullptr;
    else
        m["traces"] = o.traces_path;
    m["n"] = o.n;
    m["length"] = o.length;
    m["seed"] = o.seed;
    m["strategy"] = o.strategy;
    m["k_merge"] = o.k_merge;
    m["abstraction"] = o.abstraction;
    m["max_splits"] = o.max_splits;
    m["k"] = o.k;
    m["max_iterations"] = o.max_iterations;
    m["timeout_seconds"] = o.timeout_seconds;
    m["jobs"] = o.jobs;
    m["passive"] = o.passive;
    m["passive_n"] = o.passive_n;
    m["out_dir"] = o.out_dir;
    return m;
}

inline LearnOptions options_of_manifest(const nlohmann::json& m) {
    LearnOptions o;
    o.system_path = m.at("system").get<std::string>();
    if (!m.at("traces").is_null()) o.traces_path = m.at("traces").get<std::string>();
    o.n = m.at("n").get<std::size_t>();
    o.length = m.at("length").get<std::size_t>();
    o.seed = m.at("seed").get<std::uint64_t>();
    o.strategy = m.at("strategy").get<std::string>();
    o.k_merge = m.at("k_merge").get<int>();
    o.abstraction = m.at("abstraction").get<std::string>();
    o.max_splits = m.at("max_splits").get<int>();
    o.k = m.at("k").get<int>();
    o.max_iterations = m.at("max_iterations").get<int>();
    o.timeout_seconds = m.at("timeout_seconds").get<double>();
    o.jobs = m.at("jobs").get<int>();
    o.passive = m.at("passive").get<bool>();
    o.passive_n = m.at("passive_n").get<std::size_t>();
    o.out_dir = m.at("out_dir").get<std::string>();
    return o;
}

inline int run_learn(const LearnOptions& o, std::ostream& out, std::ostream& err) {
    ParsedSystem parsed = parse_system(read_file(o.system_path));
    LoopConfig cfg = loop_config_of(o);

    std::optional<TraceSet> initial;
    if (!o.traces_path.empty())
        initial = traces_from_json(nlohmann::json::parse(read_file(o.traces_path)),
                                   parsed.system.observed_layout());

    RunResult rr = o.passive
                       ? baseline_random(parsed.system, parsed.reference, o.passive_n, cfg)
                       : run(parsed.system, parsed.reference, cfg,
                             initial ? &*initial : nullptr);

    std::filesystem::create_directories(o.out_dir);
    nlohmann::json report = report_to_json(rr.report);
    report["system"] = o.system_path;
    write_file(o.out_dir + "/report.json", report.dump(2) + "\n");
    write_file(o.out_dir + "/manifest.json", manifest_of(o).dump(2) + "\n");
    if (rr.automaton) {
        write_file(o.out_dir + "/model.json", rr.automaton->to_json().dump(2) + "\n");
        write_file(o.out_dir + "/model.dot", rr.automaton->to_dot());
        write_file(o.out_dir + "/invariants.txt",
                   render_invariant_report(rr.report.final_conditions, &rr.report.final_results));
    }
    TraceSet all_ce;
    for (const auto& set : rr.report.iteration_ce_sets)
        for (const auto& t : set.traces) all_ce.insert(t);
    if (!all_ce.empty())
        write_file(o.out_dir + "/ce_traces.json",
                   traces_to_json(all_ce, parsed.system.observed_layout()).dump(2) + "\n");

    out << "status=" << run_status_name(rr.report.status) << " i=" << rr.report.iterations
        << " N=" << rr.report.final_states << " alpha=" << rr.report.alpha;
    if (rr.report.d) out << " d=" << *rr.report.d;
    out << " T=" << rr.report.total_seconds << "s\n";
    switch (rr.report.status) {
        case RunStatus::Success: return kExitSuccess;
        case RunStatus::Incomplete: return kExitIncomplete;
        case RunStatus::Timeout:
        case RunStatus::Capacity:
            if (!rr.report.capacity_message.empty()) err << rr.report.capacity_message << "\n";
            return kExitCapacity;
    }
    return kExitIncomplete;
}

inline int run_check(const std::string& system_path, const std::string& model_path, int k,
                     const std::string& report_out, std::ostream& out) {
    ParsedSystem parsed = parse_system(read_file(system_path));
    SymbolicNfa model = nfa_from_json(nlohmann::json::parse(read_file(model_path)),
                                      parsed.system.observed_layout());
    CheckerConfig ck;
    ck.k = k >= 2 ? k : parsed.system.effective_k();
    std::vector<Condition> conditions = extract_conditions(model, parsed.system);
    std::vector<ConditionResult> results;
    for (const auto& cond : conditions) {
        auto p = detail::process_condition(parsed.system, cond, ck, 1);
        out << p.result.condition_id << ": ";
        switch (p.result.verdict.kind) {
            case VerdictKind::Holds: out << "holds"; break;
            case VerdictKind::Vacuous: out << "vacuous"; break;
            case VerdictKind::Violated:
                out << "violated (" << cex_class_name(p.result.classification) << ") at "
                    << p.result.verdict.v_t.to_string() << " -> "
                    << p.result.verdict.v_t1.to_string();
                break;
        }
        out << "\n";
        results.push_back(std::move(p.result));
    }
    double a = alpha(results);
    out << "alpha=" << a << " (" << results.size() << " conditions)\n";
    if (!report_out.empty())
        write_file(report_out, render_invariant_report(conditions, &results));
    return a == 1.0 ? kExitSuccess : kExitIncomplete;
}

inline int run_score(const std::string& model_path, const std::string& system_path,
                     std::ostream& out, std::ostream& err) {
    ParsedSystem parsed = parse_system(read_file(system_path));
    if (!parsed.reference) {
        err << "system file has no reference automaton to score against\n";
        return kExitUsage;
    }
    SymbolicNfa model = nfa_from_json(nlohmann::json::parse(read_file(model_path)),
                                      parsed.system.observed_layout());
    out << "d=" << score_d(model, *parsed.reference) << "\n";
    return kExitSuccess;
}

inline int run_trace(const std::string& system_path, std::size_t n, std::size_t length,
                     std::uint64_t seed, const std::string& out_path, std::string format,
                     std::ostream& out) {
    ParsedSystem parsed = parse_system(read_file(system_path));
    TraceSet set = generate_trace_set(parsed.system, n, length, seed);
    if (format.empty())
        format = out_path.size() > 4 && out_path.substr(out_path.size() - 4) == ".csv" ? "csv"
                                                                                       : "json";
    if (format == "csv")
        write_file(out_path, traces_to_csv(set, parsed.system.observed_layout()));
    else
        write_file(out_path,
                   traces_to_json(set, parsed.system.observed_layout()).dump(2) + "\n");
    nlohmann::json manifest = {{"format", "aml-manifest"}, {"subcommand", "trace"},
                               {"system", system_path},    {"n", n},
                               {"length", length},         {"seed", seed},
                               {"out", out_path}};
    write_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
    out << "wrote " << set.size() << " traces to " << out_path << "\n";
    return kExitSuccess;
}

} // namespace cli

/// Full argument-vector entry point, also used in-process by tests.
/// AML_OUT_DIR supplies the default output directory.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"active model learning of finite-state abstractions from traces"};
    app.require_subcommand(1);

    cli::LearnOptions lo;
    if (const char* env_out = std::getenv("AML_OUT_DIR")) lo.out_dir = env_out;
    auto* learn_cmd =
        app.add_subcommand("learn", "run the active loop (or a passive baseline) on a system");
    learn_cmd->add_option("--system", lo.system_path, "system definition (.ts-dsl)")->required();
    learn_cmd->add_option("--traces", lo.traces_path, "initial trace set (JSON) instead of simulation");
    learn_cmd->add_option("--out-dir", lo.out_dir, "output directory");
    learn_cmd->add_option("-n,--traces-count", lo.n, "initial trace count");
    learn_cmd->add_option("--len", lo.length, "trace length");
    learn_cmd->add_option("--seed", lo.seed, "simulation seed");
    learn_cmd->add_option("--strategy", lo.strategy, "pta-exact | ktails")
        ->check(CLI::IsMember({"pta-exact", "ktails"}));
    learn_cmd->add_option("--k-merge", lo.k_merge, "ktails context length");
    learn_cmd->add_option("--abstraction", lo.abstraction, "value-equality | interval-split")
        ->check(CLI::IsMember({"value-equality", "interval-split"}));
    learn_cmd->add_option("--max-splits", lo.max_splits, "interval-split class bound");
    learn_cmd->add_option("--k", lo.k, "induction depth (default: system file or heuristic)");
    learn_cmd->add_option("--max-iters", lo.max_iterations, "iteration budget");
    learn_cmd->add_option("--timeout", lo.timeout_seconds, "wall-clock budget in seconds");
    learn_cmd->add_option("--jobs", lo.jobs, "parallel condition checks");
    learn_cmd->add_flag("--passive", lo.passive, "random-sampling baseline, no refinement");
    learn_cmd->add_option("--passive-n", lo.passive_n, "baseline trace count");

    std::string manifest_path, replay_out_dir;
    auto* replay_cmd = app.add_subcommand("replay", "re-run a recorded manifest");
    replay_cmd->add_option("--manifest", manifest_path, "manifest.json of a previous run")
        ->required();
    replay_cmd->add_option("--out-dir", replay_out_dir, "override the recorded output directory");

    std::string check_system, check_model, check_report;
    int check_k = 0;
    auto* check_cmd = app.add_subcommand("check", "verify a model's conditions against a system");
    check_cmd->add_option("--system", check_system, "system definition (.ts-dsl)")->required();
    check_cmd->add_option("--model", check_model, "model JSON")->required();
    check_cmd->add_option("--k", check_k, "induction depth");
    check_cmd->add_option("--report", check_report, "write the invariant report here");

    std::string score_system, score_model;
    auto* score_cmd = app.add_subcommand("score", "match a model against a reference automaton");
    score_cmd->add_option("--model", score_model, "model JSON")->required();
    score_cmd->add_option("--system", score_system, "system file with a reference block")
        ->required();

    std::string trace_system, trace_out, trace_format;
    std::size_t trace_n = 50, trace_len = 50;
    std::uint64_t trace_seed = 1;
    auto* trace_cmd = app.add_subcommand("trace", "generate random execution traces");
    trace_cmd->add_option("--system", trace_system, "system definition (.ts-dsl)")->required();
    trace_cmd->add_option("-n,--traces-count", trace_n, "trace count");
    trace_cmd->add_option("--len", trace_len, "trace length");
    trace_cmd->add_option("--seed", trace_seed, "simulation seed");
    trace_cmd->add_option("--out", trace_out, "output file (.json or .csv)")->required();
    trace_cmd->add_option("--format", trace_format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));

    std::vector<const char*> argv;
    argv.push_back("aml");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return cli::kExitSuccess;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return cli::kExitUsage;
    }

    try {
        if (learn_cmd->parsed()) return cli::run_learn(lo, out, err);
        if (replay_cmd->parsed()) {
            nlohmann::json m = nlohmann::json::parse(read_file(manifest_path));
            cli::LearnOptions o = cli::options_of_manifest(m);
            if (!replay_out_dir.empty()) o.out_dir = replay_out_dir;
            return cli::run_learn(o, out, err);
        }
        if (check_cmd->parsed())
            return cli::run_check(check_system, check_model, check_k, check_report, out);
        if (score_cmd->parsed()) return cli::run_score(score_model, score_system, out, err);
        if (trace_cmd->parsed())
            return cli::run_trace(trace_system, trace_n, trace_len, trace_seed, trace_out,
                                  trace_format, out);
    } catch (const CapacityError& e) {
        err << "capacity: " << e.what() << "\n";
        return cli::kExitCapacity;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return cli::kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return cli::kExitUsage;
    }
    return cli::kExitUsage;
}

} // namespace aml
