#include "arnold/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arnold/json_io.hpp"

namespace arnold {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("ARNOLD_LOG");
        if (!env) return 0;
        const std::string value(env);
        if (value == "debug") return 2;
        if (value == "info") return 1;
        return 0;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[arnold] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[arnold] " << msg << "\n";
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        write_file(out_path, content);
}

// Options shared across subcommands, mirroring the CLI contract.
struct RunConfig {
    std::string topology_path;
    std::string job_path;
    std::string trace_path;
    std::string profiles_path;
    std::string settings_path;
    std::string instance_path;
    std::string out_path;
    std::string events_path;
    std::optional<double> alpha;
    std::string unit = "row";
    std::vector<std::string> algorithms;
    std::uint64_t seed = 0;
    double time_limit = 10.0;
    long long enum_cap = 10000;
    int jobs = 1;
    long long interval = 30;
    std::string predictor = "oracle";
    int noise = 0;
    // profiles subcommand
    std::string action = "list";
    ProfileEntry entry;
};

SchedulingUnit unit_of(const RunConfig& cfg) {
    return cfg.unit == "col" || cfg.unit == "column" ? SchedulingUnit::Column
                                                     : SchedulingUnit::Row;
}

Affinity resolve_affinity(const RunConfig& cfg, const JobSpec& job) {
    if (cfg.alpha) return {*cfg.alpha, 1 - *cfg.alpha};
    if (cfg.profiles_path.empty())
        throw ValidationError("either --alpha or --profiles is required");
    if (job.pp == 1) {
        // Without pipeline stages only DP traffic crosses nodes.
        log_info("pp=1: r2 undefined, weighting DP spread only (alpha=1)");
        return {1.0, 0.0};
    }
    const auto db = profiles_from_json(read_file(cfg.profiles_path));
    const auto ratios = compute_ratios(job);
    const auto affinity = lookup_affinity(db, job.gpu_type, ratios.r1, ratios.r2.value_or(0.0));
    log_info("affinity from profiles: alpha=" + std::to_string(affinity.alpha) +
             " beta=" + std::to_string(affinity.beta));
    return affinity;
}

int cmd_schedule(const RunConfig& cfg) {
    const auto topo = ClusterTopology::build(topology_from_json(read_file(cfg.topology_path)));
    const auto job = job_from_json(read_file(cfg.job_path));
    const auto matrix = build_comm_matrix(job);
    const auto affinity = resolve_affinity(cfg, job);
    const AllocationState state(topo.total_nodes());

    SolverConfig solver_cfg;
    solver_cfg.time_limit_s = cfg.time_limit;
    solver_cfg.seed = cfg.seed;

    const auto start = std::chrono::steady_clock::now();
    const auto inst =
        build_mip(matrix, topo, state, affinity.alpha, affinity.beta, unit_of(cfg));
    const auto solution = solve(inst, solver_cfg);
    if (solution.status == SolveStatus::Infeasible)
        throw InfeasibleError("schedule: no feasible placement");
    const auto placement =
        assign_ranks(discretize(solution, inst), inst, matrix, topo, state);
    const double latency_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();

    validate_placement(placement, matrix, topo, state);
    emit(cfg.out_path, placement_to_json(placement));
    const double score = weighted_spread(placement, matrix, affinity.alpha, affinity.beta);
    std::printf("score=%.6g latency_ms=%.3f status=%s\n", score, latency_ms,
                solution.status == SolveStatus::Optimal ? "optimal" : "feasible_time_limit");
    return solution.status == SolveStatus::Optimal ? kExitOk : kExitInfeasible;
}

int cmd_solve(const RunConfig& cfg) {
    const auto inst = instance_from_json(read_file(cfg.instance_path));
    SolverConfig solver_cfg;
    solver_cfg.time_limit_s = cfg.time_limit;
    solver_cfg.seed = cfg.seed;
    const auto solution = solve(inst, solver_cfg);
    emit(cfg.out_path, solution_to_json(solution));
    if (solution.status == SolveStatus::Infeasible) return kExitInfeasible;
    if (solution.status == SolveStatus::Optimal) verify_solution(inst, solution);
    return solution.status == SolveStatus::Optimal ? kExitOk : kExitInfeasible;
}

int cmd_benchmark(const RunConfig& cfg) {
    const auto settings = settings_from_json(read_file(cfg.settings_path));
    BenchmarkConfig bench;
    if (cfg.alpha) bench.alphas = {*cfg.alpha};
    bench.solver.time_limit_s = cfg.time_limit;
    bench.solver.seed = cfg.seed;
    bench.enumeration.search_cap = cfg.enum_cap;
    bench.seed = cfg.seed;
    bench.jobs = cfg.jobs;
    const auto algorithms = cfg.algorithms.empty() ? kAllAlgorithms : cfg.algorithms;
    log_info("benchmark: " + std::to_string(settings.size()) + " settings x " +
             std::to_string(algorithms.size()) + " algorithms x " +
             std::to_string(bench.alphas.size()) + " alphas");
    const auto cells = run_benchmark(settings, algorithms, bench);
    emit(cfg.out_path, benchmark_to_csv(cells));
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
    const auto topo = ClusterTopology::build(topology_from_json(read_file(cfg.topology_path)));
    const auto trace = trace_from_jsonl(read_file(cfg.trace_path));

    std::unique_ptr<JctPredictor> predictor;
    if (cfg.predictor == "oracle") {
        predictor = oracle_predictor(cfg.noise, cfg.seed);
    } else if (cfg.predictor == "histogram") {
        std::vector<TraceJob> training;
        for (const auto& job : trace)
            if (job.kind == TraceJob::Kind::Generic) training.push_back(job);
        predictor = histogram_predictor(training);
    } else {
        throw ValidationError("unknown predictor '" + cfg.predictor + "'");
    }

    ReplayConfig replay_cfg;
    replay_cfg.tick_interval = cfg.interval;
    replay_cfg.predictor = predictor.get();
    replay_cfg.reserve.alpha = cfg.alpha.value_or(0.0);
    replay_cfg.reserve.beta = 1 - replay_cfg.reserve.alpha;
    replay_cfg.reserve.unit = unit_of(cfg);
    replay_cfg.reserve.solver.time_limit_s = cfg.time_limit;
    replay_cfg.reserve.solver.seed = cfg.seed;
    if (!cfg.profiles_path.empty()) {
        for (const auto& job : trace)
            if (job.kind == TraceJob::Kind::Lpj) {
                const auto affinity = resolve_affinity(cfg, *job.lpj_spec);
                replay_cfg.reserve.alpha = affinity.alpha;
                replay_cfg.reserve.beta = affinity.beta;
                break;
            }
    }

    const auto result = replay(trace, topo, replay_cfg);
    emit(cfg.out_path, series_to_csv(result.series));
    if (!cfg.events_path.empty()) write_file(cfg.events_path, events_to_jsonl(result.log));
    std::printf("events=%zu retention_at_arrival=%.6g violations=%zu\n", result.log.size(),
                result.retention_at_arrival, result.violations.size());
    return kExitOk;
}

int cmd_profiles(const RunConfig& cfg) {
    auto db = cfg.action == "add" && !std::ifstream(cfg.profiles_path).good()
                  ? ProfileDb{}
                  : profiles_from_json(read_file(cfg.profiles_path));
    if (cfg.action == "list") {
        std::cout << profiles_to_json(db);
        return kExitOk;
    }
    if (cfg.action == "add") {
        db.push_back(cfg.entry);
        write_file(cfg.profiles_path, profiles_to_json(db));
        std::printf("added %s/%s (%zu entries)\n", cfg.entry.gpu_type.c_str(),
                    cfg.entry.tag.c_str(), db.size());
        return kExitOk;
    }
    if (cfg.action == "match") {
        const auto affinity =
            lookup_affinity(db, cfg.entry.gpu_type, cfg.entry.r1, cfg.entry.r2);
        std::printf("{\"alpha\": %.6g, \"beta\": %.6g}\n", affinity.alpha, affinity.beta);
        return kExitOk;
    }
    throw ValidationError("profiles: unknown action '" + cfg.action + "'");
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"Topology-aware scheduling toolkit for large training jobs"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", cfg.seed, "Seed for randomized components");
        cmd->add_option("--time-limit", cfg.time_limit, "Solver time limit in seconds");
        cmd->add_option("--out", cfg.out_path, "Output path (stdout when omitted)");
    };

    auto* schedule = app.add_subcommand("schedule", "Place one job on a cluster");
    schedule->add_option("--topology", cfg.topology_path, "Topology JSON")->required();
    schedule->add_option("--job", cfg.job_path, "Job spec JSON")->required();
    schedule->add_option("--profiles", cfg.profiles_path, "Profile database JSON");
    schedule->add_option("--alpha", cfg.alpha, "DP-spread weight in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    schedule->add_option("--unit", cfg.unit, "Scheduling unit")
        ->check(CLI::IsMember({"row", "col"}));
    add_common(schedule);

    auto* benchmark = app.add_subcommand("benchmark", "Score algorithms across settings");
    benchmark->add_option("--settings", cfg.settings_path, "Benchmark settings JSON")->required();
    benchmark->add_option("--algorithm", cfg.algorithms, "Algorithms to run (repeatable)")
        ->check(CLI::IsMember(kAllAlgorithms));
    benchmark->add_option("--alpha", cfg.alpha, "Single alpha instead of the default sweep")
        ->check(CLI::Range(0.0, 1.0));
    benchmark->add_option("--enum-cap", cfg.enum_cap, "Enumeration search cap");
    benchmark->add_option("--jobs", cfg.jobs, "Parallel benchmark cells")
        ->check(CLI::PositiveNumber);
    add_common(benchmark);

    auto* simulate = app.add_subcommand("simulate", "Replay a job trace");
    simulate->add_option("--trace", cfg.trace_path, "Trace JSONL")->required();
    simulate->add_option("--topology", cfg.topology_path, "Topology JSON")->required();
    simulate->add_option("--profiles", cfg.profiles_path, "Profile database JSON");
    simulate->add_option("--alpha", cfg.alpha, "LPJ DP-spread weight")
        ->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--unit", cfg.unit, "Scheduling unit")
        ->check(CLI::IsMember({"row", "col"}));
    simulate->add_option("--interval", cfg.interval, "Policy tick interval, seconds");
    simulate->add_option("--predictor", cfg.predictor, "JCT predictor")
        ->check(CLI::IsMember({"oracle", "histogram"}));
    simulate->add_option("--noise", cfg.noise, "Oracle predictor jitter, buckets");
    simulate->add_option("--events", cfg.events_path, "Event log JSONL output path");
    add_common(simulate);

    auto* solve_cmd = app.add_subcommand("solve", "Solve a raw scheduling instance");
    solve_cmd->add_option("--instance", cfg.instance_path, "Instance JSON")->required();
    add_common(solve_cmd);

    auto* profiles = app.add_subcommand("profiles", "Inspect or edit a profile database");
    profiles->add_option("action", cfg.action, "list | add | match")
        ->check(CLI::IsMember({"list", "add", "match"}));
    profiles->add_option("--profiles", cfg.profiles_path, "Profile database JSON")->required();
    profiles->add_option("--gpu-type", cfg.entry.gpu_type, "GPU type");
    profiles->add_option("--tag", cfg.entry.tag, "Entry tag");
    profiles->add_option("--r1", cfg.entry.r1, "Computation-to-communication ratio");
    profiles->add_option("--r2", cfg.entry.r2, "DP-to-PP volume ratio");
    profiles->add_option("--j-dp", cfg.entry.j_dp, "DP-aligned improvement, percent");
    profiles->add_option("--j-pp", cfg.entry.j_pp, "PP-aligned improvement, percent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            app.exit(e);
            return kExitOk;
        }
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (schedule->parsed()) return cmd_schedule(cfg);
        if (benchmark->parsed()) return cmd_benchmark(cfg);
        if (simulate->parsed()) return cmd_simulate(cfg);
        if (solve_cmd->parsed()) return cmd_solve(cfg);
        if (profiles->parsed()) return cmd_profiles(cfg);
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const SearchCapError& e) {
        std::cerr << "search cap: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    }
    log_debug("no subcommand dispatched");
    return kExitUsage;
}

}  // namespace arnold
