// Acceptance suite: end-to-end checks of the solver, the volume model, the
// baselines, and the queue policy at pinned tolerances. Prints one PASS/FAIL
// line per criterion and exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "arnold/baselines.hpp"
#include "arnold/json_io.hpp"
#include "arnold/metrics.hpp"
#include "arnold/queue.hpp"
#include "arnold/sim.hpp"
#include "arnold/solver.hpp"

using namespace arnold;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void criterion(int number, const std::string& name, const std::function<std::string()>& body) {
    try {
        const std::string detail = body();
        std::printf("PASS  criterion %d: %s%s%s\n", number, name.c_str(),
                    detail.empty() ? "" : " -- ", detail.c_str());
    } catch (const std::exception& e) {
        ++failures;
        std::printf("FAIL  criterion %d: %s -- %s\n", number, name.c_str(), e.what());
    }
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error(what);
}

MipInstance make_instance(const std::vector<int>& caps, int groups, int size, double alpha) {
    MipInstance inst;
    inst.group_count = groups;
    inst.group_size = size;
    inst.minipod_count = static_cast<int>(caps.size());
    inst.capacity_nodes = caps;
    for (int c : caps) inst.capacities.push_back(static_cast<double>(c) / size);
    inst.alpha = alpha;
    inst.beta = 1 - alpha;
    return inst;
}

std::string data_path(const std::string& name) { return std::string(ARNOLD_DATA_DIR) + "/" + name; }

JobSpec lpj_spec_96() {
    JobSpec job;
    job.gpus = 96;
    job.tp = 8;
    job.pp = 2;
    job.gb = 96;
    job.mb = 2;
    job.model = {32000, 2048, 4096, 32, std::nullopt};
    return job;
}

TraceGenConfig queue_scenario(std::uint64_t seed) {
    TraceGenConfig config;
    config.job_count = 120;
    config.arrival_rate_per_hour = 240;
    config.duration_mean_s = 2400;
    config.duration_sigma = 0.6;
    config.duration_cap_s = 2 * 3600;
    config.geometric_p = 0.6;
    config.max_nodes = 6;
    config.preemptable_fraction = 0.3;
    config.seed = seed;
    LpjPlan plan;
    plan.spec = lpj_spec_96();
    plan.announce_time = 1800;
    plan.arrival_time = 1800 + 4 * 3600;  // announced four hours ahead
    plan.duration = 2 * 3600;
    config.lpj = plan;
    return config;
}

}  // namespace

int main() {
    // 1. Solver objective equals exhaustive enumeration on an instance sweep.
    criterion(1, "solver matches the enumeration oracle exactly", [] {
        const auto start = Clock::now();
        std::mt19937 rng(1);
        int compared = 0;
        for (int trial = 0; trial < 1400; ++trial) {
            const int k = 1 + static_cast<int>(rng() % 4);
            const int groups = 1 + static_cast<int>(rng() % 8);
            const int size = 1 + static_cast<int>(rng() % 4);
            std::vector<int> caps(k);
            for (int& c : caps) c = static_cast<int>(rng() % (groups * size + 2));
            const double alpha = std::vector<double>{0.0, 0.1, 0.3, 0.5, 1.0}[rng() % 5];
            auto inst = make_instance(caps, groups, size, alpha);

            long long total = 0;
            for (int c : caps) total += c;
            auto solution = solve(inst);
            if (total < inst.demand_nodes()) {
                require(solution.status == SolveStatus::Infeasible,
                        "solver must flag infeasible instances");
                continue;
            }
            require(solution.status == SolveStatus::Optimal, "solver must prove optimality");
            verify_solution(inst, solution);
            auto oracle = enumerate_instance(inst);
            require(solution.objective == oracle.objective,
                    "objective mismatch: solver " + std::to_string(solution.objective) +
                        " vs oracle " + std::to_string(oracle.objective));
            ++compared;
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        require(compared >= 500, "need at least 500 feasible instances, got " +
                                     std::to_string(compared));
        require(secs < 60.0, "suite exceeded 60 s");
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d instances equal in %.1f s", compared, secs);
        return std::string(buf);
    });

    const auto settings = settings_from_json(read_file(data_path("settings_benchmark.json")));

    // 2. Small-setting parity across the alpha sweep.
    criterion(2, "small setting: solver ties best-fit, gpu-pack, topo-aware", [&] {
        BenchmarkConfig config;
        auto cells = run_benchmark({settings[0]}, {"arnold", "bestfit", "gpupack", "topoaware"},
                                   config);
        std::map<double, double> arnold;
        for (const auto& cell : cells) {
            require(cell.status == "ok", cell.algorithm + " failed: " + cell.status);
            if (cell.algorithm == "arnold") arnold[cell.alpha] = cell.score;
        }
        std::ostringstream detail;
        for (const auto& cell : cells) {
            if (cell.algorithm == "arnold") continue;
            require(std::abs(cell.score - arnold.at(cell.alpha)) < 1e-12,
                    cell.algorithm + " at alpha=" + std::to_string(cell.alpha) + ": " +
                        std::to_string(cell.score) + " vs " +
                        std::to_string(arnold.at(cell.alpha)));
        }
        detail << "scores equal at alpha in {0, 0.1, 0.3, 0.5}";
        return detail.str();
    });

    // 3. Medium/large settings: solver at or below every baseline everywhere.
    criterion(3, "medium/large settings: solver dominates every baseline", [&] {
        BenchmarkConfig config;
        auto cells = run_benchmark({settings[1], settings[2]},
                                   {"arnold", "bestfit", "random", "gpupack", "topoaware"},
                                   config);
        std::map<std::pair<std::string, double>, double> arnold;
        for (const auto& cell : cells) {
            require(cell.status == "ok", cell.setting + "/" + cell.algorithm + " failed");
            if (cell.algorithm == "arnold") arnold[{cell.setting, cell.alpha}] = cell.score;
        }
        int dominated = 0;
        double worst_gap = 0;
        for (const auto& cell : cells) {
            if (cell.algorithm == "arnold") continue;
            const double ours = arnold.at({cell.setting, cell.alpha});
            require(ours <= cell.score + 1e-12,
                    cell.setting + "/" + cell.algorithm + " at alpha=" +
                        std::to_string(cell.alpha) + ": solver " + std::to_string(ours) +
                        " > baseline " + std::to_string(cell.score));
            if (cell.score > 0) worst_gap = std::max(worst_gap, cell.score - ours);
            ++dominated;
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d cells, max score gap %.2f", dominated, worst_gap);
        return std::string(buf);
    });

    // 4. Scalability: a 368-node job schedules fast, enumeration refuses a
    // 10-node job on the medium topology (or would run 100 s+).
    criterion(4, "368-node job under 10 s; enumeration caps out on 10 nodes", [&] {
        const auto topo = ClusterTopology::build(settings[2].topology);
        const AllocationState state(topo.total_nodes());
        const auto matrix = build_comm_matrix(settings[2].job);
        require(matrix.cell_count() == 368, "large job must cover 368 nodes");

        const auto start = Clock::now();
        auto inst = build_mip(matrix, topo, state, 0.3, 0.7, SchedulingUnit::Row);
        auto solution = solve(inst);
        auto placement = assign_ranks(discretize(solution, inst), inst, matrix, topo, state);
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        require(solution.status == SolveStatus::Optimal, "solver must finish the large job");
        validate_placement(placement, matrix, topo, state);
        require(secs <= 10.0, "368-node scheduling took " + std::to_string(secs) + " s");

        // A 10-node job (80 GPUs, tp=8, pp=1) as ten one-node groups on the
        // 5-minipod topology: the 10^5 search space trips the default cap.
        const auto medium = ClusterTopology::build(settings[1].topology);
        const AllocationState medium_state(medium.total_nodes());
        JobSpec ten;
        ten.gpus = 80;
        ten.tp = 8;
        ten.pp = 1;
        ten.gb = 10;
        ten.mb = 1;
        ten.model = {32000, 2048, 4096, 32, std::nullopt};
        const auto ten_matrix = build_comm_matrix(ten);
        bool refused = false;
        double enum_secs = 0;
        try {
            const auto t0 = Clock::now();
            enumerate_optimal(ten_matrix, medium, medium_state, 0.3, 0.7);
            enum_secs = std::chrono::duration<double>(Clock::now() - t0).count();
        } catch (const SearchCapError&) {
            refused = true;
        }
        require(refused || enum_secs > 100.0, "enumeration finished in " +
                                                  std::to_string(enum_secs) + " s without a cap");
        char buf[96];
        std::snprintf(buf, sizeof buf, "solver %.3f s; enumeration %s", secs,
                      refused ? "refused by cap" : "took 100 s+");
        return std::string(buf);
    });

    // 5. Analytical volume model magnitudes.
    criterion(5, "volume model: ~1.9 GB DP and ~33.6 MB PP per stage", [] {
        const ModelHyper model{32000, 2048, 4096, 32, std::nullopt};
        const long long dp_elems = dp_volume_elements(model, 8);
        require(dp_elems == 944'914'432LL, "DP element count drifted");
        const double dp_gb = static_cast<double>(dp_elems) * 2 / 1e9;
        require(dp_gb >= 1.0 && dp_gb <= 4.0, "DP volume outside 2x of 2 GB");

        const long long pp_elems = pp_volume_elements(1, 2048, 4096);
        require(pp_elems == 16'777'216LL, "PP element count drifted");
        const double pp_mb = static_cast<double>(pp_elems) * 2 / 1e6;
        require(pp_mb >= 15.0 && pp_mb <= 60.0, "PP volume outside 2x of 30 MB");
        char buf[96];
        std::snprintf(buf, sizeof buf, "DP %.2f GB, PP %.1f MB", dp_gb, pp_mb);
        return std::string(buf);
    });

    // 6. Communication matrix shape, exhaustively fuzzed.
    criterion(6, "comm matrix covers gpus/8 nodes (96-GPU case + 1k fuzz)", [] {
        auto matrix = build_comm_matrix(lpj_spec_96());
        require(matrix.rows == 6 && matrix.cols == 2, "96-GPU job must form a 6x2 matrix");
        require(matrix.cell_count() == 12, "96-GPU job must cover 12 nodes");

        std::mt19937 rng(6);
        int checked = 0;
        while (checked < 1000) {
            JobSpec job;
            job.model = {32000, 2048, 4096, 32, std::nullopt};
            job.tp = std::vector<int>{1, 2, 4, 8}[rng() % 4];
            job.pp = std::vector<int>{1, 2, 4, 8, 16, 32}[rng() % 6];
            const long long dp = 1 + static_cast<long long>(rng() % 96);
            job.gpus = dp * job.tp * job.pp;
            job.mb = 1;
            job.gb = dp;
            if (dp * job.tp < 8 || (dp * job.tp) % 8 != 0) continue;
            auto m = build_comm_matrix(job);
            require(static_cast<long long>(m.rows) * m.cols == job.gpus / 8,
                    "rows*cols != gpus/8");
            ++checked;
        }
        return std::string("1000 fuzzed specs clean");
    });

    // 7. Queue policy: clean handover with a perfect oracle, visible
    // violations with a noisy one.
    criterion(7, "reservation handover: retention 0 with oracle, violations with noise", [] {
        TopologySpec spec;
        spec.name = "queue";
        for (int i = 0; i < 3; ++i) spec.minipods.push_back({{{6}}});
        const auto topo = ClusterTopology::build(spec);

        const auto trace = generate_trace(queue_scenario(21));
        auto oracle = oracle_predictor();
        ReplayConfig config;
        config.predictor = oracle.get();
        const auto clean = replay(trace, topo, config);
        require(clean.retention_at_arrival == 0.0,
                "retention at arrival was " + std::to_string(clean.retention_at_arrival));
        require(clean.violations.empty(), "perfect oracle must not strand non-preemptible jobs");
        std::set<std::string> preemptable_ids;
        for (const auto& job : trace)
            if (job.preemptable) preemptable_ids.insert(job.id);
        for (const auto& event : clean.log)
            if (event.kind == EventKind::Preempt)
                require(preemptable_ids.count(event.job) == 1,
                        "non-preemptible job " + event.job + " was evicted");

        int noisy_violations = 0;
        for (std::uint64_t seed : {21, 22, 23, 24, 25}) {
            auto noisy_trace = generate_trace(queue_scenario(seed));
            auto noisy = oracle_predictor(2, seed);
            ReplayConfig noisy_config;
            noisy_config.predictor = noisy.get();
            noisy_violations +=
                static_cast<int>(replay(noisy_trace, topo, noisy_config).violations.size());
        }
        require(noisy_violations > 0, "+2 bucket noise produced no retention violations");
        char buf[96];
        std::snprintf(buf, sizeof buf, "clean handover; %d violations under noise",
                      noisy_violations);
        return std::string(buf);
    });

    // 8. Independent constraint/placement validators over fuzzed instances.
    criterion(8, "10k fuzzed instances: every returned solution validates", [] {
        std::mt19937 rng(8);
        long long validated = 0;
        for (int trial = 0; trial < 10000; ++trial) {
            const int k = 2 + static_cast<int>(rng() % 3);
            std::vector<int> sizes(k);
            for (int& s : sizes) s = 2 + static_cast<int>(rng() % 8);
            TopologySpec spec;
            spec.name = "fuzz";
            for (int s : sizes) spec.minipods.push_back({{{s}}});
            const auto topo = ClusterTopology::build(spec);
            const AllocationState state(topo.total_nodes());

            CommMatrix matrix;
            matrix.rows = 1 + static_cast<int>(rng() % 5);
            matrix.cols = 1 + static_cast<int>(rng() % 4);
            matrix.volume = {100.0, 1.0 + static_cast<double>(rng() % 500),
                             matrix.cols > 1 ? 1.0 + static_cast<double>(rng() % 500) : 0.0};
            if (matrix.cell_count() > topo.total_nodes()) continue;
            const double alpha = std::vector<double>{0.0, 0.3, 0.5}[rng() % 3];

            auto inst = build_mip(matrix, topo, state, alpha, 1 - alpha, SchedulingUnit::Row);
            auto solution = solve(inst);
            verify_solution(inst, solution);
            auto placement = assign_ranks(discretize(solution, inst), inst, matrix, topo, state);
            validate_placement(placement, matrix, topo, state);
            ++validated;

            validate_placement(best_fit(matrix, topo, state), matrix, topo, state);
            validate_placement(gpu_packing(matrix, topo, state), matrix, topo, state);
            validate_placement(topo_aware(matrix, topo, state), matrix, topo, state);
            validate_placement(random_fit(matrix, topo, state, trial), matrix, topo, state);
            validated += 4;
            if (trial % 10 == 0) {
                auto enumd = enumerate_optimal(matrix, topo, state, alpha, 1 - alpha);
                validate_placement(enumd.placement, matrix, topo, state);
                ++validated;
            }
        }
        return std::to_string(validated) + " solutions validated, zero violations";
    });

    // 9. Seeded operations are byte-identical across consecutive runs.
    criterion(9, "determinism: byte-identical seeded outputs", [] {
        auto digest = [] {
            std::string out;
            auto trace = generate_trace(queue_scenario(33));
            out += trace_to_jsonl(trace);

            TopologySpec spec;
            spec.name = "det";
            for (int i = 0; i < 3; ++i) spec.minipods.push_back({{{6}}});
            const auto topo = ClusterTopology::build(spec);
            auto oracle = oracle_predictor(1, 33);
            ReplayConfig config;
            config.predictor = oracle.get();
            auto result = replay(trace, topo, config);
            out += events_to_jsonl(result.log);
            out += series_to_csv(result.series);

            const AllocationState state(topo.total_nodes());
            auto matrix = build_comm_matrix(lpj_spec_96());
            out += placement_to_json(random_fit(matrix, topo, state, 33));

            auto inst = build_mip(matrix, topo, state, 0.3, 0.7, SchedulingUnit::Row);
            SolverConfig solver_config;
            solver_config.seed = 33;
            auto solution = solve(inst, solver_config);
            out += solution_to_json(solution, /*include_stats=*/false);
            out += placement_to_json(
                assign_ranks(discretize(solution, inst), inst, matrix, topo, state));
            out += placement_to_json(
                enumerate_optimal(matrix, topo, state, 0.3, 0.7).placement);
            return out;
        };
        const std::string first = digest();
        const std::string second = digest();
        require(first == second, "outputs differ between consecutive runs");
        return std::to_string(first.size()) + " bytes identical across two runs";
    });

    std::printf("%s: %d/9 criteria passed\n", failures == 0 ? "SUCCESS" : "FAILURE",
                9 - failures);
    return failures == 0 ? 0 : 1;
}
