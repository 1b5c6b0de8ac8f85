#include "arnold/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "arnold/metrics.hpp"

namespace arnold {

std::string kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::Complete: return "complete";
        case EventKind::LpjArrive: return "lpj_arrive";
        case EventKind::Submit: return "submit";
        case EventKind::Schedule: return "schedule";
        case EventKind::Delay: return "delay";
        case EventKind::Preempt: return "preempt";
    }
    return "?";
}

ReplayResult replay(const std::vector<TraceJob>& trace, const ClusterTopology& topo,
                    const ReplayConfig& config) {
    if (!config.predictor) throw ValidationError("replay: a JCT predictor is required");
    if (config.tick_interval <= 0) throw ValidationError("replay: tick_interval must be positive");
    int lpj_count = 0;
    for (size_t i = 0; i < trace.size(); ++i) {
        if (i > 0 && trace[i - 1].submit_time > trace[i].submit_time)
            throw ValidationError("replay: trace must be sorted by submit_time (row " +
                                  std::to_string(i) + ")");
        if (trace[i].nodes > topo.total_nodes() || trace[i].duration <= 0)
            throw ValidationError("replay: job " + trace[i].id + " (row " + std::to_string(i) +
                                  ") can never fit the cluster or has no duration");
        if (trace[i].kind == TraceJob::Kind::Lpj) {
            if (trace[i].arrival_time <= trace[i].submit_time)
                throw ValidationError("replay: LPJ " + trace[i].id +
                                      " must arrive after its announcement");
            if (++lpj_count > 1)  // one reservation at a time
                throw ValidationError("replay: multiple LPJs per trace are unsupported");
        }
    }

    ReplayResult result;
    AllocationState state(topo.total_nodes());
    QueueState queue;
    std::set<std::pair<long long, std::string>> completions;  // (time, job id)
    std::set<std::pair<long long, std::string>> arrivals;     // LPJ launch times
    std::optional<TraceJob> pending_lpj;                      // announced, not yet reserved
    std::map<std::string, long long> durations;
    std::set<std::string> delayed_once;

    auto emit = [&](long long time, EventKind kind, const std::string& job,
                    const std::string& detail) {
        result.log.push_back({time, kind, job, detail});
    };

    auto try_reserve = [&](const TraceJob& lpj, long long now) {
        try {
            queue.zone = reserve_for_lpj(lpj, topo, state, queue, config.reserve);
            arrivals.insert({lpj.arrival_time, lpj.id});
            return true;
        } catch (const Error& e) {
            if (!delayed_once.count(lpj.id)) {
                delayed_once.insert(lpj.id);
                emit(now, EventKind::Delay, lpj.id, e.what());
            }
            return false;
        }
    };

    size_t next_submit = 0;
    long long now = 0;
    while (true) {
        // Next instant anything can happen.
        std::optional<long long> next;
        auto consider = [&](long long t) {
            if (!next || t < *next) next = t;
        };
        if (next_submit < trace.size()) consider(trace[next_submit].submit_time);
        if (!completions.empty()) consider(completions.begin()->first);
        if (!arrivals.empty()) consider(arrivals.begin()->first);
        const bool work_left =
            !queue.pending.empty() || pending_lpj.has_value() || queue.zone.has_value();
        if (work_left) {
            const long long next_tick = ((now / config.tick_interval) + 1) * config.tick_interval;
            consider(next_tick);
        }
        if (!next) break;
        now = *next;

        // 1. Completions release nodes (zone nodes fall back to Reserved).
        while (!completions.empty() && completions.begin()->first == now) {
            const std::string job_id = completions.begin()->second;
            completions.erase(completions.begin());
            release_job(queue, state, job_id);
            emit(now, EventKind::Complete, job_id, "");
        }

        // 2. LPJ launch.
        while (!arrivals.empty() && arrivals.begin()->first == now) {
            const std::string lpj_id = arrivals.begin()->second;
            arrivals.erase(arrivals.begin());
            result.retention_at_arrival = retention_rate(*queue.zone, state, queue);
            const size_t zone_size = queue.zone->nodes.size();
            auto outcome = lpj_arrival(queue, state);
            result.violations = outcome.violations;
            for (const auto& evicted : outcome.preempted) {
                for (auto it = completions.begin(); it != completions.end();)
                    it = it->second == evicted ? completions.erase(it) : std::next(it);
                emit(now, EventKind::Preempt, evicted, "zone reclaimed");
            }
            emit(now, EventKind::LpjArrive, lpj_id,
                 std::to_string(outcome.violations.size()) + " retention violations");

            std::vector<NodeId> lpj_nodes;
            for (NodeId n = 0; n < state.size(); ++n)
                if (state.at(n).state == NodeState::Occupied && state.at(n).job == lpj_id)
                    lpj_nodes.push_back(n);
            TraceJob lpj_job;
            lpj_job.id = lpj_id;
            queue.running[lpj_id] = RunningJob{lpj_job, lpj_nodes, now};
            completions.insert({now + durations.at(lpj_id), lpj_id});
            emit(now, EventKind::Schedule, lpj_id,
                 std::to_string(lpj_nodes.size()) + "/" + std::to_string(zone_size) + " nodes");
        }

        // 3. Submissions.
        while (next_submit < trace.size() && trace[next_submit].submit_time == now) {
            const TraceJob& job = trace[next_submit];
            ++next_submit;
            durations[job.id] = job.duration;
            if (job.kind == TraceJob::Kind::Lpj) {
                emit(now, EventKind::Submit, job.id, "");
                if (!try_reserve(job, now)) pending_lpj = job;
            } else {
                emit(now, EventKind::Submit, job.id, "");
                queue.push(job);
            }
        }

        // 4. Policy pass on the tick cadence.
        if (now % config.tick_interval == 0) {
            if (pending_lpj && try_reserve(*pending_lpj, now)) pending_lpj.reset();
            auto outcome = policy_step(queue, topo, state, *config.predictor, now);
            for (const auto& sched : outcome.scheduled) {
                completions.insert({now + durations.at(sched.id), sched.id});
                emit(now, EventKind::Schedule, sched.id,
                     std::to_string(sched.nodes.size()) +
                         (sched.in_zone ? " nodes (zone)" : " nodes"));
            }
            for (const auto& job : outcome.delayed)
                if (!delayed_once.count(job.id)) {
                    delayed_once.insert(job.id);
                    emit(now, EventKind::Delay, job.id, "no capacity");
                }
            SeriesPoint point;
            point.time = now;
            point.allocation = allocation_rate(state);
            point.retention =
                queue.zone ? retention_rate(*queue.zone, state, queue) : 0.0;
            point.queue_length = static_cast<int>(queue.pending.size());
            point.delayed = static_cast<int>(outcome.delayed.size());
            result.series.push_back(point);
        }
    }
    return result;
}

std::vector<TraceJob> generate_trace(const TraceGenConfig& config) {
    if (config.arrival_rate_per_hour < 0 || config.duration_mean_s <= 0 ||
        config.duration_sigma < 0 || config.geometric_p <= 0 || config.geometric_p > 1)
        throw ValidationError("generate_trace: rates and distributions must be positive");

    std::mt19937_64 rng(config.seed);
    std::vector<TraceJob> trace;
    if (config.arrival_rate_per_hour > 0 && config.job_count > 0) {
        std::exponential_distribution<double> gap(config.arrival_rate_per_hour / 3600.0);
        const double mu =
            std::log(config.duration_mean_s) - config.duration_sigma * config.duration_sigma / 2;
        std::lognormal_distribution<double> duration(mu, config.duration_sigma);
        std::geometric_distribution<int> extra_nodes(config.geometric_p);
        std::uniform_real_distribution<double> coin(0.0, 1.0);

        double at = 0;
        for (int i = 0; i < config.job_count; ++i) {
            at += gap(rng);
            TraceJob job;
            job.id = "job-" + std::to_string(i);
            job.submit_time = static_cast<long long>(std::llround(at));
            job.duration = std::max(1LL, static_cast<long long>(std::llround(duration(rng))));
            if (config.duration_cap_s)
                job.duration = std::min(job.duration, *config.duration_cap_s);
            job.nodes = std::min(config.max_nodes, 1 + extra_nodes(rng));
            job.preemptable = coin(rng) < config.preemptable_fraction;
            job.metadata["size_class"] =
                job.nodes <= 2 ? "small" : (job.nodes <= 8 ? "medium" : "large");
            job.metadata["owner"] = "team-" + std::to_string(rng() % 4);
            trace.push_back(std::move(job));
        }
    }
    if (config.lpj) {
        const auto& plan = *config.lpj;
        TraceJob lpj;
        lpj.id = plan.id;
        lpj.kind = TraceJob::Kind::Lpj;
        lpj.submit_time = plan.announce_time;
        lpj.arrival_time = plan.arrival_time;
        lpj.duration = plan.duration;
        lpj.priority = plan.priority;
        lpj.lpj_spec = plan.spec;
        lpj.nodes = static_cast<int>(plan.spec.gpus / 8);
        trace.push_back(std::move(lpj));
    }
    std::stable_sort(trace.begin(), trace.end(), [](const TraceJob& a, const TraceJob& b) {
        return a.submit_time != b.submit_time ? a.submit_time < b.submit_time : a.id < b.id;
    });
    return trace;
}

namespace {

BenchmarkCell run_cell(const BenchmarkSetting& setting, const std::string& algorithm,
                       double alpha, const BenchmarkConfig& config) {
    BenchmarkCell cell;
    cell.setting = setting.name;
    cell.algorithm = algorithm;
    cell.alpha = alpha;
    const double beta = 1 - alpha;

    try {
        const auto topo = ClusterTopology::build(setting.topology);
        const AllocationState state(topo.total_nodes());
        const auto matrix = build_comm_matrix(setting.job);

        const auto start = std::chrono::steady_clock::now();
        Placement placement;
        if (algorithm == "arnold") {
            auto inst = build_mip(matrix, topo, state, alpha, beta, SchedulingUnit::Row);
            auto solution = solve(inst, config.solver);
            if (solution.status == SolveStatus::Infeasible)
                throw InfeasibleError("benchmark: solver found no placement");
            placement = assign_ranks(discretize(solution, inst), inst, matrix, topo, state);
        } else if (algorithm == "bestfit") {
            placement = best_fit(matrix, topo, state);
        } else if (algorithm == "random") {
            placement = random_fit(matrix, topo, state, config.seed);
        } else if (algorithm == "gpupack") {
            placement = gpu_packing(matrix, topo, state);
        } else if (algorithm == "topoaware") {
            placement = topo_aware(matrix, topo, state);
        } else if (algorithm == "enum") {
            placement =
                enumerate_optimal(matrix, topo, state, alpha, beta, config.enumeration).placement;
        } else {
            throw ValidationError("benchmark: unknown algorithm '" + algorithm + "'");
        }
        cell.latency_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        validate_placement(placement, matrix, topo, state);
        cell.score = weighted_spread(placement, matrix, alpha, beta);
        cell.status = "ok";
    } catch (const SearchCapError&) {
        cell.status = "cap_exceeded";
    } catch (const InfeasibleError&) {
        cell.status = "infeasible";
    } catch (const std::exception& e) {
        cell.status = std::string("error:") + e.what();
    }
    return cell;
}

}  // namespace

std::vector<BenchmarkCell> run_benchmark(const std::vector<BenchmarkSetting>& settings,
                                         const std::vector<std::string>& algorithms,
                                         const BenchmarkConfig& config) {
    struct Task {
        size_t setting;
        size_t algorithm;
        double alpha;
    };
    std::vector<Task> tasks;
    for (size_t s = 0; s < settings.size(); ++s)
        for (double alpha : config.alphas)
            for (size_t a = 0; a < algorithms.size(); ++a) tasks.push_back({s, a, alpha});

    std::vector<BenchmarkCell> cells(tasks.size());
    const int workers = std::max(1, config.jobs);
    if (workers == 1) {
        for (size_t i = 0; i < tasks.size(); ++i)
            cells[i] = run_cell(settings[tasks[i].setting], algorithms[tasks[i].algorithm],
                                tasks[i].alpha, config);
    } else {
        std::atomic<size_t> cursor{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                while (true) {
                    const size_t i = cursor.fetch_add(1);
                    if (i >= tasks.size()) return;
                    cells[i] = run_cell(settings[tasks[i].setting],
                                        algorithms[tasks[i].algorithm], tasks[i].alpha, config);
                }
            });
        for (auto& t : pool) t.join();
    }
    return cells;
}

}  // namespace arnold
