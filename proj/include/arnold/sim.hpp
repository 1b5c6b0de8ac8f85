#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arnold/baselines.hpp"
#include "arnold/queue.hpp"
#include "arnold/solver.hpp"
#include "arnold/topology.hpp"
#include "arnold/workload.hpp"

namespace arnold {

// Kinds double as the tie order for equal timestamps.
enum class EventKind { Complete, LpjArrive, Submit, Schedule, Delay, Preempt };

struct Event {
    long long time = 0;
    EventKind kind = EventKind::Submit;
    std::string job;
    std::string detail;
};

std::string kind_name(EventKind kind);

struct SeriesPoint {
    long long time = 0;
    double allocation = 0;
    double retention = 0;
    int queue_length = 0;
    int delayed = 0;
};

struct ReplayConfig {
    ReserveOptions reserve;            // affinity and solver settings for the LPJ
    long long tick_interval = 30;      // seconds between policy passes
    const JctPredictor* predictor = nullptr;  // required
};

struct ReplayResult {
    std::vector<Event> log;
    std::vector<SeriesPoint> series;
    double retention_at_arrival = 0;
    std::vector<std::string> violations;  // non-preemptible stragglers at arrival
};

// Deterministic trace replay: the clock advances to the next submit,
// completion, or policy tick; ties resolve by (time, kind, job id).
ReplayResult replay(const std::vector<TraceJob>& trace, const ClusterTopology& topo,
                    const ReplayConfig& config);

struct LpjPlan {
    JobSpec spec;
    long long announce_time = 0;
    long long arrival_time = 0;
    long long duration = 3600;
    int priority = 100;
    std::string id = "lpj-0";
};

struct TraceGenConfig {
    int job_count = 100;
    double arrival_rate_per_hour = 60.0;
    double duration_mean_s = 1800.0;
    double duration_sigma = 1.0;  // log-space sigma of the log-normal
    std::optional<long long> duration_cap_s;
    double geometric_p = 0.5;  // node counts are 1 + Geometric(p)
    int max_nodes = 16;
    double preemptable_fraction = 0.3;
    std::optional<LpjPlan> lpj;
    std::uint64_t seed = 0;
};

// Seeded synthetic trace: Poisson arrivals, log-normal durations, geometric
// node counts, optional LPJ with an announce lead.
std::vector<TraceJob> generate_trace(const TraceGenConfig& config);

struct BenchmarkSetting {
    std::string name;
    TopologySpec topology;
    JobSpec job;
};

struct BenchmarkCell {
    std::string setting;
    std::string algorithm;
    double alpha = 0;
    double score = 0;
    double latency_ms = 0;
    std::string status;  // ok | cap_exceeded | infeasible | error:<what>
};

inline const std::vector<std::string> kAllAlgorithms = {"arnold",  "bestfit",   "random",
                                                        "gpupack", "topoaware", "enum"};
inline const std::vector<double> kDefaultAlphaSweep = {0.0, 0.1, 0.3, 0.5};

struct BenchmarkConfig {
    std::vector<double> alphas = kDefaultAlphaSweep;
    SolverConfig solver;
    EnumConfig enumeration;
    std::uint64_t seed = 0;
    int jobs = 1;  // parallel benchmark cells
};

// Weighted spread and scheduling latency for every (setting, algorithm,
// alpha) cell; failures are recorded per cell and the run continues.
std::vector<BenchmarkCell> run_benchmark(const std::vector<BenchmarkSetting>& settings,
                                         const std::vector<std::string>& algorithms,
                                         const BenchmarkConfig& config = {});

}  // namespace arnold
