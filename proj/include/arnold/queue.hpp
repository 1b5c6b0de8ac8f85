#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arnold/baselines.hpp"
#include "arnold/solver.hpp"
#include "arnold/topology.hpp"
#include "arnold/workload.hpp"

namespace arnold {

// JCT predictions are coarse 10-minute buckets.
inline constexpr long long kJctBucketSeconds = 600;

struct TraceJob {
    std::string id;
    long long submit_time = 0;  // seconds
    long long duration = 0;     // ground truth; the policy never reads it
    int nodes = 1;
    int priority = 0;  // higher schedules first
    bool preemptable = false;
    enum class Kind { Generic, Lpj } kind = Kind::Generic;
    std::optional<JobSpec> lpj_spec;  // set when kind == Lpj
    long long arrival_time = 0;       // LPJ launch time; submit announces it
    std::map<std::string, std::string> metadata;
};

// Nodes earmarked for an announced LPJ. Planned nodes still occupied by
// earlier jobs become Reserved as they free up.
struct ReservedZone {
    std::string lpj_id;
    std::vector<NodeId> nodes;
    long long arrival_time = 0;
    Placement planned;

    bool contains(NodeId node) const;
};

class JctPredictor {
  public:
    virtual ~JctPredictor() = default;
    virtual int predict_bucket(const TraceJob& job) const = 0;
};

// Ground-truth bucket with optional seeded jitter of up to +/- noise buckets.
std::unique_ptr<JctPredictor> oracle_predictor(int noise_buckets = 0, std::uint64_t seed = 0);

// Mean observed bucket per metadata feature value, global mean as fallback.
std::unique_ptr<JctPredictor> histogram_predictor(const std::vector<TraceJob>& training,
                                                  const std::string& feature = "size_class");

struct RunningJob {
    TraceJob job;
    std::vector<NodeId> nodes;
    long long start_time = 0;
};

struct QueueState {
    std::deque<TraceJob> pending;                 // sorted by (priority, arrival)
    std::map<std::string, RunningJob> running;
    std::optional<ReservedZone> zone;

    void push(TraceJob job);  // keeps the ordering invariant
};

struct ReserveOptions {
    double alpha = 0;
    double beta = 1;
    SchedulingUnit unit = SchedulingUnit::Row;
    SolverConfig solver;
};

// Solve the placement for an announced LPJ and reserve its nodes: free nodes
// flip to Reserved immediately; occupied ones stay put and are reserved on
// release. Prefers free nodes, then preemptible occupants.
ReservedZone reserve_for_lpj(const TraceJob& lpj, const ClusterTopology& topo,
                             AllocationState& state, const QueueState& queue,
                             const ReserveOptions& options);

struct ScheduledJob {
    std::string id;
    std::vector<NodeId> nodes;
    bool in_zone = false;
};

struct PolicyOutcome {
    std::vector<ScheduledJob> scheduled;
    std::vector<TraceJob> delayed;
};

// One queue pass: pop jobs in order and (a) schedule preemptable jobs
// anywhere including the zone, (b) fit others outside the zone, (c) let jobs
// predicted to finish before the LPJ arrival backfill the zone, (d) delay the
// rest. Scheduled jobs move into queue.running; delayed jobs become the next
// queue.
PolicyOutcome policy_step(QueueState& queue, const ClusterTopology& topo, AllocationState& state,
                          const JctPredictor& predictor, long long now);

struct ArrivalOutcome {
    std::vector<std::string> preempted;   // evicted and re-queued
    std::vector<std::string> violations;  // non-preemptible stragglers on zone nodes
};

// LPJ launch: evict preemptible occupants of zone nodes, occupy the rest for
// the LPJ. Non-preemptible stragglers are reported, never evicted.
ArrivalOutcome lpj_arrival(QueueState& queue, AllocationState& state);

// Occupied nodes over total nodes.
double allocation_rate(const AllocationState& state);

// Zone nodes occupied by non-LPJ, non-preemptible jobs over zone size.
double retention_rate(const ReservedZone& zone, const AllocationState& state,
                      const QueueState& queue);

// Release a finished job's nodes; inside an active zone they return to
// Reserved for the LPJ instead of Free.
void release_job(QueueState& queue, AllocationState& state, const std::string& job_id);

}  // namespace arnold
