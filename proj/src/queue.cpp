#include "arnold/queue.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>

namespace arnold {

bool ReservedZone::contains(NodeId node) const {
    return std::find(nodes.begin(), nodes.end(), node) != nodes.end();
}

void QueueState::push(TraceJob job) {
    auto pos = std::find_if(pending.begin(), pending.end(), [&](const TraceJob& other) {
        if (other.priority != job.priority) return other.priority < job.priority;
        if (other.submit_time != job.submit_time) return other.submit_time > job.submit_time;
        return other.id > job.id;
    });
    pending.insert(pos, std::move(job));
}

namespace {

class OraclePredictor final : public JctPredictor {
  public:
    OraclePredictor(int noise, std::uint64_t seed) : noise_(noise), seed_(seed) {}

    int predict_bucket(const TraceJob& job) const override {
        long long bucket = (job.duration + kJctBucketSeconds - 1) / kJctBucketSeconds;
        if (noise_ > 0) {
            // Stable per-job jitter so repeated queries agree.
            std::mt19937_64 rng(seed_ ^ std::hash<std::string>{}(job.id));
            std::uniform_int_distribution<int> dist(-noise_, noise_);
            bucket += dist(rng);
        }
        return static_cast<int>(std::max(1LL, bucket));
    }

  private:
    int noise_;
    std::uint64_t seed_;
};

class HistogramPredictor final : public JctPredictor {
  public:
    HistogramPredictor(const std::vector<TraceJob>& training, std::string feature)
        : feature_(std::move(feature)) {
        long long total = 0;
        for (const auto& job : training) {
            const long long bucket =
                (job.duration + kJctBucketSeconds - 1) / kJctBucketSeconds;
            total += bucket;
            auto it = job.metadata.find(feature_);
            if (it != job.metadata.end()) {
                auto& [sum, count] = buckets_[it->second];
                sum += bucket;
                ++count;
            }
        }
        global_mean_ = training.empty() ? 1.0
                                        : static_cast<double>(total) /
                                              static_cast<double>(training.size());
    }

    int predict_bucket(const TraceJob& job) const override {
        auto it = job.metadata.find(feature_);
        if (it != job.metadata.end()) {
            auto hit = buckets_.find(it->second);
            if (hit != buckets_.end())
                return static_cast<int>(std::max<long long>(
                    1, std::llround(static_cast<double>(hit->second.first) /
                                    hit->second.second)));
        }
        return static_cast<int>(std::max<long long>(1, std::llround(global_mean_)));
    }

  private:
    std::string feature_;
    std::map<std::string, std::pair<long long, long long>> buckets_;
    double global_mean_ = 1.0;
};

}  // namespace

std::unique_ptr<JctPredictor> oracle_predictor(int noise_buckets, std::uint64_t seed) {
    return std::make_unique<OraclePredictor>(noise_buckets, seed);
}

std::unique_ptr<JctPredictor> histogram_predictor(const std::vector<TraceJob>& training,
                                                  const std::string& feature) {
    return std::make_unique<HistogramPredictor>(training, feature);
}

ReservedZone reserve_for_lpj(const TraceJob& lpj, const ClusterTopology& topo,
                             AllocationState& state, const QueueState& queue,
                             const ReserveOptions& options) {
    if (lpj.kind != TraceJob::Kind::Lpj || !lpj.lpj_spec)
        throw ValidationError("reserve: job " + lpj.id + " is not an LPJ");
    const CommMatrix matrix = build_comm_matrix(*lpj.lpj_spec);

    auto preemptable = [&](const std::string& job_id) {
        auto it = queue.running.find(job_id);
        return it != queue.running.end() && it->second.job.preemptable;
    };

    // The plan may claim occupied nodes (they become reserved on release), so
    // capacity counts everything that is not reserved for someone else.
    // Candidate order per minipod: free, preemptible occupants, the rest.
    MipInstance inst;
    inst.unit = options.unit;
    inst.group_count = options.unit == SchedulingUnit::Row ? matrix.rows : matrix.cols;
    inst.group_size = options.unit == SchedulingUnit::Row ? matrix.cols : matrix.rows;
    inst.minipod_count = topo.minipod_count();
    inst.alpha = options.alpha;
    inst.beta = options.beta;
    std::vector<std::vector<NodeId>> candidates(topo.minipod_count());
    long long total = 0;
    for (int j = 0; j < topo.minipod_count(); ++j) {
        std::vector<NodeId> free, evictable, pending;
        for (NodeId node : topo.nodes_in(j)) {
            const auto& st = state.at(node);
            if (st.state == NodeState::Free)
                free.push_back(node);
            else if (st.state == NodeState::Occupied)
                (preemptable(st.job) ? evictable : pending).push_back(node);
        }
        auto& pool = candidates[j];
        pool.insert(pool.end(), free.begin(), free.end());
        pool.insert(pool.end(), evictable.begin(), evictable.end());
        pool.insert(pool.end(), pending.begin(), pending.end());
        inst.capacity_nodes.push_back(static_cast<int>(pool.size()));
        inst.capacities.push_back(static_cast<double>(pool.size()) / inst.group_size);
        total += static_cast<long long>(pool.size());
    }
    if (total < inst.demand_nodes())
        throw InfeasibleError("reserve: LPJ " + lpj.id + " needs " +
                              std::to_string(inst.demand_nodes()) + " nodes, only " +
                              std::to_string(total) + " reservable");

    const MipSolution solution = solve(inst, options.solver);
    if (solution.status == SolveStatus::Infeasible)
        throw InfeasibleError("reserve: no feasible placement for LPJ " + lpj.id);
    const auto counts = discretize(solution, inst);
    Placement planned = assign_ranks_from_candidates(counts, inst, matrix, candidates);

    ReservedZone zone;
    zone.lpj_id = lpj.id;
    zone.arrival_time = lpj.arrival_time;
    zone.planned = planned;
    zone.nodes = planned.cell_node;
    std::sort(zone.nodes.begin(), zone.nodes.end());

    std::vector<Transition> reserve_now;
    for (NodeId node : zone.nodes)
        if (state.at(node).state == NodeState::Free)
            reserve_now.push_back({node, NodeStatus::reserved(lpj.id)});
    state.apply(reserve_now);
    return zone;
}

namespace {

// Best-fit over per-minipod eligible node pools: repeatedly drain the
// feasible minipod with the fewest eligible nodes.
std::optional<std::vector<NodeId>> pick_nodes(const std::vector<std::vector<NodeId>>& pools,
                                              int request) {
    long long total = 0;
    for (const auto& pool : pools) total += static_cast<long long>(pool.size());
    if (total < request) return std::nullopt;

    std::vector<int> remaining;
    remaining.reserve(pools.size());
    for (const auto& pool : pools) remaining.push_back(static_cast<int>(pool.size()));
    std::vector<NodeId> nodes;
    while (static_cast<int>(nodes.size()) < request) {
        int pick = -1;
        for (size_t j = 0; j < pools.size(); ++j)
            if (remaining[j] > 0 && (pick < 0 || remaining[j] < remaining[pick]))
                pick = static_cast<int>(j);
        const int take = std::min(remaining[pick], request - static_cast<int>(nodes.size()));
        const auto& pool = pools[pick];
        const int offset = static_cast<int>(pool.size()) - remaining[pick];
        for (int i = 0; i < take; ++i) nodes.push_back(pool[offset + i]);
        remaining[pick] -= take;
    }
    return nodes;
}

}  // namespace

PolicyOutcome policy_step(QueueState& queue, const ClusterTopology& topo, AllocationState& state,
                          const JctPredictor& predictor, long long now) {
    PolicyOutcome out;
    std::deque<TraceJob> batch;
    batch.swap(queue.pending);

    while (!batch.empty()) {
        TraceJob job = std::move(batch.front());
        batch.pop_front();
        if (job.kind != TraceJob::Kind::Generic)
            throw ValidationError("policy: LPJ " + job.id + " must go through reserve_for_lpj");

        std::vector<std::vector<NodeId>> free_pools(topo.minipod_count());
        std::vector<std::vector<NodeId>> zone_pools(topo.minipod_count());
        for (int j = 0; j < topo.minipod_count(); ++j)
            for (NodeId node : topo.nodes_in(j)) {
                const auto& st = state.at(node);
                if (st.state == NodeState::Free)
                    free_pools[j].push_back(node);
                else if (queue.zone && st.state == NodeState::Reserved &&
                         st.job == queue.zone->lpj_id)
                    zone_pools[j].push_back(node);
            }
        auto with_zone = free_pools;
        for (int j = 0; j < topo.minipod_count(); ++j)
            with_zone[j].insert(with_zone[j].end(), zone_pools[j].begin(), zone_pools[j].end());

        std::optional<std::vector<NodeId>> nodes;
        if (job.preemptable) {
            nodes = pick_nodes(with_zone, job.nodes);
        } else if (auto outside = pick_nodes(free_pools, job.nodes)) {
            nodes = outside;
        } else if (queue.zone) {
            const long long bound =
                now + static_cast<long long>(predictor.predict_bucket(job)) * kJctBucketSeconds;
            if (bound < queue.zone->arrival_time) nodes = pick_nodes(with_zone, job.nodes);
        }

        if (!nodes) {
            out.delayed.push_back(std::move(job));
            continue;
        }

        std::vector<Transition> grab;
        bool in_zone = false;
        for (NodeId node : *nodes) {
            if (state.at(node).state == NodeState::Reserved) {
                grab.push_back({node, NodeStatus::free()});  // backfill borrows the hold
                in_zone = true;
            }
            grab.push_back({node, NodeStatus::occupied(job.id)});
        }
        state.apply(grab);
        const std::string id = job.id;
        out.scheduled.push_back({id, *nodes, in_zone});
        queue.running[id] = RunningJob{std::move(job), *nodes, now};
    }

    for (const auto& job : out.delayed) queue.push(job);
    return out;
}

ArrivalOutcome lpj_arrival(QueueState& queue, AllocationState& state) {
    if (!queue.zone) throw ValidationError("lpj_arrival: no reserved zone");
    const ReservedZone zone = *queue.zone;
    ArrivalOutcome out;

    std::set<std::string> evict;
    for (NodeId node : zone.nodes) {
        const auto& st = state.at(node);
        if (st.state != NodeState::Occupied) continue;
        auto it = queue.running.find(st.job);
        const bool preemptable = it != queue.running.end() && it->second.job.preemptable;
        if (preemptable)
            evict.insert(st.job);
        else if (std::find(out.violations.begin(), out.violations.end(), st.job) ==
                 out.violations.end())
            out.violations.push_back(st.job);
    }

    std::vector<Transition> batch;
    for (const auto& job_id : evict) {
        auto it = queue.running.find(job_id);
        for (NodeId node : it->second.nodes) {
            batch.push_back({node, NodeStatus::free()});
            if (zone.contains(node)) batch.push_back({node, NodeStatus::occupied(zone.lpj_id)});
        }
        TraceJob requeued = it->second.job;
        queue.running.erase(it);
        queue.push(std::move(requeued));
        out.preempted.push_back(job_id);
    }
    for (NodeId node : zone.nodes) {
        const auto& st = state.at(node);
        if (st.state == NodeState::Reserved && st.job == zone.lpj_id)
            batch.push_back({node, NodeStatus::occupied(zone.lpj_id)});
    }
    state.apply(batch);
    queue.zone.reset();
    return out;
}

double allocation_rate(const AllocationState& state) {
    if (state.size() == 0) return 0;
    int occupied = 0;
    for (NodeId n = 0; n < state.size(); ++n)
        occupied += state.at(n).state == NodeState::Occupied;
    return static_cast<double>(occupied) / state.size();
}

double retention_rate(const ReservedZone& zone, const AllocationState& state,
                      const QueueState& queue) {
    if (zone.nodes.empty()) return 0;
    int held = 0;
    for (NodeId node : zone.nodes) {
        const auto& st = state.at(node);
        if (st.state != NodeState::Occupied || st.job == zone.lpj_id) continue;
        auto it = queue.running.find(st.job);
        const bool preemptable = it != queue.running.end() && it->second.job.preemptable;
        held += !preemptable;
    }
    return static_cast<double>(held) / static_cast<double>(zone.nodes.size());
}

void release_job(QueueState& queue, AllocationState& state, const std::string& job_id) {
    auto it = queue.running.find(job_id);
    if (it == queue.running.end())
        throw ValidationError("release: job " + job_id + " is not running");
    std::vector<Transition> batch;
    for (NodeId node : it->second.nodes) {
        batch.push_back({node, NodeStatus::free()});
        if (queue.zone && queue.zone->contains(node))
            batch.push_back({node, NodeStatus::reserved(queue.zone->lpj_id)});
    }
    state.apply(batch);
    queue.running.erase(it);
}

}  // namespace arnold
