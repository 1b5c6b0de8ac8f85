#pragma once

#include <cstdint>
#include <vector>

#include "arnold/metrics.hpp"
#include "arnold/solver.hpp"
#include "arnold/topology.hpp"
#include "arnold/workload.hpp"

namespace arnold {

struct JobGraphEdge {
    int u = 0;
    int v = 0;
    double weight = 0;
};

// Cells as vertices; PP edges join row-adjacent cells (weight v_p), DP edges
// join column members in a ring (weight v_d).
struct JobGraph {
    int vertex_count = 0;
    std::vector<JobGraphEdge> edges;
};

JobGraph build_job_graph(const CommMatrix& matrix);

// Cells in row-major order, each to the feasible minipod with the fewest
// remaining free nodes.
Placement best_fit(const CommMatrix& matrix, const ClusterTopology& topo,
                   const AllocationState& state);

// Cells uniformly at random among minipods with slack; seeded.
Placement random_fit(const CommMatrix& matrix, const ClusterTopology& topo,
                     const AllocationState& state, std::uint64_t seed);

// Whole-job first-fit-decreasing: the fewest largest minipods covering the
// node count, filled sequentially.
Placement gpu_packing(const CommMatrix& matrix, const ClusterTopology& topo,
                      const AllocationState& state);

// Dual recursive bipartitioning: the minipod set splits into capacity-balanced
// halves, the job graph splits by FM min-cut with matching proportions, and
// recursion stops when a part fits a single minipod.
Placement topo_aware(const CommMatrix& matrix, const ClusterTopology& topo,
                     const AllocationState& state);

struct FmResult {
    std::vector<int> side;  // 0 = part A, 1 = part B, per vertex
    double cut_weight = 0;
    int part_a_size = 0;
};

// Pass-based Fiduccia-Mattheyses from the even/odd initial partition:
// single-vertex moves ordered by gain, best-prefix rollback, stop when a
// pass yields no improvement. Part sizes stay within balance*n of n/2.
FmResult fm_bipartition(const JobGraph& graph, double balance);

struct EnumConfig {
    // Refuse when group_count^minipod_count exceeds this.
    long long search_cap = 10000;
    // Hard cap on explored assignments once running.
    long long node_budget = 50'000'000;
};

struct EnumResult {
    Placement placement;
    double objective = 0;                  // alpha * pods used + beta * max group spread
    std::vector<std::vector<int>> counts;  // group x minipod node counts
    long long explored = 0;
};

// Exhaustive search over group -> minipod-multiset assignments; guaranteed
// optimal for the bin-packing objective. Throws SearchCapError when the
// guard or budget trips.
EnumResult enumerate_optimal(const CommMatrix& matrix, const ClusterTopology& topo,
                             const AllocationState& state, double alpha, double beta,
                             const EnumConfig& config = {},
                             SchedulingUnit unit = SchedulingUnit::Row);

// Instance-level core of the enumeration (no node mapping).
EnumResult enumerate_instance(const MipInstance& instance, const EnumConfig& config = {});

}  // namespace arnold
