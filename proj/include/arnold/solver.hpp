#pragma once

#include <optional>
#include <vector>

#include "arnold/metrics.hpp"
#include "arnold/topology.hpp"
#include "arnold/workload.hpp"

namespace arnold {

// Which matrix dimension is the indivisible scheduling unit.
enum class SchedulingUnit { Row, Column };

// Bin-packing-like program over scheduling units:
//   min  alpha * sum_j y_j + beta * T
//   s.t. sum_j s_ij <= T                (max spread)
//        sum_i p_ij <= c_j * y_j        (capacity)
//        sum_j p_ij  = 1                (allocation)
//        p_ij <= s_ij                   (minipod selection)
//        y_j, s_ij in {0,1}, p_ij in [0,1], T in {1..k}
struct MipInstance {
    int group_count = 0;
    int minipod_count = 0;
    int group_size = 0;                // nodes per scheduling unit
    std::vector<int> capacity_nodes;   // available nodes per minipod
    std::vector<double> capacities;    // c_j = capacity_nodes[j] / group_size
    double alpha = 0;
    double beta = 1;
    SchedulingUnit unit = SchedulingUnit::Row;

    long long demand_nodes() const {
        return static_cast<long long>(group_count) * group_size;
    }
    void validate() const;
};

enum class SolveStatus { Optimal, FeasibleTimeLimit, Infeasible };

struct SolverStats {
    long long nodes_explored = 0;
    double wall_ms = 0;
};

struct MipSolution {
    std::vector<int> y;                   // per minipod
    std::vector<std::vector<int>> s;      // group x minipod
    std::vector<std::vector<double>> p;   // group x minipod
    int t = 0;
    double objective = 0;
    SolveStatus status = SolveStatus::Infeasible;
    SolverStats stats;
};

struct SolverConfig {
    double time_limit_s = 10.0;
    std::optional<long long> node_limit;
    bool symmetry_breaking = true;
    unsigned long long seed = 0;
};

// Instance from a matrix and the current cluster state. Capacities count
// Free nodes (plus nodes Reserved for `as_job` when given). Throws
// InfeasibleError when the cluster cannot host the job at all.
MipInstance build_mip(const CommMatrix& matrix, const ClusterTopology& topo,
                      const AllocationState& state, double alpha, double beta,
                      SchedulingUnit unit = SchedulingUnit::Row,
                      const std::optional<std::string>& as_job = std::nullopt);

// Exact branch-and-bound. Branches on T first; for each T the minimal used
// minipod count is found over capacity-sorted pods, with feasibility decided
// by an exhaustive integral transportation search. Deterministic for a fixed
// config; returns the best incumbent with FeasibleTimeLimit when a budget
// trips before the tree is exhausted.
MipSolution solve(const MipInstance& instance, const SolverConfig& config = {});

// Independent re-check of every constraint and the objective; throws
// ValidationError with the violated constraint.
void verify_solution(const MipInstance& instance, const MipSolution& solution,
                     double tolerance = 1e-9);

// Integer node counts n_ij from fractional p by per-group largest remainder,
// then capacity-repair moves between a group's selected minipods.
std::vector<std::vector<int>> discretize(const MipSolution& solution, const MipInstance& instance);

// Map cells onto free nodes: each group's cells occupy contiguous positions
// per minipod (pods in ascending id order); within a minipod, cells in
// (group, position) order take free nodes in (rack, node id) order. Global
// rank is the row-major cell index.
Placement assign_ranks(const std::vector<std::vector<int>>& counts, const MipInstance& instance,
                       const CommMatrix& matrix, const ClusterTopology& topo,
                       const AllocationState& state);

// Same mapping but with explicit per-minipod candidate node lists (used by
// reservations, which may plan onto occupied nodes).
Placement assign_ranks_from_candidates(const std::vector<std::vector<int>>& counts,
                                       const MipInstance& instance, const CommMatrix& matrix,
                                       const std::vector<std::vector<NodeId>>& candidates);

}  // namespace arnold
