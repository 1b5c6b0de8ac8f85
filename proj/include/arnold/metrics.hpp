#pragma once

#include <map>
#include <span>
#include <vector>

#include "arnold/topology.hpp"
#include "arnold/workload.hpp"

namespace arnold {

// Concrete assignment of matrix cells to cluster nodes. Cell (r, c) maps to
// one minipod and one node inside it; ranks are dense 0..cells-1.
struct Placement {
    int rows = 0;
    int cols = 0;
    std::vector<int> cell_minipod;   // row-major, size rows*cols
    std::vector<NodeId> cell_node;   // row-major, size rows*cols
    std::map<NodeId, int> rank_of_node;

    int minipod_at(int row, int col) const { return cell_minipod[row * cols + col]; }
    NodeId node_at(int row, int col) const { return cell_node[row * cols + col]; }
};

// Spread of one communication group: 0 when confined to a single minipod,
// otherwise the number of distinct minipods it touches. Equals the count of
// positions where any two of the group's one-hot assignment vectors differ.
int group_distance(std::span<const int> minipod_ids);

// alpha * max over DP groups (columns) of D + beta * max over PP groups
// (rows) of D.
double weighted_spread(const Placement& placement, const CommMatrix& matrix, double alpha,
                       double beta);

// Throws ValidationError unless the placement is a cell<->node bijection with
// every node inside its claimed minipod and ranks dense 0..cells-1.
void validate_placement(const Placement& placement, const CommMatrix& matrix,
                        const ClusterTopology& topo);

// Additionally requires every mapped node to be Free in the given state.
void validate_placement(const Placement& placement, const CommMatrix& matrix,
                        const ClusterTopology& topo, const AllocationState& state);

}  // namespace arnold
