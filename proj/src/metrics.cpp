#include "arnold/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace arnold {

int group_distance(std::span<const int> minipod_ids) {
    if (minipod_ids.empty())
        throw ValidationError("group_distance: empty group");
    std::set<int> distinct(minipod_ids.begin(), minipod_ids.end());
    const int q = static_cast<int>(distinct.size());
    return q == 1 ? 0 : q;
}

double weighted_spread(const Placement& placement, const CommMatrix& matrix, double alpha,
                       double beta) {
    if (alpha < 0 || beta < 0 || std::abs(alpha + beta - 1.0) > 1e-9)
        throw ValidationError("weighted_spread: weights must be nonnegative with alpha+beta=1");
    if (placement.rows != matrix.rows || placement.cols != matrix.cols ||
        placement.cell_minipod.size() != static_cast<size_t>(matrix.cell_count()))
        throw ValidationError("weighted_spread: placement does not cover the matrix");

    int max_dp = 0;  // columns
    std::vector<int> group(matrix.rows);
    for (int c = 0; c < matrix.cols; ++c) {
        for (int r = 0; r < matrix.rows; ++r) group[r] = placement.minipod_at(r, c);
        max_dp = std::max(max_dp, group_distance(group));
    }
    int max_pp = 0;  // rows
    group.resize(matrix.cols);
    for (int r = 0; r < matrix.rows; ++r) {
        for (int c = 0; c < matrix.cols; ++c) group[c] = placement.minipod_at(r, c);
        max_pp = std::max(max_pp, group_distance(group));
    }
    return alpha * max_dp + beta * max_pp;
}

void validate_placement(const Placement& placement, const CommMatrix& matrix,
                        const ClusterTopology& topo) {
    const size_t cells = static_cast<size_t>(matrix.cell_count());
    if (placement.rows != matrix.rows || placement.cols != matrix.cols)
        throw ValidationError("placement: dimension mismatch");
    if (placement.cell_minipod.size() != cells || placement.cell_node.size() != cells)
        throw ValidationError("placement: incomplete cell maps");

    std::set<NodeId> seen;
    for (size_t i = 0; i < cells; ++i) {
        const NodeId node = placement.cell_node[i];
        const int pod = placement.cell_minipod[i];
        if (!seen.insert(node).second)
            throw ValidationError("placement: node " + std::to_string(node) +
                                  " mapped to more than one cell");
        if (topo.minipod_of(node) != pod)
            throw ValidationError("placement: node " + std::to_string(node) +
                                  " is not in minipod " + std::to_string(pod));
    }

    if (placement.rank_of_node.size() != cells)
        throw ValidationError("placement: rank map does not cover the cells");
    std::vector<bool> rank_seen(cells, false);
    for (const auto& [node, rank] : placement.rank_of_node) {
        if (!seen.count(node))
            throw ValidationError("placement: rank assigned to unmapped node " +
                                  std::to_string(node));
        if (rank < 0 || static_cast<size_t>(rank) >= cells || rank_seen[rank])
            throw ValidationError("placement: ranks are not dense 0..cells-1");
        rank_seen[rank] = true;
    }
}

void validate_placement(const Placement& placement, const CommMatrix& matrix,
                        const ClusterTopology& topo, const AllocationState& state) {
    validate_placement(placement, matrix, topo);
    for (NodeId node : placement.cell_node)
        if (state.at(node).state != NodeState::Free)
            throw ValidationError("placement: node " + std::to_string(node) + " is not free");
}

}  // namespace arnold
