#include "arnold/topology.hpp"

#include <utility>

namespace arnold {

ClusterTopology ClusterTopology::build(const TopologySpec& spec) {
    if (spec.minipods.empty())
        throw ValidationError("topology: at least one minipod required");
    if (spec.gpus_per_node <= 0)
        throw ValidationError("topology: gpus_per_node must be positive");

    ClusterTopology topo;
    topo.name_ = spec.name;
    topo.gpus_per_node_ = spec.gpus_per_node;

    NodeId next = 0;
    for (size_t m = 0; m < spec.minipods.size(); ++m) {
        const auto& pod_spec = spec.minipods[m];
        Minipod pod;
        pod.id = static_cast<int>(m);
        if (pod_spec.racks.empty())
            throw ValidationError("topology: minipod " + std::to_string(m) + " has no racks");
        for (const auto& rack_spec : pod_spec.racks) {
            if (rack_spec.nodes <= 0)
                throw ValidationError("topology: minipod " + std::to_string(m) +
                                      " has a rack with non-positive node count");
            Rack rack;
            for (int i = 0; i < rack_spec.nodes; ++i) {
                rack.nodes.push_back(next++);
                topo.node_to_minipod_.push_back(pod.id);
            }
            pod.capacity += rack_spec.nodes;
            pod.racks.push_back(std::move(rack));
        }
        topo.minipods_.push_back(std::move(pod));
    }
    topo.total_nodes_ = next;
    return topo;
}

const Minipod& ClusterTopology::minipod(int id) const {
    if (id < 0 || id >= minipod_count())
        throw ValidationError("topology: minipod index " + std::to_string(id) + " out of range");
    return minipods_[id];
}

int ClusterTopology::minipod_of(NodeId node) const {
    if (node < 0 || node >= total_nodes_)
        throw ValidationError("topology: node id " + std::to_string(node) + " out of range");
    return node_to_minipod_[node];
}

std::vector<NodeId> ClusterTopology::nodes_in(int minipod_id) const {
    const auto& pod = minipod(minipod_id);
    std::vector<NodeId> nodes;
    nodes.reserve(pod.capacity);
    for (const auto& rack : pod.racks)
        nodes.insert(nodes.end(), rack.nodes.begin(), rack.nodes.end());
    return nodes;
}

const NodeStatus& AllocationState::at(NodeId node) const {
    if (node < 0 || node >= size())
        throw ValidationError("state: node id " + std::to_string(node) + " out of range");
    return status_[node];
}

namespace {

bool transition_legal(const NodeStatus& cur, const NodeStatus& to) {
    switch (cur.state) {
        case NodeState::Free:
            return to.state == NodeState::Reserved || to.state == NodeState::Occupied;
        case NodeState::Reserved:
            // Promotion to Occupied only by the reserving job; release always allowed.
            if (to.state == NodeState::Occupied) return to.job == cur.job;
            return to.state == NodeState::Free;
        case NodeState::Occupied:
            return to.state == NodeState::Free;
    }
    return false;
}

}  // namespace

void AllocationState::apply(const std::vector<Transition>& transitions) {
    auto scratch = status_;
    for (const auto& t : transitions) {
        if (t.node < 0 || t.node >= size())
            throw ValidationError("apply: node id " + std::to_string(t.node) + " out of range");
        const auto& cur = scratch[t.node];
        if ((t.to.state != NodeState::Free && t.to.job.empty()))
            throw ValidationError("apply: node " + std::to_string(t.node) +
                                  ": Reserved/Occupied status requires a job id");
        if (!transition_legal(cur, t.to))
            throw ValidationError("apply: illegal transition for node " + std::to_string(t.node));
        scratch[t.node] = t.to;
    }
    status_ = std::move(scratch);
}

int available_capacity(const ClusterTopology& topo, const AllocationState& state, int minipod,
                       const std::optional<std::string>& include_reserved_for) {
    int count = 0;
    for (NodeId node : topo.nodes_in(minipod)) {
        const auto& st = state.at(node);
        if (st.state == NodeState::Free)
            ++count;
        else if (st.state == NodeState::Reserved && include_reserved_for &&
                 st.job == *include_reserved_for)
            ++count;
    }
    return count;
}

}  // namespace arnold
