#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arnold/errors.hpp"

namespace arnold {

using NodeId = int;

// Input description of a cluster: minipods of racks, each rack a node count.
struct RackSpec {
    int nodes = 0;
};

struct MinipodSpec {
    std::vector<RackSpec> racks;
};

struct TopologySpec {
    std::string name;
    int gpus_per_node = 8;
    std::vector<MinipodSpec> minipods;
};

struct Rack {
    std::vector<NodeId> nodes;
};

// A minipod is the set of racks under one spine switch; traffic between
// minipods crosses a core switch.
struct Minipod {
    int id = 0;
    std::vector<Rack> racks;
    int capacity = 0;  // total node count, equals the sum of rack sizes
};

// Three-tier cluster: core / spine-per-minipod / leaf-per-rack.
// Immutable after build; node ids are dense and assigned in
// (minipod, rack, position) order.
class ClusterTopology {
  public:
    static ClusterTopology build(const TopologySpec& spec);

    const std::string& name() const { return name_; }
    int gpus_per_node() const { return gpus_per_node_; }
    int minipod_count() const { return static_cast<int>(minipods_.size()); }
    const Minipod& minipod(int id) const;
    const std::vector<Minipod>& minipods() const { return minipods_; }
    int total_nodes() const { return total_nodes_; }

    // Minipod owning a node id.
    int minipod_of(NodeId node) const;

    // Nodes of one minipod in (rack, position) order, i.e. ascending id.
    std::vector<NodeId> nodes_in(int minipod) const;

  private:
    std::string name_;
    int gpus_per_node_ = 8;
    std::vector<Minipod> minipods_;
    std::vector<int> node_to_minipod_;
    int total_nodes_ = 0;
};

enum class NodeState { Free, Reserved, Occupied };

struct NodeStatus {
    NodeState state = NodeState::Free;
    std::string job;  // owner for Reserved/Occupied, empty for Free

    static NodeStatus free() { return {}; }
    static NodeStatus reserved(std::string job_id) {
        return {NodeState::Reserved, std::move(job_id)};
    }
    static NodeStatus occupied(std::string job_id) {
        return {NodeState::Occupied, std::move(job_id)};
    }

    bool operator==(const NodeStatus&) const = default;
};

struct Transition {
    NodeId node = 0;
    NodeStatus to;
};

// Per-node allocation bookkeeping. Single-writer: callers serialize
// mutations; apply() commits a batch atomically (all transitions legal
// against the evolving state, or none are applied).
class AllocationState {
  public:
    AllocationState() = default;
    explicit AllocationState(int total_nodes) : status_(total_nodes) {}

    int size() const { return static_cast<int>(status_.size()); }
    const NodeStatus& at(NodeId node) const;

    void apply(const std::vector<Transition>& transitions);

  private:
    std::vector<NodeStatus> status_;
};

// Count of Free nodes in a minipod, plus nodes Reserved for the named job.
int available_capacity(const ClusterTopology& topo, const AllocationState& state,
                       int minipod,
                       const std::optional<std::string>& include_reserved_for = std::nullopt);

}  // namespace arnold
