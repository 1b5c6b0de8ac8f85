#include <doctest.h>

#include <random>

#include "arnold/topology.hpp"

using namespace arnold;

namespace {

TopologySpec uniform_spec(int minipods, int nodes_per_pod, int racks_per_pod = 1) {
    TopologySpec spec;
    spec.name = "test";
    for (int m = 0; m < minipods; ++m) {
        MinipodSpec pod;
        const int per_rack = nodes_per_pod / racks_per_pod;
        for (int r = 0; r < racks_per_pod; ++r) pod.racks.push_back({per_rack});
        spec.minipods.push_back(pod);
    }
    return spec;
}

}  // namespace

TEST_CASE("build assigns dense node ids in (minipod, rack, position) order") {
    auto topo = ClusterTopology::build(uniform_spec(3, 6, 2));
    CHECK(topo.minipod_count() == 3);
    CHECK(topo.total_nodes() == 18);
    CHECK(topo.gpus_per_node() == 8);
    CHECK(topo.minipod(0).capacity == 6);
    CHECK(topo.nodes_in(0) == std::vector<NodeId>{0, 1, 2, 3, 4, 5});
    CHECK(topo.nodes_in(2) == std::vector<NodeId>{12, 13, 14, 15, 16, 17});
    CHECK(topo.minipod_of(7) == 1);
}

TEST_CASE("minimal and large clusters build") {
    auto tiny = ClusterTopology::build(uniform_spec(1, 1));
    CHECK(tiny.minipod_count() == 1);
    CHECK(tiny.total_nodes() == 1);

    // 11 minipods, 1019 nodes in total, distribution from config.
    TopologySpec spec;
    spec.name = "large";
    for (int m = 0; m < 11; ++m) {
        MinipodSpec pod;
        pod.racks.push_back({m < 7 ? 93 : 92});
        spec.minipods.push_back(pod);
    }
    auto topo = ClusterTopology::build(spec);
    CHECK(topo.minipod_count() == 11);
    CHECK(topo.total_nodes() == 1019);
}

TEST_CASE("build rejects malformed specs") {
    CHECK_THROWS_AS(ClusterTopology::build(TopologySpec{}), ValidationError);
    TopologySpec zero = uniform_spec(2, 4);
    zero.minipods[1].racks[0].nodes = 0;
    CHECK_THROWS_AS(ClusterTopology::build(zero), ValidationError);
}

TEST_CASE("build is deterministic") {
    auto a = ClusterTopology::build(uniform_spec(4, 8, 2));
    auto b = ClusterTopology::build(uniform_spec(4, 8, 2));
    REQUIRE(a.total_nodes() == b.total_nodes());
    for (NodeId n = 0; n < a.total_nodes(); ++n) CHECK(a.minipod_of(n) == b.minipod_of(n));
}

TEST_CASE("available_capacity counts free and optionally reserved nodes") {
    auto topo = ClusterTopology::build(uniform_spec(1, 6));
    AllocationState state(topo.total_nodes());
    CHECK(available_capacity(topo, state, 0) == 6);

    state.apply({{0, NodeStatus::occupied("j1")}, {1, NodeStatus::occupied("j1")}});
    CHECK(available_capacity(topo, state, 0) == 4);

    state.apply({{2, NodeStatus::reserved("lpj-1")},
                 {3, NodeStatus::reserved("lpj-1")},
                 {4, NodeStatus::reserved("lpj-1")}});
    CHECK(available_capacity(topo, state, 0) == 1);
    CHECK(available_capacity(topo, state, 0, "lpj-1") == 4);
    CHECK(available_capacity(topo, state, 0, "other") == 1);

    CHECK_THROWS_AS(available_capacity(topo, state, 9), ValidationError);
}

TEST_CASE("apply enforces transition legality and atomicity") {
    AllocationState state(4);
    state.apply({{0, NodeStatus::occupied("j1")}});
    CHECK(state.at(0) == NodeStatus::occupied("j1"));

    // Ownership conflict rolls the whole batch back.
    CHECK_THROWS_AS(state.apply({{1, NodeStatus::occupied("j2")},
                                 {0, NodeStatus::occupied("j2")}}),
                    ValidationError);
    CHECK(state.at(1) == NodeStatus::free());
    CHECK(state.at(0) == NodeStatus::occupied("j1"));

    // Reserved promotes only for the owner.
    state.apply({{2, NodeStatus::reserved("lpj")}});
    CHECK_THROWS_AS(state.apply({{2, NodeStatus::occupied("intruder")}}), ValidationError);
    state.apply({{2, NodeStatus::occupied("lpj")}});
    CHECK(state.at(2) == NodeStatus::occupied("lpj"));
}

TEST_CASE("batch reservation applies to every node") {
    auto topo = ClusterTopology::build(uniform_spec(2, 6));
    AllocationState state(topo.total_nodes());
    std::vector<Transition> batch;
    for (NodeId n = 0; n < 12; ++n) batch.push_back({n, NodeStatus::reserved("lpj")});
    state.apply(batch);
    int reserved = 0;
    for (NodeId n = 0; n < state.size(); ++n)
        reserved += state.at(n).state == NodeState::Reserved;
    CHECK(reserved == 12);
}

TEST_CASE("node conservation holds under random legal transition sequences") {
    auto topo = ClusterTopology::build(uniform_spec(3, 5));
    AllocationState state(topo.total_nodes());
    std::mt19937 rng(7);
    for (int step = 0; step < 500; ++step) {
        const NodeId n = std::uniform_int_distribution<int>(0, topo.total_nodes() - 1)(rng);
        const auto& cur = state.at(n);
        NodeStatus next;
        switch (cur.state) {
            case NodeState::Free:
                next = rng() % 2 ? NodeStatus::reserved("job") : NodeStatus::occupied("job");
                break;
            case NodeState::Reserved:
                next = rng() % 2 ? NodeStatus::occupied(cur.job) : NodeStatus::free();
                break;
            case NodeState::Occupied:
                next = NodeStatus::free();
                break;
        }
        state.apply({{n, next}});

        int counted = 0;
        for (int pod = 0; pod < topo.minipod_count(); ++pod)
            counted += available_capacity(topo, state, pod);
        for (NodeId i = 0; i < state.size(); ++i)
            counted += state.at(i).state != NodeState::Free;
        CHECK(counted == topo.total_nodes());
    }
}
