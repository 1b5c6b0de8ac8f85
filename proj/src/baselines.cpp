#include "arnold/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace arnold {

JobGraph build_job_graph(const CommMatrix& matrix) {
    JobGraph graph;
    graph.vertex_count = matrix.cell_count();
    const double v_p = matrix.volume.pp_bytes;
    const double v_d = matrix.volume.dp_bytes;
    for (int r = 0; r < matrix.rows; ++r)
        for (int c = 0; c + 1 < matrix.cols; ++c)
            graph.edges.push_back({matrix.cell_index(r, c), matrix.cell_index(r, c + 1), v_p});
    for (int c = 0; c < matrix.cols; ++c) {
        for (int r = 0; r + 1 < matrix.rows; ++r)
            graph.edges.push_back({matrix.cell_index(r, c), matrix.cell_index(r + 1, c), v_d});
        if (matrix.rows > 2)  // close the ring; two members already share an edge
            graph.edges.push_back(
                {matrix.cell_index(matrix.rows - 1, c), matrix.cell_index(0, c), v_d});
    }
    return graph;
}

namespace {

std::vector<int> free_counts(const CommMatrix& matrix, const ClusterTopology& topo,
                             const AllocationState& state) {
    std::vector<int> free(topo.minipod_count());
    long long total = 0;
    for (int j = 0; j < topo.minipod_count(); ++j) {
        free[j] = available_capacity(topo, state, j);
        total += free[j];
    }
    if (total < matrix.cell_count())
        throw InfeasibleError("placement: job needs " + std::to_string(matrix.cell_count()) +
                              " nodes but only " + std::to_string(total) + " are free");
    return free;
}

Placement placement_from_cell_pods(const std::vector<int>& cell_pod, const CommMatrix& matrix,
                                   const ClusterTopology& topo, const AllocationState& state) {
    Placement placement;
    placement.rows = matrix.rows;
    placement.cols = matrix.cols;
    placement.cell_minipod = cell_pod;
    placement.cell_node.assign(matrix.cell_count(), -1);

    std::vector<std::vector<NodeId>> pools(topo.minipod_count());
    for (int j = 0; j < topo.minipod_count(); ++j)
        for (NodeId node : topo.nodes_in(j))
            if (state.at(node).state == NodeState::Free) pools[j].push_back(node);

    std::vector<size_t> cursor(topo.minipod_count(), 0);
    for (int cell = 0; cell < matrix.cell_count(); ++cell) {
        const int pod = cell_pod[cell];
        if (cursor[pod] >= pools[pod].size())
            throw InfeasibleError("placement: minipod " + std::to_string(pod) +
                                  " ran out of free nodes");
        const NodeId node = pools[pod][cursor[pod]++];
        placement.cell_node[cell] = node;
        placement.rank_of_node[node] = cell;
    }
    return placement;
}

}  // namespace

Placement best_fit(const CommMatrix& matrix, const ClusterTopology& topo,
                   const AllocationState& state) {
    auto free = free_counts(matrix, topo, state);
    std::vector<int> cell_pod(matrix.cell_count());
    for (int cell = 0; cell < matrix.cell_count(); ++cell) {
        int pick = -1;
        for (int j = 0; j < topo.minipod_count(); ++j)
            if (free[j] > 0 && (pick < 0 || free[j] < free[pick])) pick = j;
        if (pick < 0) throw InfeasibleError("best_fit: no minipod with a free node");
        --free[pick];
        cell_pod[cell] = pick;
    }
    return placement_from_cell_pods(cell_pod, matrix, topo, state);
}

Placement random_fit(const CommMatrix& matrix, const ClusterTopology& topo,
                     const AllocationState& state, std::uint64_t seed) {
    auto free = free_counts(matrix, topo, state);
    std::mt19937_64 rng(seed);
    std::vector<int> cell_pod(matrix.cell_count());
    std::vector<int> feasible;
    for (int cell = 0; cell < matrix.cell_count(); ++cell) {
        feasible.clear();
        for (int j = 0; j < topo.minipod_count(); ++j)
            if (free[j] > 0) feasible.push_back(j);
        if (feasible.empty()) throw InfeasibleError("random_fit: no minipod with a free node");
        std::uniform_int_distribution<size_t> dist(0, feasible.size() - 1);
        const int pick = feasible[dist(rng)];
        --free[pick];
        cell_pod[cell] = pick;
    }
    return placement_from_cell_pods(cell_pod, matrix, topo, state);
}

Placement gpu_packing(const CommMatrix& matrix, const ClusterTopology& topo,
                      const AllocationState& state) {
    auto free = free_counts(matrix, topo, state);
    std::vector<int> order(topo.minipod_count());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return free[a] > free[b]; });

    std::vector<int> cell_pod(matrix.cell_count());
    int cell = 0;
    for (int j : order) {
        for (int n = 0; n < free[j] && cell < matrix.cell_count(); ++n) cell_pod[cell++] = j;
        if (cell == matrix.cell_count()) break;
    }
    return placement_from_cell_pods(cell_pod, matrix, topo, state);
}

namespace {

// FM with explicit part-size window. side[] is mutated in place.
double fm_refine(const JobGraph& graph, std::vector<int>& side, int lo_a, int hi_a) {
    const int n = graph.vertex_count;
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (const auto& e : graph.edges) {
        adj[e.u].push_back({e.v, e.weight});
        adj[e.v].push_back({e.u, e.weight});
    }
    auto cut_weight = [&]() {
        double cut = 0;
        for (const auto& e : graph.edges)
            if (side[e.u] != side[e.v]) cut += e.weight;
        return cut;
    };

    // A pass may drift one vertex outside the window so that swaps are
    // reachable from a tight balance; only in-window prefixes are kept.
    const int window_lo = std::max(1, lo_a - 1);
    const int window_hi = std::min(n - 1, hi_a + 1);

    while (true) {
        std::vector<double> gain(n, 0.0);
        for (int v = 0; v < n; ++v)
            for (const auto& [u, w] : adj[v]) gain[v] += side[u] != side[v] ? w : -w;

        std::vector<int> locked(n, 0);
        std::vector<int> moves;
        std::vector<double> cumulative;
        std::vector<int> size_after;
        double running = 0;
        int size_a = static_cast<int>(std::count(side.begin(), side.end(), 0));

        for (int step = 0; step < n; ++step) {
            int pick = -1;
            for (int v = 0; v < n; ++v) {
                if (locked[v]) continue;
                const int next_a = side[v] == 0 ? size_a - 1 : size_a + 1;
                if (next_a < window_lo || next_a > window_hi) continue;
                if (pick < 0 || gain[v] > gain[pick]) pick = v;
            }
            if (pick < 0) break;
            running += gain[pick];
            size_a += side[pick] == 0 ? -1 : 1;
            side[pick] = 1 - side[pick];
            locked[pick] = 1;
            for (const auto& [u, w] : adj[pick])
                gain[u] += side[u] != side[pick] ? 2 * w : -2 * w;
            moves.push_back(pick);
            cumulative.push_back(running);
            size_after.push_back(size_a);
        }

        int best = -1;
        double best_gain = 1e-12;
        for (size_t i = 0; i < cumulative.size(); ++i)
            if (size_after[i] >= lo_a && size_after[i] <= hi_a && cumulative[i] > best_gain) {
                best = static_cast<int>(i);
                best_gain = cumulative[i];
            }
        // Roll back past the best prefix (or the whole pass).
        for (int i = static_cast<int>(moves.size()) - 1; i > best; --i)
            side[moves[i]] = 1 - side[moves[i]];
        if (best < 0) break;
    }
    return cut_weight();
}

}  // namespace

FmResult fm_bipartition(const JobGraph& graph, double balance) {
    if (graph.vertex_count < 2)
        throw ValidationError("fm: graph needs at least two vertices");
    if (balance <= 0 || balance > 0.5)
        throw ValidationError("fm: balance must lie in (0, 0.5]");
    const int n = graph.vertex_count;
    const int slack = std::max(0, static_cast<int>(std::floor(balance * n)));
    const int lo_a = std::max(1, n / 2 - slack);
    const int hi_a = std::min(n - 1, n / 2 + slack);

    FmResult result;
    result.side.resize(n);
    for (int v = 0; v < n; ++v) result.side[v] = v % 2;
    // Nudge the even/odd start inside the window before refining.
    int size_a = static_cast<int>(std::count(result.side.begin(), result.side.end(), 0));
    for (int v = n - 1; v >= 0 && size_a < lo_a; --v)
        if (result.side[v] == 1) {
            result.side[v] = 0;
            ++size_a;
        }
    for (int v = n - 1; v >= 0 && size_a > hi_a; --v)
        if (result.side[v] == 0) {
            result.side[v] = 1;
            --size_a;
        }

    result.cut_weight = fm_refine(graph, result.side, lo_a, hi_a);
    result.part_a_size = static_cast<int>(std::count(result.side.begin(), result.side.end(), 0));
    return result;
}

namespace {

struct TopoAwareSplitter {
    const JobGraph& graph;
    std::vector<std::vector<std::pair<int, double>>> adj;
    std::vector<int> cell_pod;

    explicit TopoAwareSplitter(const JobGraph& g) : graph(g), adj(g.vertex_count) {
        for (const auto& e : g.edges) {
            adj[e.u].push_back({e.v, e.weight});
            adj[e.v].push_back({e.u, e.weight});
        }
        cell_pod.assign(g.vertex_count, -1);
    }

    void run(std::vector<int> cells, std::vector<int> pods, std::vector<int>& free) {
        long long total_free = 0;
        for (int j : pods) total_free += free[j];
        if (total_free < static_cast<long long>(cells.size()))
            throw InfeasibleError("topo_aware: part does not fit its minipods");

        // Fits a single minipod: take the tightest one.
        int pick = -1;
        for (int j : pods)
            if (free[j] >= static_cast<int>(cells.size()) && (pick < 0 || free[j] < free[pick]))
                pick = j;
        if (pick >= 0 || pods.size() == 1) {
            if (pick < 0) pick = pods[0];
            for (int cell : cells) cell_pod[cell] = pick;
            free[pick] -= static_cast<int>(cells.size());
            return;
        }

        // Split the minipod set into capacity-balanced halves (largest first
        // onto the lighter side).
        std::vector<int> pod_order = pods;
        std::stable_sort(pod_order.begin(), pod_order.end(),
                         [&](int a, int b) { return free[a] > free[b]; });
        std::vector<int> pods_a, pods_b;
        long long cap_a = 0, cap_b = 0;
        for (int j : pod_order) {
            if (cap_a <= cap_b) {
                pods_a.push_back(j);
                cap_a += free[j];
            } else {
                pods_b.push_back(j);
                cap_b += free[j];
            }
        }

        // A part that fits one half whole descends uncut (the tighter fitting
        // half when both do).
        const int m = static_cast<int>(cells.size());
        if (m <= cap_a && (m > cap_b || cap_a <= cap_b)) {
            run(std::move(cells), std::move(pods_a), free);
            return;
        }
        if (m <= cap_b) {
            run(std::move(cells), std::move(pods_b), free);
            return;
        }

        // Otherwise cut the job graph near the capacity proportion.
        int target_a = static_cast<int>(std::llround(
            static_cast<double>(m) * cap_a / static_cast<double>(cap_a + cap_b)));
        target_a = std::clamp<long long>(target_a, m - cap_b, cap_a);
        target_a = std::clamp(target_a, 1, m - 1);

        JobGraph sub;
        sub.vertex_count = m;
        std::vector<int> local(graph.vertex_count, -1);
        for (int i = 0; i < m; ++i) local[cells[i]] = i;
        for (const auto& e : graph.edges)
            if (local[e.u] >= 0 && local[e.v] >= 0)
                sub.edges.push_back({local[e.u], local[e.v], e.weight});

        std::vector<int> side(m, 0);
        for (int i = 0; i < m; ++i) side[i] = i % 2;
        const int tol = std::max(1, static_cast<int>(0.1 * std::min(target_a, m - target_a)));
        int lo = static_cast<int>(std::max<long long>({1LL, target_a - tol, m - cap_b}));
        int hi = static_cast<int>(
            std::min<long long>({static_cast<long long>(m - 1), target_a + tol, cap_a}));
        int size_a = static_cast<int>(std::count(side.begin(), side.end(), 0));
        for (int v = m - 1; v >= 0 && size_a < lo; --v)
            if (side[v] == 1) {
                side[v] = 0;
                ++size_a;
            }
        for (int v = m - 1; v >= 0 && size_a > hi; --v)
            if (side[v] == 0) {
                side[v] = 1;
                --size_a;
            }
        fm_refine(sub, side, lo, hi);

        std::vector<int> cells_a, cells_b;
        for (int i = 0; i < m; ++i)
            (side[i] == 0 ? cells_a : cells_b).push_back(cells[i]);
        if (!cells_a.empty()) run(std::move(cells_a), std::move(pods_a), free);
        if (!cells_b.empty()) run(std::move(cells_b), std::move(pods_b), free);
    }
};

}  // namespace

Placement topo_aware(const CommMatrix& matrix, const ClusterTopology& topo,
                     const AllocationState& state) {
    auto free = free_counts(matrix, topo, state);
    JobGraph graph = build_job_graph(matrix);
    TopoAwareSplitter splitter(graph);
    std::vector<int> cells(matrix.cell_count());
    std::iota(cells.begin(), cells.end(), 0);
    std::vector<int> pods;
    for (int j = 0; j < topo.minipod_count(); ++j)
        if (free[j] > 0) pods.push_back(j);
    splitter.run(std::move(cells), std::move(pods), free);
    return placement_from_cell_pods(splitter.cell_pod, matrix, topo, state);
}

namespace {

struct Enumerator {
    const MipInstance& inst;
    const EnumConfig& config;
    long long explored = 0;
    bool found = false;
    double best_obj = 0;
    std::vector<std::vector<int>> best_counts;

    std::vector<int> residual;
    std::vector<long long> touched;  // nodes placed per pod so far
    std::vector<std::vector<int>> counts;

    explicit Enumerator(const MipInstance& i, const EnumConfig& c) : inst(i), config(c) {
        residual = i.capacity_nodes;
        touched.assign(i.minipod_count, 0);
        counts.assign(i.group_count, std::vector<int>(i.minipod_count, 0));
    }

    int used_pods() const {
        int used = 0;
        for (long long t : touched) used += t > 0;
        return used;
    }

    void run() {
        std::vector<int> prev(inst.minipod_count, inst.group_size);  // lex top
        dfs(0, prev, 0);
    }

    void tick() {
        if (++explored > config.node_budget)
            throw SearchCapError("enumerate: node budget exceeded");
    }

    void dfs(int group, const std::vector<int>& prev, int max_spread) {
        tick();
        const double bound = inst.alpha * used_pods() + inst.beta * std::max(max_spread, 1);
        if (found && bound >= best_obj) return;
        if (group == inst.group_count) {
            found = true;
            best_obj = bound;
            best_counts = counts;
            return;
        }
        std::vector<int> pattern(inst.minipod_count, 0);
        choose(group, 0, inst.group_size, true, prev, pattern, max_spread, 0);
    }

    // Build one group's node-count pattern pod by pod, lexicographically no
    // greater than the previous group's pattern.
    void choose(int group, int pod, int remaining, bool tight, const std::vector<int>& prev,
                std::vector<int>& pattern, int max_spread, int parts) {
        if (pod == inst.minipod_count) {
            if (remaining != 0) return;
            counts[group] = pattern;
            for (int j = 0; j < inst.minipod_count; ++j) {
                residual[j] -= pattern[j];
                touched[j] += pattern[j];
            }
            dfs(group + 1, pattern, std::max(max_spread, parts));
            for (int j = 0; j < inst.minipod_count; ++j) {
                residual[j] += pattern[j];
                touched[j] -= pattern[j];
            }
            counts[group].assign(inst.minipod_count, 0);
            return;
        }
        tick();
        long long rest = 0;  // capacity after this pod
        for (int j = pod + 1; j < inst.minipod_count; ++j) rest += residual[j];

        int hi = std::min(remaining, residual[pod]);
        if (tight) hi = std::min(hi, prev[pod]);
        for (int take = hi; take >= 0; --take) {
            if (remaining - take > rest) break;  // later pods cannot absorb the rest
            // Relabeling symmetry: an untouched pod shadowed by an untouched
            // equal-capacity predecessor is interchangeable with it.
            if (take > 0 && touched[pod] == 0) {
                bool shadowed = false;
                for (int j = 0; j < pod; ++j)
                    if (touched[j] == 0 && pattern[j] == 0 &&
                        inst.capacity_nodes[j] == inst.capacity_nodes[pod]) {
                        shadowed = true;
                        break;
                    }
                if (shadowed) continue;
            }
            pattern[pod] = take;
            choose(group, pod + 1, remaining - take, tight && take == prev[pod], prev, pattern,
                   max_spread, parts + (take > 0));
            pattern[pod] = 0;
        }
    }
};

}  // namespace

EnumResult enumerate_instance(const MipInstance& inst, const EnumConfig& config) {
    inst.validate();
    double guard = 1;
    for (int j = 0; j < inst.minipod_count; ++j) {
        guard *= inst.group_count;
        if (guard > static_cast<double>(config.search_cap)) break;
    }
    if (guard > static_cast<double>(config.search_cap))
        throw SearchCapError("enumerate: search space " + std::to_string(inst.group_count) + "^" +
                             std::to_string(inst.minipod_count) + " exceeds cap " +
                             std::to_string(config.search_cap));

    Enumerator e(inst, config);
    e.run();
    if (!e.found)
        throw InfeasibleError("enumerate: no capacity-respecting assignment exists");
    EnumResult result;
    result.objective = e.best_obj;
    result.counts = std::move(e.best_counts);
    result.explored = e.explored;
    return result;
}

EnumResult enumerate_optimal(const CommMatrix& matrix, const ClusterTopology& topo,
                             const AllocationState& state, double alpha, double beta,
                             const EnumConfig& config, SchedulingUnit unit) {
    const MipInstance inst = build_mip(matrix, topo, state, alpha, beta, unit);
    EnumResult result = enumerate_instance(inst, config);
    result.placement = assign_ranks(result.counts, inst, matrix, topo, state);
    return result;
}

}  // namespace arnold
