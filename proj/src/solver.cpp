#include "arnold/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace arnold {

void MipInstance::validate() const {
    if (group_count <= 0 || group_size <= 0)
        throw ValidationError("mip: group_count and group_size must be positive");
    if (minipod_count <= 0 || static_cast<int>(capacity_nodes.size()) != minipod_count)
        throw ValidationError("mip: capacity_nodes must list every minipod");
    for (int c : capacity_nodes)
        if (c < 0) throw ValidationError("mip: negative capacity");
    if (alpha < 0 || beta < 0 || std::abs(alpha + beta - 1.0) > 1e-9)
        throw ValidationError("mip: alpha and beta must be nonnegative with alpha+beta=1");
}

MipInstance build_mip(const CommMatrix& matrix, const ClusterTopology& topo,
                      const AllocationState& state, double alpha, double beta,
                      SchedulingUnit unit, const std::optional<std::string>& as_job) {
    MipInstance inst;
    inst.unit = unit;
    inst.group_count = unit == SchedulingUnit::Row ? matrix.rows : matrix.cols;
    inst.group_size = unit == SchedulingUnit::Row ? matrix.cols : matrix.rows;
    inst.minipod_count = topo.minipod_count();
    inst.alpha = alpha;
    inst.beta = beta;
    long long total = 0;
    for (int j = 0; j < inst.minipod_count; ++j) {
        const int avail = available_capacity(topo, state, j, as_job);
        inst.capacity_nodes.push_back(avail);
        inst.capacities.push_back(static_cast<double>(avail) / inst.group_size);
        total += avail;
    }
    inst.validate();
    if (total < inst.demand_nodes())
        throw InfeasibleError("mip: job needs " + std::to_string(inst.demand_nodes()) +
                              " nodes but only " + std::to_string(total) + " are available");
    return inst;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Budget {
    Clock::time_point deadline;
    long long node_limit;
    long long nodes = 0;
    bool tripped = false;

    bool tick() {
        if (tripped) return false;
        ++nodes;
        if (nodes > node_limit || (nodes % 4096 == 0 && Clock::now() > deadline)) {
            tripped = true;
            return false;
        }
        return true;
    }
};

// One item's fragments: (ordered-pod index, node count) pairs.
using Fragments = std::vector<std::pair<int, int>>;

struct Packer {
    const std::vector<int>& caps;  // descending
    int item_size;
    int max_parts;
    bool use_memo;
    Budget& budget;
    std::set<std::vector<int>> failed;  // canonical residual multiset + items left

    std::vector<int> residual;
    std::vector<Fragments> packed;

    Packer(const std::vector<int>& caps_, int u, int t, bool memo, Budget& b)
        : caps(caps_), item_size(u), max_parts(t), use_memo(memo), budget(b), residual(caps_) {}

    bool pack(int items) {
        packed.clear();
        residual = caps;
        if (greedy(items)) return true;
        packed.clear();
        residual = caps;
        return search(items);
    }

  private:
    // Whole items first, then stitch the leftovers from the largest residuals.
    bool greedy(int items) {
        int left = items;
        for (size_t j = 0; j < residual.size() && left > 0; ++j) {
            int wholes = std::min<long long>(left, residual[j] / item_size);
            for (int w = 0; w < wholes; ++w) packed.push_back({{static_cast<int>(j), item_size}});
            residual[j] -= wholes * item_size;
            left -= wholes;
        }
        while (left > 0) {
            Fragments frags;
            int need = item_size;
            while (need > 0) {
                int best = -1;
                for (size_t j = 0; j < residual.size(); ++j)
                    if (residual[j] > 0 && (best < 0 || residual[j] > residual[best]))
                        best = static_cast<int>(j);
                if (best < 0 || static_cast<int>(frags.size()) >= max_parts) return false;
                const int take = std::min(residual[best], need);
                frags.push_back({best, take});
                residual[best] -= take;
                need -= take;
            }
            packed.push_back(std::move(frags));
            --left;
        }
        return true;
    }

    bool search(int items) {
        if (items == 0) return true;
        if (!budget.tick()) return false;
        long long total = std::accumulate(residual.begin(), residual.end(), 0LL);
        if (total < static_cast<long long>(items) * item_size) return false;

        std::vector<int> key;
        if (use_memo) {
            key = residual;
            std::sort(key.begin(), key.end());
            key.push_back(items);
            if (failed.count(key)) return false;
        }

        // Pods for this item in descending residual order.
        std::vector<int> order(residual.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return residual[a] > residual[b]; });

        Fragments frags;
        if (place(order, 0, item_size, max_parts, frags, items)) return true;
        if (use_memo) failed.insert(std::move(key));
        return false;
    }

    bool place(const std::vector<int>& order, size_t idx, int need, int parts_left,
               Fragments& frags, int items) {
        if (need == 0) {
            packed.push_back(frags);
            if (search(items - 1)) return true;
            packed.pop_back();
            return false;
        }
        if (idx >= order.size() || parts_left == 0) return false;
        if (!budget.tick()) return false;

        // Reachability: the largest parts_left residuals from here on.
        long long reach = 0;
        for (size_t i = idx; i < order.size() && i < idx + parts_left; ++i)
            reach += residual[order[i]];
        if (reach < need) return false;

        const int pod = order[idx];
        const int cap = residual[pod];
        for (int take = std::min(cap, need); take >= 1; --take) {
            residual[pod] -= take;
            frags.push_back({pod, take});
            if (place(order, idx + 1, need - take, parts_left - 1, frags, items)) return true;
            frags.pop_back();
            residual[pod] += take;
        }
        // Skip this pod; equal residuals are interchangeable, so skip them all.
        size_t next = idx + 1;
        if (use_memo)
            while (next < order.size() && residual[order[next]] == cap) ++next;
        return place(order, next, need, parts_left, frags, items);
    }
};

// Count-based feasibility for one-fragment items.
bool pack_wholes(const std::vector<int>& caps, int items, int size,
                 std::vector<Fragments>& packed) {
    packed.clear();
    int left = items;
    for (size_t j = 0; j < caps.size() && left > 0; ++j) {
        const int wholes = std::min<long long>(left, caps[j] / size);
        for (int w = 0; w < wholes; ++w) packed.push_back({{static_cast<int>(j), size}});
        left -= wholes;
    }
    return left == 0;
}

}  // namespace

MipSolution solve(const MipInstance& inst, const SolverConfig& config) {
    inst.validate();
    const auto start = Clock::now();
    Budget budget{start + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(config.time_limit_s)),
                  config.node_limit.value_or(std::numeric_limits<long long>::max())};

    const int k = inst.minipod_count;
    const int g = inst.group_count;
    const int u = inst.group_size;
    const long long demand = inst.demand_nodes();

    MipSolution sol;
    sol.y.assign(k, 0);
    sol.s.assign(g, std::vector<int>(k, 0));
    sol.p.assign(g, std::vector<double>(k, 0.0));

    // Minipods in descending capacity order, ties by index; empty pods are
    // never part of a minimal solution.
    std::vector<int> order;
    for (int j = 0; j < k; ++j)
        if (inst.capacity_nodes[j] > 0) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return inst.capacity_nodes[a] > inst.capacity_nodes[b];
    });

    std::vector<long long> prefix(order.size() + 1, 0);
    for (size_t i = 0; i < order.size(); ++i)
        prefix[i + 1] = prefix[i] + inst.capacity_nodes[order[i]];

    auto finish = [&](SolveStatus status) {
        sol.status = status;
        sol.stats.nodes_explored = budget.nodes;
        sol.stats.wall_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        return sol;
    };

    if (prefix.back() < demand) return finish(SolveStatus::Infeasible);

    int n_floor = 1;
    while (prefix[n_floor] < demand) ++n_floor;

    bool found = false;
    double best_obj = 0;
    int best_t = 0;
    std::vector<Fragments> best_packing;
    std::vector<int> used_caps;

    for (int t = 1; t <= static_cast<int>(order.size()) && !budget.tripped; ++t) {
        if (found && inst.alpha * n_floor + inst.beta * t >= best_obj) {
            if (inst.beta > 0) break;  // the bound only grows with t
            continue;
        }
        for (int n = n_floor; n <= static_cast<int>(order.size()); ++n) {
            if (found && inst.alpha * n + inst.beta * t >= best_obj) break;
            used_caps.clear();
            for (int i = 0; i < n; ++i) used_caps.push_back(inst.capacity_nodes[order[i]]);

            std::vector<Fragments> packing;
            bool ok;
            if (t == 1 || u == 1) {
                ok = pack_wholes(used_caps, g, u, packing);
            } else {
                Packer packer(used_caps, u, t, config.symmetry_breaking, budget);
                ok = packer.pack(g);
                packing = std::move(packer.packed);
            }
            if (budget.tripped) break;
            if (ok) {
                const double obj = inst.alpha * n + inst.beta * t;
                if (!found || obj < best_obj) {
                    found = true;
                    best_obj = obj;
                    best_t = t;
                    best_packing = std::move(packing);
                }
                break;  // larger n cannot improve this t
            }
        }
    }

    if (!found) return finish(budget.tripped ? SolveStatus::FeasibleTimeLimit
                                             : SolveStatus::Infeasible);

    for (size_t i = 0; i < best_packing.size(); ++i) {
        for (const auto& [ordered_pod, count] : best_packing[i]) {
            const int j = order[ordered_pod];
            sol.y[j] = 1;
            sol.s[i][j] = 1;
            sol.p[i][j] += static_cast<double>(count) / u;
        }
    }
    int spread = 1;
    for (const auto& row : sol.s)
        spread = std::max(spread, static_cast<int>(std::accumulate(row.begin(), row.end(), 0)));
    sol.t = std::max(best_t, spread);
    sol.objective = best_obj;
    return finish(budget.tripped ? SolveStatus::FeasibleTimeLimit : SolveStatus::Optimal);
}

void verify_solution(const MipInstance& inst, const MipSolution& sol, double tol) {
    inst.validate();
    if (sol.status == SolveStatus::Infeasible)
        throw ValidationError("verify: solution is infeasible");
    const int k = inst.minipod_count;
    const int g = inst.group_count;
    if (static_cast<int>(sol.y.size()) != k || static_cast<int>(sol.s.size()) != g ||
        static_cast<int>(sol.p.size()) != g)
        throw ValidationError("verify: variable dimensions do not match the instance");

    for (int j = 0; j < k; ++j)
        if (sol.y[j] != 0 && sol.y[j] != 1)
            throw ValidationError("verify: y not binary");
    if (sol.t < 1 || sol.t > k)
        throw ValidationError("verify: T outside 1..k");

    for (int i = 0; i < g; ++i) {
        int spread = 0;
        double allocated = 0;
        for (int j = 0; j < k; ++j) {
            const int s = sol.s[i][j];
            const double p = sol.p[i][j];
            if (s != 0 && s != 1) throw ValidationError("verify: s not binary");
            if (p < -tol || p > 1 + tol) throw ValidationError("verify: p outside [0,1]");
            if (p > s + tol)
                throw ValidationError("verify: minipod selection violated (p_ij > s_ij)");
            spread += s;
            allocated += p;
        }
        if (spread > sol.t)
            throw ValidationError("verify: max spread violated for group " + std::to_string(i));
        if (std::abs(allocated - 1.0) > tol)
            throw ValidationError("verify: allocation constraint violated for group " +
                                  std::to_string(i));
    }
    for (int j = 0; j < k; ++j) {
        double load = 0;
        for (int i = 0; i < g; ++i) load += sol.p[i][j];
        if (load > inst.capacities[j] * sol.y[j] + tol)
            throw ValidationError("verify: capacity violated for minipod " + std::to_string(j));
    }
    double y_sum = 0;
    for (int j = 0; j < k; ++j) y_sum += sol.y[j];
    const double expect = inst.alpha * y_sum + inst.beta * sol.t;
    if (std::abs(expect - sol.objective) > tol)
        throw ValidationError("verify: objective does not match the variables");
}

std::vector<std::vector<int>> discretize(const MipSolution& sol, const MipInstance& inst) {
    inst.validate();
    if (sol.status == SolveStatus::Infeasible)
        throw ValidationError("discretize: solution is infeasible");
    const int k = inst.minipod_count;
    const int g = inst.group_count;
    const int u = inst.group_size;

    std::vector<std::vector<int>> counts(g, std::vector<int>(k, 0));
    for (int i = 0; i < g; ++i) {
        std::vector<double> frac(k, 0.0);
        int assigned = 0;
        for (int j = 0; j < k; ++j) {
            const double target = sol.p[i][j] * u;
            counts[i][j] = static_cast<int>(std::floor(target + 1e-9));
            frac[j] = target - counts[i][j];
            assigned += counts[i][j];
        }
        // Largest remainder among the group's selected minipods.
        std::vector<int> pods;
        for (int j = 0; j < k; ++j)
            if (sol.s[i][j]) pods.push_back(j);
        std::stable_sort(pods.begin(), pods.end(),
                         [&](int a, int b) { return frac[a] > frac[b]; });
        for (int idx = 0; assigned < u; ++idx) {
            if (pods.empty()) throw ValidationError("discretize: group selects no minipod");
            counts[i][pods[idx % pods.size()]] += 1;
            ++assigned;
        }
        while (assigned > u) {  // guard against p rows summing above one
            for (int j = k - 1; j >= 0 && assigned > u; --j)
                if (counts[i][j] > 0) {
                    --counts[i][j];
                    --assigned;
                }
        }
    }

    // Capacity repair: move single nodes out of overfull minipods into the
    // same group's other selected minipod with slack.
    auto load = [&](int j) {
        int sum = 0;
        for (int i = 0; i < g; ++i) sum += counts[i][j];
        return sum;
    };
    for (int guard = 0; guard < g * k * u + 16; ++guard) {
        int over = -1;
        for (int j = 0; j < k; ++j)
            if (load(j) > inst.capacity_nodes[j]) {
                over = j;
                break;
            }
        if (over < 0) break;
        bool moved = false;
        for (int i = 0; i < g && !moved; ++i) {
            if (counts[i][over] == 0) continue;
            for (int j = 0; j < k && !moved; ++j) {
                if (j == over || !sol.s[i][j]) continue;
                if (load(j) < inst.capacity_nodes[j]) {
                    --counts[i][over];
                    ++counts[i][j];
                    moved = true;
                }
            }
        }
        if (!moved)
            throw ValidationError("discretize: capacity repair failed (solution infeasible?)");
    }
    return counts;
}

namespace {

Placement place_counts(const std::vector<std::vector<int>>& counts, const MipInstance& inst,
                       const CommMatrix& matrix, const std::vector<std::vector<NodeId>>& pools,
                       const ClusterTopology* topo_for_pods) {
    const int g = inst.group_count;
    const int k = inst.minipod_count;
    const int u = inst.group_size;
    if (static_cast<int>(counts.size()) != g)
        throw ValidationError("assign_ranks: counts do not match the instance");
    if (matrix.cell_count() != g * u)
        throw ValidationError("assign_ranks: matrix does not match the instance");

    Placement placement;
    placement.rows = matrix.rows;
    placement.cols = matrix.cols;
    placement.cell_minipod.assign(matrix.cell_count(), -1);
    placement.cell_node.assign(matrix.cell_count(), -1);

    std::vector<size_t> cursor(k, 0);
    for (int i = 0; i < g; ++i) {
        int pos = 0;
        for (int j = 0; j < k; ++j) {
            for (int n = 0; n < counts[i][j]; ++n) {
                if (pos >= u)
                    throw ValidationError("assign_ranks: group " + std::to_string(i) +
                                          " counts exceed the group size");
                const int row = inst.unit == SchedulingUnit::Row ? i : pos;
                const int col = inst.unit == SchedulingUnit::Row ? pos : i;
                if (cursor[j] >= pools[j].size())
                    throw StaleStateError("assign_ranks: minipod " + std::to_string(j) +
                                          " no longer has enough usable nodes");
                const NodeId node = pools[j][cursor[j]++];
                const int cell = matrix.cell_index(row, col);
                placement.cell_minipod[cell] = j;
                placement.cell_node[cell] = node;
                placement.rank_of_node[node] = cell;
                ++pos;
            }
        }
        if (pos != u)
            throw ValidationError("assign_ranks: group " + std::to_string(i) +
                                  " counts do not sum to the group size");
    }
    (void)topo_for_pods;
    return placement;
}

}  // namespace

Placement assign_ranks(const std::vector<std::vector<int>>& counts, const MipInstance& inst,
                       const CommMatrix& matrix, const ClusterTopology& topo,
                       const AllocationState& state) {
    std::vector<std::vector<NodeId>> pools(inst.minipod_count);
    for (int j = 0; j < inst.minipod_count; ++j)
        for (NodeId node : topo.nodes_in(j))
            if (state.at(node).state == NodeState::Free) pools[j].push_back(node);
    return place_counts(counts, inst, matrix, pools, &topo);
}

Placement assign_ranks_from_candidates(const std::vector<std::vector<int>>& counts,
                                       const MipInstance& inst, const CommMatrix& matrix,
                                       const std::vector<std::vector<NodeId>>& candidates) {
    if (static_cast<int>(candidates.size()) != inst.minipod_count)
        throw ValidationError("assign_ranks: candidate lists do not cover every minipod");
    return place_counts(counts, inst, matrix, candidates, nullptr);
}

}  // namespace arnold
