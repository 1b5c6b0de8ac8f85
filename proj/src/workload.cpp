#include "arnold/workload.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace arnold {

void ModelHyper::validate() const {
    if (vocab <= 0 || seq_len <= 0 || hidden <= 0 || layers <= 0)
        throw ValidationError("model: V, s, h, l must all be positive");
    if (moe && (moe->experts <= 0 || moe->layer_params <= 0))
        throw ValidationError("model: MoE experts and per-layer parameter count must be positive");
}

long long JobSpec::dp() const {
    return gpus / tp / pp;
}

void JobSpec::validate() const {
    model.validate();
    if (gpus <= 0) throw ValidationError("job: gpus must be positive");
    if (tp != 1 && tp != 2 && tp != 4 && tp != 8)
        throw ValidationError("job: tp must be one of 1, 2, 4, 8");
    if (pp <= 0 || vp <= 0) throw ValidationError("job: pp and vp must be positive");
    if (gpus % (static_cast<long long>(tp) * pp) != 0)
        throw ValidationError("job: gpus must be divisible by tp*pp");
    if (model.layers % pp != 0)
        throw ValidationError("job: layer count must be divisible by pp");
    if (mb <= 0 || gb <= 0) throw ValidationError("job: gb and mb must be positive");
    if (gb % (mb * dp()) != 0)
        throw ValidationError("job: gb must be divisible by mb*dp");
    if (bytes_per_element <= 0 || effective_dp_bytes() <= 0 || effective_pp_bytes() <= 0)
        throw ValidationError("job: element sizes must be positive");
    if (dp_volume_multiplier <= 0)
        throw ValidationError("job: dp_volume_multiplier must be positive");
}

long long dp_volume_elements(const ModelHyper& model, int pp) {
    model.validate();
    if (pp <= 0 || model.layers % pp != 0)
        throw ValidationError("dp_volume: layer count must be divisible by pp");
    const long long h = model.hidden;
    const long long embedding = h * (model.vocab + model.seq_len);
    const long long attention = 4 * h * h + 2 * h;
    const long long block = model.moe ? model.moe->layer_params : 8 * h * h + 7 * h;
    return embedding + (model.layers / pp) * (attention + block);
}

long long pp_volume_elements(long long mb, long long seq_len, long long hidden) {
    if (mb <= 0 || seq_len <= 0 || hidden <= 0)
        throw ValidationError("pp_volume: mb, s, h must be positive");
    return 2 * mb * seq_len * hidden;
}

long long microbatch_count(long long gb, long long mb, long long dp) {
    if (gb <= 0 || mb <= 0 || dp <= 0)
        throw ValidationError("microbatch_count: arguments must be positive");
    if (gb % (mb * dp) != 0)
        throw ValidationError("microbatch_count: gb not divisible by mb*dp");
    return gb / (mb * dp);
}

CommMatrix build_comm_matrix(const JobSpec& spec) {
    spec.validate();
    const long long dp = spec.dp();
    // A node's 8 GPUs host 8/TP consecutive DP ranks; DP*TP below 8 would
    // put one DP group on a fraction of a node.
    if (dp * spec.tp < 8)
        throw ValidationError("comm_matrix: DP*TP < 8 (sub-node DP sharing unsupported)");
    if ((dp * spec.tp) % 8 != 0)
        throw ValidationError("comm_matrix: DP*TP must be divisible by 8");

    CommMatrix m;
    m.rows = static_cast<int>(dp * spec.tp / 8);
    m.cols = spec.pp;

    const double per_gpu = 1.0 / spec.tp;  // a stage is sharded across TP GPUs
    const double weight = static_cast<double>(dp_volume_elements(spec.model, spec.pp)) * per_gpu;
    m.volume.weight_elems = weight;
    m.volume.dp_bytes = weight * spec.effective_dp_bytes() * spec.dp_volume_multiplier;
    m.volume.pp_bytes =
        spec.pp > 1 ? static_cast<double>(pp_volume_elements(spec.mb, spec.model.seq_len,
                                                             spec.model.hidden)) *
                          per_gpu * spec.effective_pp_bytes()
                    : 0.0;
    return m;
}

Ratios compute_ratios(const JobSpec& spec) {
    const CommMatrix m = build_comm_matrix(spec);
    const double v_w_bytes = m.volume.weight_elems * spec.bytes_per_element;
    const double denom = m.volume.dp_bytes + m.volume.pp_bytes;
    if (denom <= 0) throw ValidationError("ratios: v_d + v_p must be positive");
    Ratios r;
    r.r1 = static_cast<double>(spec.mb) * v_w_bytes / denom;
    if (spec.pp > 1 && m.volume.pp_bytes > 0)
        r.r2 = m.volume.dp_bytes / m.volume.pp_bytes;
    return r;
}

Affinity lookup_affinity(const ProfileDb& db, const std::string& gpu_type, double r1, double r2) {
    const ProfileEntry* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& entry : db) {
        if (entry.gpu_type != gpu_type) continue;
        const double d = std::hypot(r1 - entry.r1, r2 - entry.r2);
        if (!best || d < best_dist) {  // strict: ties keep the earliest entry
            best = &entry;
            best_dist = d;
        }
    }
    if (!best) {
        std::set<std::string> types;
        for (const auto& entry : db) types.insert(entry.gpu_type);
        std::string msg = "affinity: no profile entry for gpu_type '" + gpu_type + "'; available:";
        if (types.empty()) msg += " (none)";
        for (const auto& t : types) msg += " " + t;
        throw ValidationError(msg);
    }
    const double total = best->j_dp + best->j_pp;
    if (total <= 0)
        throw ValidationError("affinity: matched entry '" + best->tag + "' has j_dp + j_pp <= 0");
    return {best->j_dp / total, best->j_pp / total};
}

}  // namespace arnold
