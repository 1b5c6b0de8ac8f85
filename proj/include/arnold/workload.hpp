#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arnold/errors.hpp"

namespace arnold {

struct MoeArch {
    long long experts = 0;
    long long layer_params = 0;  // parameter elements per MoE layer
};

// Transformer hyperparameters. A dense block contributes 12h^2 + 9h
// parameters per layer; MoE models carry an explicit per-layer count.
struct ModelHyper {
    long long vocab = 0;
    long long seq_len = 0;
    long long hidden = 0;
    long long layers = 0;
    std::optional<MoeArch> moe;

    void validate() const;
};

struct JobSpec {
    long long gpus = 0;
    int tp = 1;
    int pp = 1;
    int vp = 1;  // carried for completeness; no volume formula consumes it
    long long gb = 1;  // global batch, sequences
    long long mb = 1;  // micro batch, sequences
    ModelHyper model;
    std::string gpu_type = "H800";
    int bytes_per_element = 2;
    // Per-group precision overrides (e.g. 8-bit PP activations with 32-bit
    // DP gradients); default to bytes_per_element.
    std::optional<int> dp_bytes;
    std::optional<int> pp_bytes;
    // Extra factor on the DP volume (e.g. 2.0 to count all-gather and
    // reduce-scatter passes separately).
    double dp_volume_multiplier = 1.0;

    long long dp() const;
    int effective_dp_bytes() const { return dp_bytes.value_or(bytes_per_element); }
    int effective_pp_bytes() const { return pp_bytes.value_or(bytes_per_element); }
    void validate() const;
};

// Per-GPU traffic attached to every cell of a communication matrix.
struct VolumeVector {
    double weight_elems = 0;    // parameter elements per GPU
    double dp_bytes = 0;        // DP bytes per GPU per step
    double pp_bytes = 0;        // PP bytes per GPU per microbatch; 0 iff pp == 1
};

// m x n grid of physical node slots: a row is a PP group, a column a DP
// group. Groups are homogeneous, so one volume vector covers all cells.
struct CommMatrix {
    int rows = 0;
    int cols = 0;
    VolumeVector volume;

    int cell_count() const { return rows * cols; }
    int cell_index(int row, int col) const { return row * cols + col; }
};

CommMatrix build_comm_matrix(const JobSpec& spec);

// Parameter elements held by one pipeline stage (Eq. for GPT-style blocks:
// embedding h*(V+s) plus l/pp layers of 4h^2+2h attention and 8h^2+7h MLP;
// MoE swaps the MLP term for the configured per-layer count).
long long dp_volume_elements(const ModelHyper& model, int pp);

// Activation elements crossing one stage boundary per microbatch: 2*mb*s*h.
long long pp_volume_elements(long long mb, long long seq_len, long long hidden);

long long microbatch_count(long long gb, long long mb, long long dp);

struct Ratios {
    double r1 = 0;                 // mb * v_w / (v_d + v_p), volumes in bytes
    std::optional<double> r2;      // v_d / v_p; absent when pp == 1
};

Ratios compute_ratios(const JobSpec& spec);

struct ProfileEntry {
    std::string gpu_type;
    std::string tag;
    double r1 = 0;
    double r2 = 0;
    double j_dp = 0;  // % improvement of a DP-aligned placement
    double j_pp = 0;  // % improvement of a PP-aligned placement
};

using ProfileDb = std::vector<ProfileEntry>;

struct Affinity {
    double alpha = 0;  // DP-spread weight
    double beta = 1;   // PP-spread weight
};

// Nearest entry of the matching gpu_type by Euclidean distance in (r1, r2);
// ties break to the lowest entry index. alpha = j_dp/(j_dp+j_pp).
Affinity lookup_affinity(const ProfileDb& db, const std::string& gpu_type, double r1, double r2);

}  // namespace arnold
