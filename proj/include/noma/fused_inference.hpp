#pragma once

#include <string>
#include <vector>

#include "noma/hybrid_nn.hpp"
#include "noma/types.hpp"

namespace noma {

/// Widest layer the single-pass path supports; wider networks fall back to
/// a per-layer GEMM evaluation.
inline constexpr int kFusedMaxWidth = 128;

/// Rows processed per tile; per-tile activations stay in two fixed
/// tile x kFusedMaxWidth scratch buffers.
inline constexpr int kFusedTileRows = 8;

/// Packed, padded copy of a network, laid out layer-major so the inner
/// accumulation loops are stride-1. Holds both 64-bit and 32-bit copies.
struct FusedPlan {
    std::vector<int> dims;        // [2M, L_1, ..., L_N]
    std::vector<int> padded;      // widths rounded up to the lane multiple
    std::vector<double> buffer;   // w0 | per-layer (weights, bias) | final
    std::vector<float> buffer_f32;
    bool fused = false;           // false => fallback path
    int max_width = 0;

    /// Inverse of packing; bitwise equal to the source parameters.
    HybridNetParams unpack() const;
};

struct BenchReport {
    std::vector<int> dims;
    int batch = 0;
    int repeats = 0;
    double fused_ns_per_sample = 0.0;
    double naive_ns_per_sample = 0.0;
    double fallback_ns_per_sample = 0.0;
    double speedup_vs_naive = 0.0;
    std::string machine;

    /// CSV rows: path,dims,batch,ns_per_sample,speedup_vs_naive
    std::string to_csv(bool with_header) const;
};

namespace fused {

FusedPlan build_plan(const HybridNetParams& params);

/// Equivalent to hybrid_nn::forward; dispatches to the single-pass tiled
/// evaluator when the plan is fused, otherwise to the per-layer fallback.
Vec fused_forward(const FusedPlan& plan, const Mat& x);

/// Same, writing into a presized output vector; the fused path performs no
/// heap allocation here.
void fused_forward_into(const FusedPlan& plan, const Mat& x, Vec& out);

/// 32-bit variant of the fused/fallback evaluator.
VecF fused_forward_f32(const FusedPlan& plan, const MatF& x);

/// Times fused, naive per-layer, and blocked-fallback evaluation on random
/// inputs; asserts numerical equivalence before timing anything.
BenchReport bench_compare(const FusedPlan& plan, int batch, int repeats);

} // namespace fused

} // namespace noma
