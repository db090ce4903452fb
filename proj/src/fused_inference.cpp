#include "noma/fused_inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "noma/errors.hpp"
#include "noma/rng.hpp"

namespace noma {

namespace {

constexpr int kLane = 8;

int pad_up(int w) { return ((w + kLane - 1) / kLane) * kLane; }

// Buffer layout: w0[pad0] | layer n: L_n rows of pad_{n-1} weights, then
// bias[pad_n] | final[pad_N]. Offsets are recomputed by walking dims.
struct Layout {
    std::size_t w0 = 0;
    std::vector<std::size_t> layer_weights;
    std::vector<std::size_t> layer_bias;
    std::size_t final_w = 0;
    std::size_t total = 0;
};

Layout layout_of(const std::vector<int>& dims, const std::vector<int>& padded) {
    Layout lo;
    std::size_t off = static_cast<std::size_t>(padded[0]); // w0
    for (std::size_t n = 1; n < dims.size(); ++n) {
        lo.layer_weights.push_back(off);
        off += static_cast<std::size_t>(dims[n]) * padded[n - 1];
        lo.layer_bias.push_back(off);
        off += static_cast<std::size_t>(padded[n]);
    }
    lo.final_w = off;
    off += static_cast<std::size_t>(padded.back());
    lo.total = off;
    return lo;
}

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
const std::vector<T>& plan_buffer(const FusedPlan& plan);
template <>
const std::vector<double>& plan_buffer<double>(const FusedPlan& plan) {
    return plan.buffer;
}
template <>
const std::vector<float>& plan_buffer<float>(const FusedPlan& plan) {
    return plan.buffer_f32;
}

// Single-pass tiled evaluator. All per-layer activations for one tile live
// in two fixed scratch buffers; nothing batch-sized is materialized except
// the caller-provided output. Offsets into the packed buffer are walked
// with scalar counters so the hot path never touches the heap.
template <typename T, typename MatT, typename VecT>
void fused_kernel(const FusedPlan& plan, const MatT& x, VecT& out) {
    const auto& buf = plan_buffer<T>(plan);
    const std::size_t num_layers = plan.dims.size() - 1;
    const int in_width = plan.dims[0];
    const int in_pad = plan.padded[0];
    const Eigen::Index rows = x.rows();

    alignas(64) T scratch_a[kFusedTileRows * kFusedMaxWidth];
    alignas(64) T scratch_b[kFusedTileRows * kFusedMaxWidth];
    T linear[kFusedTileRows];

    for (Eigen::Index tile = 0; tile < rows; tile += kFusedTileRows) {
        const int tr = static_cast<int>(std::min<Eigen::Index>(kFusedTileRows, rows - tile));

        // Load tile, zero-padding to the lane width.
        for (int r = 0; r < tr; ++r) {
            T* dst = scratch_a + r * kFusedMaxWidth;
            for (int c = 0; c < in_width; ++c) dst[c] = static_cast<T>(x(tile + r, c));
            for (int c = in_width; c < in_pad; ++c) dst[c] = T(0);
        }

        // Frozen linear branch, accumulated while the input is still loaded.
        const T* w0 = buf.data();
        for (int r = 0; r < tr; ++r) {
            const T* row = scratch_a + r * kFusedMaxWidth;
            T acc = T(0);
            for (int c = 0; c < in_pad; ++c) acc += w0[c] * row[c];
            linear[r] = acc;
        }

        T* cur = scratch_a;
        T* nxt = scratch_b;
        std::size_t off = static_cast<std::size_t>(in_pad);
        for (std::size_t n = 0; n < num_layers; ++n) {
            const int width = plan.dims[n + 1];
            const int prev_pad = plan.padded[n];
            const int width_pad = plan.padded[n + 1];
            const T* w = buf.data() + off;
            off += static_cast<std::size_t>(width) * prev_pad;
            const T* b = buf.data() + off;
            off += static_cast<std::size_t>(width_pad);
            for (int r = 0; r < tr; ++r) {
                const T* in = cur + r * kFusedMaxWidth;
                T* dst = nxt + r * kFusedMaxWidth;
                for (int j = 0; j < width; ++j) {
                    const T* wrow = w + static_cast<std::size_t>(j) * prev_pad;
                    T acc = b[j];
                    for (int c = 0; c < prev_pad; ++c) acc += wrow[c] * in[c];
                    dst[j] = acc > T(0) ? acc : T(0);
                }
                for (int j = width; j < width_pad; ++j) dst[j] = T(0);
            }
            std::swap(cur, nxt);
        }

        const T* fw = buf.data() + off;
        const int last_pad = plan.padded.back();
        for (int r = 0; r < tr; ++r) {
            const T* in = cur + r * kFusedMaxWidth;
            T acc = T(0);
            for (int c = 0; c < last_pad; ++c) acc += fw[c] * in[c];
            out[tile + r] = linear[r] + acc;
        }
    }
}

// Fallback: per-layer blocked GEMM (Eigen) over maps onto the packed
// buffer; used whenever a layer is wider than the fused limit.
template <typename T, typename MatT, typename VecT>
void fallback_kernel(const FusedPlan& plan, const MatT& x, VecT& out) {
    using Row = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using VecT1 = Eigen::Matrix<T, Eigen::Dynamic, 1>;
    const auto& buf = plan_buffer<T>(plan);
    const Layout lo = layout_of(plan.dims, plan.padded);

    Eigen::Map<const VecT1> w0(buf.data() + lo.w0, plan.dims[0]);
    VecT1 lin = x * w0;

    Row act = x;
    for (std::size_t n = 0; n < lo.layer_weights.size(); ++n) {
        Eigen::Map<const Row, Eigen::Unaligned, Eigen::OuterStride<>> w(
            buf.data() + lo.layer_weights[n], plan.dims[n + 1], plan.dims[n],
            Eigen::OuterStride<>(plan.padded[n]));
        Eigen::Map<const VecT1> b(buf.data() + lo.layer_bias[n], plan.dims[n + 1]);
        act = ((act * w.transpose()).rowwise() + b.transpose()).cwiseMax(T(0));
    }
    Eigen::Map<const VecT1> fw(buf.data() + lo.final_w, plan.dims.back());
    out = lin + act * fw;
}

} // namespace

HybridNetParams FusedPlan::unpack() const {
    const Layout lo = layout_of(dims, padded);
    HybridNetParams p;
    p.dims = dims;
    p.w0 = Eigen::Map<const Vec>(buffer.data() + lo.w0, dims[0]);
    for (std::size_t n = 0; n < lo.layer_weights.size(); ++n) {
        Eigen::Map<const RowMat, Eigen::Unaligned, Eigen::OuterStride<>> w(
            buffer.data() + lo.layer_weights[n], dims[n + 1], dims[n],
            Eigen::OuterStride<>(padded[n]));
        p.weights.emplace_back(w);
        p.biases.emplace_back(
            Eigen::Map<const Vec>(buffer.data() + lo.layer_bias[n], dims[n + 1]));
    }
    p.final_weights = Eigen::Map<const Vec>(buffer.data() + lo.final_w, dims.back());
    return p;
}

namespace fused {

FusedPlan build_plan(const HybridNetParams& params) {
    FusedPlan plan;
    plan.dims = params.dims;
    plan.max_width = *std::max_element(params.dims.begin(), params.dims.end());
    plan.fused = plan.max_width <= kFusedMaxWidth;
    for (int d : params.dims) plan.padded.push_back(pad_up(d));

    const Layout lo = layout_of(plan.dims, plan.padded);
    plan.buffer.assign(lo.total, 0.0);

    std::copy(params.w0.data(), params.w0.data() + params.w0.size(),
              plan.buffer.begin() + lo.w0);
    for (std::size_t n = 0; n < params.weights.size(); ++n) {
        const Mat& w = params.weights[n];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                plan.buffer[lo.layer_weights[n] + r * plan.padded[n] + c] = w(r, c);
        std::copy(params.biases[n].data(),
                  params.biases[n].data() + params.biases[n].size(),
                  plan.buffer.begin() + lo.layer_bias[n]);
    }
    std::copy(params.final_weights.data(),
              params.final_weights.data() + params.final_weights.size(),
              plan.buffer.begin() + lo.final_w);

    plan.buffer_f32.resize(plan.buffer.size());
    std::transform(plan.buffer.begin(), plan.buffer.end(), plan.buffer_f32.begin(),
                   [](double v) { return static_cast<float>(v); });
    return plan;
}

void fused_forward_into(const FusedPlan& plan, const Mat& x, Vec& out) {
    if (x.cols() != plan.dims[0])
        throw dimension_error("fused_forward: input width does not match plan");
    if (out.size() != x.rows())
        throw dimension_error("fused_forward: output not presized to batch");
    if (plan.fused)
        fused_kernel<double>(plan, x, out);
    else
        fallback_kernel<double>(plan, x, out);
}

Vec fused_forward(const FusedPlan& plan, const Mat& x) {
    Vec out(x.rows());
    fused_forward_into(plan, x, out);
    return out;
}

VecF fused_forward_f32(const FusedPlan& plan, const MatF& x) {
    if (x.cols() != plan.dims[0])
        throw dimension_error("fused_forward_f32: input width does not match plan");
    VecF out(x.rows());
    if (plan.fused)
        fused_kernel<float>(plan, x, out);
    else
        fallback_kernel<float>(plan, x, out);
    return out;
}

namespace {

// Straight-line per-layer evaluation with full batch intermediates; the
// timing baseline, kept free of blocking or packing.
Vec naive_forward(const HybridNetParams& p, const Mat& x) {
    const Eigen::Index rows = x.rows();
    Vec out(rows);
    std::vector<double> cur(p.dims[0]), nxt;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (int c = 0; c < p.dims[0]; ++c) cur[c] = x(r, c);
        double lin = 0.0;
        for (int c = 0; c < p.dims[0]; ++c) lin += p.w0[c] * cur[c];
        std::vector<double> act = cur;
        for (std::size_t n = 0; n < p.weights.size(); ++n) {
            nxt.assign(p.dims[n + 1], 0.0);
            for (int j = 0; j < p.dims[n + 1]; ++j) {
                double acc = p.biases[n][j];
                for (int c = 0; c < p.dims[n]; ++c) acc += p.weights[n](j, c) * act[c];
                nxt[j] = acc > 0.0 ? acc : 0.0;
            }
            act = nxt;
        }
        double branch = 0.0;
        for (int c = 0; c < p.dims.back(); ++c) branch += p.final_weights[c] * act[c];
        out[r] = lin + branch;
    }
    return out;
}

double median_ns(std::vector<double>& samples) {
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
}

template <typename F>
double time_median_ns(F&& fn, int repeats) {
    std::vector<double> ns;
    ns.reserve(repeats);
    for (int i = 0; i < repeats; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    return median_ns(ns);
}

} // namespace

BenchReport bench_compare(const FusedPlan& plan, int batch, int repeats) {
    if (batch < 1 || repeats < 1)
        throw dimension_error("bench_compare: batch and repeats must be >= 1");

    Rng rng(0x9E24Au);
    Mat x(batch, plan.dims[0]);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = rng.gaussian();

    const HybridNetParams unpacked = plan.unpack();
    const Vec reference = naive_forward(unpacked, x);

    // Equivalence gate before any timing is reported.
    Vec primary = fused_forward(plan, x);
    Vec fb(batch);
    fallback_kernel<double>(plan, x, fb);
    const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
    if ((primary - reference).cwiseAbs().maxCoeff() / scale > 1e-12 ||
        (fb - reference).cwiseAbs().maxCoeff() / scale > 1e-12)
        throw std::runtime_error("bench_compare: evaluation paths disagree");

    BenchReport rep;
    rep.dims = plan.dims;
    rep.batch = batch;
    rep.repeats = repeats;
    Vec out(batch);
    rep.fused_ns_per_sample =
        time_median_ns([&] { fused_forward_into(plan, x, out); }, repeats) / batch;
    rep.naive_ns_per_sample =
        time_median_ns([&] { naive_forward(unpacked, x); }, repeats) / batch;
    rep.fallback_ns_per_sample =
        time_median_ns([&] { fallback_kernel<double>(plan, x, out); }, repeats) / batch;
    rep.speedup_vs_naive = rep.naive_ns_per_sample / rep.fused_ns_per_sample;
#if defined(__AVX2__)
    rep.machine = "x86-64 avx2, single thread";
#else
    rep.machine = "generic, single thread";
#endif
    return rep;
}

} // namespace fused

std::string BenchReport::to_csv(bool with_header) const {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    if (with_header) os << "path,dims,batch,ns_per_sample,speedup_vs_naive\n";
    std::ostringstream d;
    for (std::size_t i = 0; i < dims.size(); ++i) d << (i ? "x" : "") << dims[i];
    const std::string ds = d.str();
    os << "fused," << ds << ',' << batch << ',' << fused_ns_per_sample << ','
       << speedup_vs_naive << '\n';
    os << "naive," << ds << ',' << batch << ',' << naive_ns_per_sample << ",1\n";
    os << "fallback," << ds << ',' << batch << ',' << fallback_ns_per_sample << ','
       << naive_ns_per_sample / fallback_ns_per_sample << '\n';
    return os.str();
}

} // namespace noma
