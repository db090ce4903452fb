#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <new>

#include "noma/fused_inference.hpp"
#include "noma/rng.hpp"
#include "oracles.hpp"

using namespace noma;

// Allocation counter for the memory-contract test.
static std::atomic<long long> g_alloc_bytes{0};
static std::atomic<bool> g_count_allocs{false};

void* operator new(std::size_t n) {
    if (g_count_allocs.load(std::memory_order_relaxed))
        g_alloc_bytes.fetch_add(static_cast<long long>(n), std::memory_order_relaxed);
    if (void* p = std::malloc(n)) return p;
    throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

namespace {

HybridNetParams random_net(const std::vector<int>& dims, std::uint64_t seed) {
    Rng rng(seed);
    LlsWeights w0;
    w0.w = Vec(dims[0]);
    for (int i = 0; i < dims[0]; ++i) w0.w[i] = rng.gaussian();
    HybridNetParams p = hybrid_nn::init_params(dims, w0, rng);
    for (auto& b : p.biases)
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.gaussian() * 0.1;
    for (Eigen::Index i = 0; i < p.final_weights.size(); ++i)
        p.final_weights[i] = rng.gaussian() * 0.3;
    return p;
}

Mat random_mat(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.gaussian();
    return m;
}

double max_rel_dev(const Vec& a, const Vec& b) {
    const double scale = std::max(1e-30, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

} // namespace

TEST_CASE("path dispatch follows the 128-neuron threshold") {
    CHECK(fused::build_plan(random_net({8, 64, 64, 64}, 1)).fused);
    CHECK(fused::build_plan(random_net({8, 128, 128}, 2)).fused);
    CHECK_FALSE(fused::build_plan(random_net({8, 256}, 3)).fused);
    CHECK_FALSE(fused::build_plan(random_net({8, 64, 129}, 4)).fused);
}

TEST_CASE("pack/unpack round trip is bit-identical") {
    HybridNetParams p = random_net({8, 64, 48, 64}, 5);
    HybridNetParams u = fused::build_plan(p).unpack();
    CHECK(u.w0 == p.w0);
    CHECK(u.final_weights == p.final_weights);
    REQUIRE(u.weights.size() == p.weights.size());
    for (std::size_t n = 0; n < p.weights.size(); ++n) {
        CHECK(u.weights[n] == p.weights[n]);
        CHECK(u.biases[n] == p.biases[n]);
    }
}

TEST_CASE("zero final layer reduces to the linear branch") {
    Rng rng(6);
    LlsWeights w0;
    w0.w = Vec(8);
    for (int i = 0; i < 8; ++i) w0.w[i] = rng.gaussian();
    HybridNetParams p = hybrid_nn::init_params({8, 64}, w0, rng);
    FusedPlan plan = fused::build_plan(p);
    Mat x = random_mat(37, 8, 7);
    CHECK(max_rel_dev(fused::fused_forward(plan, x), Vec(x * w0.w)) < 1e-15);
}

TEST_CASE("fused matches the reference forward at B=3840 within 1e-12") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        HybridNetParams p = random_net({8, 64, 64, 64}, 100 + seed);
        FusedPlan plan = fused::build_plan(p);
        Mat x = random_mat(3840, 8, 200 + seed);
        Vec ref = oracle::reference_forward(p, x);
        CHECK(max_rel_dev(fused::fused_forward(plan, x), ref) < 1e-12);
    }
}

TEST_CASE("single-neuron hand case at B=1") {
    LlsWeights w0;
    w0.w = Vec::Zero(1);
    Rng rng(8);
    HybridNetParams p = hybrid_nn::init_params({1, 1}, w0, rng);
    p.weights[0](0, 0) = 1.0;
    p.final_weights[0] = 1.0;
    FusedPlan plan = fused::build_plan(p);
    Mat x(1, 1);
    x << 3.0;
    CHECK(fused::fused_forward(plan, x)[0] == 3.0);
    x << -2.0;
    CHECK(fused::fused_forward(plan, x)[0] == 0.0);
}

TEST_CASE("fallback path matches the reference on wide layers") {
    HybridNetParams p = random_net({8, 256}, 9);
    FusedPlan plan = fused::build_plan(p);
    REQUIRE_FALSE(plan.fused);
    Mat x = random_mat(513, 8, 10);
    CHECK(max_rel_dev(fused::fused_forward(plan, x), oracle::reference_forward(p, x)) <
          1e-12);
}

TEST_CASE("32-bit path matches within the reassociation tolerance") {
    HybridNetParams p = random_net({8, 64, 64, 64}, 11);
    FusedPlan plan = fused::build_plan(p);
    Mat x = random_mat(512, 8, 12);
    Vec ref = oracle::reference_forward(p, x);
    MatF xf = x.cast<float>();
    VecF got = fused::fused_forward_f32(plan, xf);
    const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < ref.size(); ++i)
        CHECK(std::abs(static_cast<double>(got[i]) - ref[i]) / scale < 1e-5);
}

TEST_CASE("fused_forward_into performs no heap allocation") {
    HybridNetParams p = random_net({8, 64, 64, 64}, 13);
    FusedPlan plan = fused::build_plan(p);
    Mat x = random_mat(1024, 8, 14);
    Vec out(x.rows());
    fused::fused_forward_into(plan, x, out); // warm up
    g_alloc_bytes = 0;
    g_count_allocs = true;
    fused::fused_forward_into(plan, x, out);
    g_count_allocs = false;
    CHECK(g_alloc_bytes.load() == 0);
}

TEST_CASE("repeated evaluation is bit-identical") {
    HybridNetParams p = random_net({8, 64, 64}, 15);
    FusedPlan plan = fused::build_plan(p);
    Mat x = random_mat(333, 8, 16);
    Vec a = fused::fused_forward(plan, x);
    Vec b = fused::fused_forward(plan, x);
    CHECK(a == b);
}

TEST_CASE("bench_compare: report shape, gate and determinism") {
    HybridNetParams p = random_net({8, 64, 64, 64}, 17);
    FusedPlan plan = fused::build_plan(p);
    BenchReport rep = fused::bench_compare(plan, 64, 1);
    CHECK(rep.fused_ns_per_sample > 0);
    CHECK(rep.naive_ns_per_sample > 0);
    CHECK(rep.fallback_ns_per_sample > 0);
    CHECK(rep.speedup_vs_naive > 0);
    const std::string csv = rep.to_csv(true);
    CHECK(csv.find("path,dims,batch,ns_per_sample,speedup_vs_naive") == 0);
    CHECK(csv.find("fused,8x64x64x64,64,") != std::string::npos);
}
