#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "noma/lls.hpp"
#include "noma/rng.hpp"
#include "noma/types.hpp"

namespace noma {

/// Two-branch detector: a frozen linear branch w0 summed with a trainable
/// ReLU multilayer branch whose final layer carries no bias.
struct HybridNetParams {
    Vec w0;                    // frozen, length 2M
    std::vector<Mat> weights;  // W_n: L_n x L_{n-1}
    std::vector<Vec> biases;   // b_n: L_n
    Vec final_weights;         // w_{N+1}: L_N, no bias
    std::vector<int> dims;     // [2M, L_1, ..., L_N]

    std::size_t trainable_count() const;
};

/// Gradients of the trainable parameters (w0 excluded).
struct Gradients {
    std::vector<Mat> weights;
    std::vector<Vec> biases;
    Vec final_weights;
};

struct AdamState {
    Gradients m; // first moments
    Gradients v; // second moments
    long step = 0;
    double lr = 0.005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(const HybridNetParams& params, double lr);
};

struct TrainConfig {
    int epochs = 50;
    int batch_size = 128;
    double lr = 0.005;
    std::uint64_t shuffle_seed = 0;
};

namespace hybrid_nn {

/// Hidden weights He-initialized (variance 2/fan_in), biases zero, final
/// layer zero so the initial network output equals the LLS prediction.
HybridNetParams init_params(const std::vector<int>& dims, const LlsWeights& w0,
                            Rng& rng);

/// yhat = X w0 + a_N w_{N+1}, a_n = max(a_{n-1} W_n^T + b_n, 0).
Vec forward(const HybridNetParams& params, const Mat& x);

/// Mean squared error over the batch and its gradients. ReLU subgradient
/// at exactly 0 is 0.
std::pair<double, Gradients> loss_and_grad(const HybridNetParams& params,
                                           const Mat& x, const Vec& y);

/// Bias-corrected Adam update on the trainable parameters; w0 untouched.
void adam_step(HybridNetParams& params, const Gradients& grads, AdamState& state);

/// Mini-batch training with a fresh seeded shuffle per epoch. Returns the
/// per-epoch mean training loss, length cfg.epochs.
std::vector<double> train(HybridNetParams& params, const WidenedDataset& train_set,
                          const TrainConfig& cfg);

/// narrow_predictions(forward(params, widened_detect)).
CVec detect(const HybridNetParams& params, const Mat& widened_detect);

} // namespace hybrid_nn

} // namespace noma
