#include "noma/hybrid_nn.hpp"

#include <cmath>
#include <numeric>

#include "noma/errors.hpp"
#include "noma/iq_transform.hpp"

namespace noma {

std::size_t HybridNetParams::trainable_count() const {
    std::size_t n = final_weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i)
        n += weights[i].size() + biases[i].size();
    return n;
}

AdamState AdamState::init(const HybridNetParams& params, double lr) {
    AdamState s;
    s.lr = lr;
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        s.m.weights.push_back(Mat::Zero(params.weights[i].rows(), params.weights[i].cols()));
        s.m.biases.push_back(Vec::Zero(params.biases[i].size()));
        s.v.weights.push_back(Mat::Zero(params.weights[i].rows(), params.weights[i].cols()));
        s.v.biases.push_back(Vec::Zero(params.biases[i].size()));
    }
    s.m.final_weights = Vec::Zero(params.final_weights.size());
    s.v.final_weights = Vec::Zero(params.final_weights.size());
    return s;
}

namespace hybrid_nn {

HybridNetParams init_params(const std::vector<int>& dims, const LlsWeights& w0, Rng& rng) {
    if (dims.empty() || dims[0] != w0.w.size())
        throw dimension_error("init_params: dims[0] must equal the w0 length");
    for (int d : dims)
        if (d < 1) throw dimension_error("init_params: layer widths must be >= 1");

    HybridNetParams p;
    p.dims = dims;
    p.w0 = w0.w;
    for (std::size_t n = 1; n < dims.size(); ++n) {
        const int fan_in = dims[n - 1];
        const double scale = std::sqrt(2.0 / fan_in);
        Mat w(dims[n], fan_in);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = rng.gaussian() * scale;
        p.weights.push_back(std::move(w));
        p.biases.push_back(Vec::Zero(dims[n]));
    }
    p.final_weights = Vec::Zero(dims.back());
    return p;
}

namespace {

/// Activations after each hidden layer, input excluded.
std::vector<Mat> forward_hidden(const HybridNetParams& p, const Mat& x) {
    std::vector<Mat> acts;
    acts.reserve(p.weights.size());
    const Mat* prev = &x;
    for (std::size_t n = 0; n < p.weights.size(); ++n) {
        Mat a = ((*prev) * p.weights[n].transpose()).rowwise() +
                p.biases[n].transpose();
        a = a.cwiseMax(0.0);
        acts.push_back(std::move(a));
        prev = &acts.back();
    }
    return acts;
}

} // namespace

Vec forward(const HybridNetParams& p, const Mat& x) {
    if (x.cols() != p.w0.size())
        throw dimension_error("forward: input width does not match network");
    auto acts = forward_hidden(p, x);
    const Mat& last = acts.empty() ? x : acts.back();
    return x * p.w0 + last * p.final_weights;
}

std::pair<double, Gradients> loss_and_grad(const HybridNetParams& p, const Mat& x,
                                           const Vec& y) {
    if (x.rows() == 0) throw dimension_error("loss_and_grad: empty batch");
    if (x.cols() != p.w0.size() || y.size() != x.rows())
        throw dimension_error("loss_and_grad: dimension mismatch");

    const auto acts = forward_hidden(p, x);
    const Mat& last = acts.empty() ? x : acts.back();
    const double batch = static_cast<double>(x.rows());

    Vec residual = x * p.w0 + last * p.final_weights - y;
    const double loss = residual.squaredNorm() / batch;

    Gradients g;
    Vec dy = (2.0 / batch) * residual; // dL/dyhat
    g.final_weights = last.transpose() * dy;

    // dL/da_N (B x L_N), then walk layers backward.
    Mat da = dy * p.final_weights.transpose();
    g.weights.resize(p.weights.size());
    g.biases.resize(p.weights.size());
    for (std::size_t n = p.weights.size(); n-- > 0;) {
        // a_n > 0 iff pre-activation > 0; subgradient at 0 is 0.
        Mat dz = (acts[n].array() > 0.0).select(da, Mat::Zero(da.rows(), da.cols()));
        const Mat& below = (n == 0) ? x : acts[n - 1];
        g.weights[n] = dz.transpose() * below;
        g.biases[n] = dz.colwise().sum().transpose();
        if (n > 0) da = dz * p.weights[n];
    }
    return {loss, std::move(g)};
}

namespace {

template <typename T>
void adam_update(T& theta, const T& grad, T& m, T& v, const AdamState& s,
                 double corr1, double corr2) {
    m = s.beta1 * m + (1.0 - s.beta1) * grad;
    v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
    theta.array() -= s.lr * (m.array() / corr1) /
                     ((v.array() / corr2).sqrt() + s.eps);
}

} // namespace

void adam_step(HybridNetParams& p, const Gradients& g, AdamState& s) {
    if (g.weights.size() != p.weights.size() ||
        g.final_weights.size() != p.final_weights.size())
        throw dimension_error("adam_step: gradient shapes do not match");
    ++s.step;
    const double corr1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double corr2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t n = 0; n < p.weights.size(); ++n) {
        adam_update(p.weights[n], g.weights[n], s.m.weights[n], s.v.weights[n], s,
                    corr1, corr2);
        adam_update(p.biases[n], g.biases[n], s.m.biases[n], s.v.biases[n], s,
                    corr1, corr2);
    }
    adam_update(p.final_weights, g.final_weights, s.m.final_weights,
                s.v.final_weights, s, corr1, corr2);
}

namespace {

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, Rng& rng) {
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (Eigen::Index i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    return idx;
}

} // namespace

std::vector<double> train(HybridNetParams& p, const WidenedDataset& train_set,
                          const TrainConfig& cfg) {
    if (!train_set.targets)
        throw dimension_error("train: training set has no targets");
    if (train_set.design.rows() == 0)
        throw dimension_error("train: empty training set");
    if (cfg.epochs < 0 || cfg.batch_size < 1 || cfg.lr <= 0.0)
        throw config_error("train: invalid training configuration");

    const Mat& x = train_set.design;
    const Vec& y = *train_set.targets;
    const Eigen::Index n = x.rows();

    AdamState state = AdamState::init(p, cfg.lr);
    std::vector<double> trace;
    trace.reserve(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(substream_seed(cfg.shuffle_seed, static_cast<std::uint64_t>(epoch)));
        const auto idx = shuffled_indices(n, shuffle_rng);

        double loss_sum = 0.0;
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n - start);
            Mat xb(b, x.cols());
            Vec yb(b);
            for (Eigen::Index i = 0; i < b; ++i) {
                xb.row(i) = x.row(idx[start + i]);
                yb[i] = y[idx[start + i]];
            }
            auto [loss, grads] = loss_and_grad(p, xb, yb);
            adam_step(p, grads, state);
            loss_sum += loss * static_cast<double>(b);
        }
        trace.push_back(loss_sum / static_cast<double>(n));
    }
    return trace;
}

CVec detect(const HybridNetParams& p, const Mat& widened_detect) {
    return narrow_predictions(forward(p, widened_detect));
}

} // namespace hybrid_nn

} // namespace noma
