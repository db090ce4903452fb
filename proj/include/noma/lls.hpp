#pragma once

#include "noma/iq_transform.hpp"
#include "noma/types.hpp"

namespace noma {

/// Per-user linear least-squares weights on the widened representation.
struct LlsWeights {
    Vec w;               // length 2M
    int user_index = 0;
    double gram_condition = 0.0; // cond(X^T X), diagnostic
};

namespace lls {

/// Minimizes ||X w - y||_2 via column-pivoted QR. Throws
/// ill_conditioned_error when the design is numerically rank deficient.
LlsWeights fit(const Mat& design, const Vec& targets, int user_index = 0);

LlsWeights fit(const WidenedDataset& train);

/// yhat = narrow(X_D * w).
CVec predict(const LlsWeights& weights, const Mat& widened_detect);

} // namespace lls

} // namespace noma
