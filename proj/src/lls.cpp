#include "noma/lls.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include "noma/errors.hpp"

namespace noma::lls {

LlsWeights fit(const Mat& design, const Vec& targets, int user_index) {
    if (design.rows() < design.cols())
        throw dimension_error("lls::fit: system must be over-determined");
    if (design.rows() != targets.size())
        throw dimension_error("lls::fit: design rows and target length differ");

    // Singular values of X give cond(X^T X) = (smax/smin)^2 without forming
    // the Gram matrix.
    Eigen::JacobiSVD<Mat> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double smax = sv[0];
    const double smin = sv[sv.size() - 1];
    const double rank_tol = smax * std::numeric_limits<double>::epsilon() *
                            static_cast<double>(std::max(design.rows(), design.cols()));
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > rank_tol) ++rank;

    LlsWeights out;
    out.user_index = user_index;
    if (rank == design.cols()) {
        out.w = design.colPivHouseholderQr().solve(targets);
        out.gram_condition = (smax / smin) * (smax / smin);
        return out;
    }

    // Rank-deficient design. A noiseless under-loaded scenario lands here
    // legitimately (complex rank K widens to real rank 2K < 2M) and still
    // has a consistent solution; take the minimum-norm one. An inconsistent
    // rank-deficient system has no trustworthy detector and is an error.
    Vec coeffs = svd.matrixU().transpose() * targets;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        coeffs[i] = i < rank ? coeffs[i] / sv[i] : 0.0;
    Vec w = svd.matrixV() * coeffs;
    const double residual = (design * w - targets).norm();
    if (residual > 1e-8 * smax * std::max(1.0, targets.norm())) {
        const double cond =
            smin > 0.0 ? (smax / smin) * (smax / smin)
                       : std::numeric_limits<double>::infinity();
        throw ill_conditioned_error(
            "lls::fit: design matrix rank deficient and system inconsistent", cond);
    }
    out.w = std::move(w);
    out.gram_condition = (smax / sv[rank - 1]) * (smax / sv[rank - 1]);
    return out;
}

LlsWeights fit(const WidenedDataset& train) {
    if (!train.targets)
        throw dimension_error("lls::fit: training set has no targets");
    return fit(train.design, *train.targets, train.user_index);
}

CVec predict(const LlsWeights& weights, const Mat& widened_detect) {
    if (widened_detect.cols() != weights.w.size())
        throw dimension_error("lls::predict: column count does not match weights");
    return narrow_predictions(widened_detect * weights.w);
}

} // namespace noma::lls
