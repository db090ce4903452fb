#include "noma/iq_transform.hpp"

#include "noma/errors.hpp"

namespace noma {

Mat widen_design(const CMat& x) {
    if (x.rows() == 0 || x.cols() == 0)
        throw dimension_error("widen_design: empty input");
    const Eigen::Index n = x.rows();
    const Eigen::Index m = x.cols();
    Mat out(2 * n, 2 * m);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double re = x(t, j).real();
            const double im = x(t, j).imag();
            out(2 * t, j) = re;
            out(2 * t, m + j) = im;
            out(2 * t + 1, j) = im;
            out(2 * t + 1, m + j) = -re;
        }
    }
    return out;
}

Vec widen_targets(const CVec& y) {
    Vec out(2 * y.size());
    for (Eigen::Index t = 0; t < y.size(); ++t) {
        out[2 * t] = y[t].real();
        out[2 * t + 1] = y[t].imag();
    }
    return out;
}

WidenedDataset widen_dataset(const CMat& x, const std::optional<CVec>& y, int user_index) {
    WidenedDataset ds;
    ds.design = widen_design(x);
    if (y) {
        if (y->size() != x.rows())
            throw dimension_error("widen_dataset: target length does not match rows");
        ds.targets = widen_targets(*y);
        ds.user_index = user_index;
    }
    return ds;
}

CVec narrow_predictions(const Vec& yhat) {
    if (yhat.size() % 2 != 0)
        throw dimension_error("narrow_predictions: length must be even");
    CVec out(yhat.size() / 2);
    for (Eigen::Index t = 0; t < out.size(); ++t)
        out[t] = cplx(yhat[2 * t], yhat[2 * t + 1]);
    return out;
}

} // namespace noma
