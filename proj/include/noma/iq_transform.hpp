#pragma once

#include <optional>

#include "noma/types.hpp"

namespace noma {

/// Real-valued, symmetry-widened view of one complex phase. Rows come in
/// pairs: row 2t   = [Re(r(t)); Im(r(t))]
///        row 2t+1 = [Im(r(t)); -Re(r(t))]
/// Targets, when present, interleave Re(b(t)), Im(b(t)).
struct WidenedDataset {
    Mat design;          // 2N x 2M
    std::optional<Vec> targets; // 2N, absent for detection-phase data
    int user_index = 0;  // 1-based, 0 when targets absent
};

/// 2N x 2M widened design matrix from an N x M complex receive matrix.
Mat widen_design(const CMat& x);

/// Interleaved [Re b(1), Im b(1), ...] target vector.
Vec widen_targets(const CVec& y);

WidenedDataset widen_dataset(const CMat& x, const std::optional<CVec>& y = std::nullopt,
                             int user_index = 0);

/// Inverse pairing: output(t) = yhat(2t) + i*yhat(2t+1).
CVec narrow_predictions(const Vec& yhat);

} // namespace noma
