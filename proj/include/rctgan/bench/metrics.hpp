#pragma once
// Confusion counts and the G-mean metric.

#include <cmath>
#include <cstdint>
#include <vector>

#include "rctgan/errors.hpp"

namespace rctgan {

struct ConfusionMatrix {
    int64_t tp = 0, fn = 0, fp = 0, tn = 0;
};

// sqrt( TPR * TNR ). Requires both classes present in the test set.
inline double g_mean(const ConfusionMatrix& c) {
    if (c.tp < 0 || c.fn < 0 || c.fp < 0 || c.tn < 0)
        throw DataError("g_mean: negative count");
    if (c.tp + c.fn <= 0) throw DataError("g_mean: no positive samples in test set");
    if (c.tn + c.fp <= 0) throw DataError("g_mean: no negative samples in test set");
    const double tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    const double tnr = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    return std::sqrt(tpr * tnr);
}

inline ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                                 int positive) {
    if (truth.size() != pred.size()) throw DataError("confusion: size mismatch");
    ConfusionMatrix c;
    for (size_t i = 0; i < truth.size(); ++i) {
        const bool actual_pos = truth[i] == positive;
        const bool pred_pos = pred[i] == positive;
        if (actual_pos && pred_pos) ++c.tp;
        else if (actual_pos) ++c.fn;
        else if (pred_pos) ++c.fp;
        else ++c.tn;
    }
    return c;
}

}  // namespace rctgan
