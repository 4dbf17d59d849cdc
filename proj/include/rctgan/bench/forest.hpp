#pragma once
// Random forest: bootstrap-bagged CART trees, sqrt(d) features considered per
// split, majority vote with ties resolved toward the lower class id.

#include <cmath>
#include <vector>

#include "rctgan/bench/tree.hpp"

namespace rctgan {

struct RfParams {
    int n_trees = 45;
    bool bootstrap = true;
    DtParams tree;  // features_per_split < 0 means sqrt(d)
};

class RandomForest {
public:
    void fit(const Tensor2& x, const std::vector<int>& y, int n_classes,
             const RfParams& params, Rng rng) {
        n_classes_ = n_classes;
        trees_.assign(params.n_trees, {});
        DtParams tp = params.tree;
        if (tp.features_per_split < 0)
            tp.features_per_split =
                std::max(1, static_cast<int>(std::ceil(std::sqrt(x.cols()))));
        for (int t = 0; t < params.n_trees; ++t) {
            Rng tree_rng = rng.split(t);
            if (params.bootstrap) {
                std::vector<int> boot(x.rows());
                for (int i = 0; i < x.rows(); ++i) boot[i] = tree_rng.uniform_int(x.rows());
                Tensor2 xb(x.rows(), x.cols());
                std::vector<int> yb(x.rows());
                for (int i = 0; i < x.rows(); ++i) {
                    for (int j = 0; j < x.cols(); ++j) xb(i, j) = x(boot[i], j);
                    yb[i] = y[boot[i]];
                }
                trees_[t].fit(xb, yb, n_classes, tp, &tree_rng);
            } else {
                trees_[t].fit(x, y, n_classes, tp, &tree_rng);
            }
        }
    }

    int predict_row(const double* row) const {
        std::vector<int> votes(n_classes_, 0);
        for (const auto& t : trees_) ++votes[t.predict_row(row)];
        int best = 0;
        for (int c = 1; c < n_classes_; ++c)
            if (votes[c] > votes[best]) best = c;  // tie -> lower class id
        return best;
    }

    std::vector<int> predict(const Tensor2& x) const {
        std::vector<int> out(x.rows());
        for (int i = 0; i < x.rows(); ++i) out[i] = predict_row(x.row_ptr(i));
        return out;
    }

private:
    std::vector<DecisionTree> trees_;
    int n_classes_ = 2;
};

}  // namespace rctgan
