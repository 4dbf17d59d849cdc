#pragma once
// CART-style decision tree: Gini impurity, grown to purity (no depth cap by
// default), min-split 2, thresholds at midpoints between distinct consecutive
// values. Ties break toward the lowest feature index, then lowest threshold,
// so results are reproducible without any library.

#include <algorithm>
#include <vector>

#include "rctgan/errors.hpp"
#include "rctgan/grad/rng.hpp"
#include "rctgan/grad/tensor.hpp"

namespace rctgan {

struct DtParams {
    int min_split = 2;
    int max_depth = -1;          // -1 = grow to purity
    int features_per_split = -1;  // -1 = all (random forests pass sqrt(d))
};

class DecisionTree {
public:
    void fit(const Tensor2& x, const std::vector<int>& y, int n_classes,
             const DtParams& params = {}, Rng* feat_rng = nullptr) {
        if (x.rows() == 0 || x.rows() != static_cast<int>(y.size()))
            throw DataError("decision tree: empty or mismatched training data");
        n_classes_ = n_classes;
        bool single = true;
        for (int v : y)
            if (v != y[0]) single = false;
        if (single) throw DataError("decision tree: training set has a single class");
        nodes_.clear();
        std::vector<int> idx(x.rows());
        for (int i = 0; i < x.rows(); ++i) idx[i] = i;
        build(x, y, idx, 0, static_cast<int>(idx.size()), 0, params, feat_rng);
    }

    int predict_row(const double* row) const {
        int cur = 0;
        while (nodes_[cur].feat >= 0)
            cur = row[nodes_[cur].feat] <= nodes_[cur].thr ? nodes_[cur].left
                                                           : nodes_[cur].right;
        return nodes_[cur].label;
    }

    std::vector<int> predict(const Tensor2& x) const {
        std::vector<int> out(x.rows());
        for (int i = 0; i < x.rows(); ++i) out[i] = predict_row(x.row_ptr(i));
        return out;
    }

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        int feat = -1;  // -1 = leaf
        double thr = 0.0;
        int left = -1, right = -1;
        int label = 0;
    };

    static double gini_from_counts(const std::vector<int64_t>& counts, int64_t total) {
        if (total == 0) return 0.0;
        double g = 1.0;
        for (int64_t c : counts) {
            const double p = static_cast<double>(c) / static_cast<double>(total);
            g -= p * p;
        }
        return g;
    }

    // builds the subtree over idx[lo, hi) and returns its node id
    int build(const Tensor2& x, const std::vector<int>& y, std::vector<int>& idx, int lo,
              int hi, int depth, const DtParams& params, Rng* feat_rng) {
        const int n = hi - lo;
        std::vector<int64_t> counts(n_classes_, 0);
        for (int i = lo; i < hi; ++i) ++counts[y[idx[i]]];

        int majority = 0;
        for (int c = 1; c < n_classes_; ++c)
            if (counts[c] > counts[majority]) majority = c;  // tie -> lower id

        const double node_gini = gini_from_counts(counts, n);
        const bool pure = node_gini == 0.0;
        const bool depth_capped = params.max_depth >= 0 && depth >= params.max_depth;
        if (pure || n < params.min_split || depth_capped)
            return make_leaf(majority);

        // candidate features, ascending for the tie-break order
        std::vector<int> feats;
        if (params.features_per_split > 0 && params.features_per_split < x.cols()) {
            if (!feat_rng) throw DataError("decision tree: feature subsetting needs an rng");
            std::vector<int> all(x.cols());
            for (int f = 0; f < x.cols(); ++f) all[f] = f;
            for (int f = 0; f < params.features_per_split; ++f) {
                const int pick = f + feat_rng->uniform_int(x.cols() - f);
                std::swap(all[f], all[pick]);
            }
            feats.assign(all.begin(), all.begin() + params.features_per_split);
            std::sort(feats.begin(), feats.end());
        } else {
            feats.resize(x.cols());
            for (int f = 0; f < x.cols(); ++f) feats[f] = f;
        }

        int best_feat = -1;
        double best_thr = 0.0;
        double best_gain = 1e-12;  // require strictly positive gain
        std::vector<std::pair<double, int>> vals(n);
        std::vector<int64_t> left_counts(n_classes_);
        for (int f : feats) {
            for (int i = 0; i < n; ++i) vals[i] = {x(idx[lo + i], f), y[idx[lo + i]]};
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (vals.front().first == vals.back().first) continue;  // constant feature
            std::fill(left_counts.begin(), left_counts.end(), 0);
            int64_t nl = 0;
            for (int i = 0; i < n - 1; ++i) {
                ++left_counts[vals[i].second];
                ++nl;
                if (vals[i].first == vals[i + 1].first) continue;
                const int64_t nr = n - nl;
                double gl = 1.0, gr = 1.0;
                for (int c = 0; c < n_classes_; ++c) {
                    const double pl = static_cast<double>(left_counts[c]) / nl;
                    const double pr =
                        static_cast<double>(counts[c] - left_counts[c]) / nr;
                    gl -= pl * pl;
                    gr -= pr * pr;
                }
                const double gain =
                    node_gini - (static_cast<double>(nl) / n) * gl -
                    (static_cast<double>(nr) / n) * gr;
                if (gain > best_gain) {  // strict: first best wins the tie-break
                    best_gain = gain;
                    best_feat = f;
                    best_thr = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (best_feat < 0) return make_leaf(majority);

        // partition idx[lo,hi) by the chosen split
        const int mid = static_cast<int>(
            std::stable_partition(idx.begin() + lo, idx.begin() + hi,
                                  [&](int i) { return x(i, best_feat) <= best_thr; }) -
            idx.begin());
        if (mid == lo || mid == hi) return make_leaf(majority);

        const int self = static_cast<int>(nodes_.size());
        nodes_.push_back({best_feat, best_thr, -1, -1, majority});
        const int left = build(x, y, idx, lo, mid, depth + 1, params, feat_rng);
        const int right = build(x, y, idx, mid, hi, depth + 1, params, feat_rng);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }

    int make_leaf(int label) {
        nodes_.push_back({-1, 0.0, -1, -1, label});
        return static_cast<int>(nodes_.size()) - 1;
    }

    std::vector<Node> nodes_;
    int n_classes_ = 2;
};

}  // namespace rctgan
