#pragma once
// Downstream MLP classifier built on the grad engine: three layers
// (hidden 128, 64 by default), ReLU, softmax output, Adam at lr 2e-4,
// fixed epoch budget, standardized inputs.

#include <vector>

#include "rctgan/gan/losses.hpp"
#include "rctgan/grad/net.hpp"

namespace rctgan {

struct MlpParams {
    std::vector<int> hidden = {128, 64};
    double lr = 2e-4;
    int epochs = 100;
    int batch = 128;
};

class MlpClassifier {
public:
    void fit(const Tensor2& x, const std::vector<int>& y, int n_classes,
             const MlpParams& params, Rng rng) {
        if (x.rows() == 0 || x.rows() != static_cast<int>(y.size()))
            throw DataError("mlp: empty or mismatched training data");
        n_classes_ = n_classes;
        standardize_from(x);

        std::vector<LayerSpec> layers;
        int cur = x.cols();
        for (int h : params.hidden) {
            layers.push_back(linear_layer(cur, h));
            layers.push_back(relu_layer(h));
            cur = h;
        }
        layers.push_back(linear_layer(cur, n_classes));
        layers.push_back(softmax_layer(n_classes));
        net_ = make_network("mlp", x.cols(), std::move(layers));
        params_ = ParamSet();
        init_params(net_, params_, rng);

        Tensor2 xs = standardized(x);
        const AdamConfig adam{params.lr};
        std::vector<int> order(x.rows());
        for (int i = 0; i < x.rows(); ++i) order[i] = i;
        for (int e = 0; e < params.epochs; ++e) {
            for (int i = x.rows() - 1; i > 0; --i)
                std::swap(order[i], order[rng.uniform_int(i + 1)]);
            for (int start = 0; start < x.rows(); start += params.batch) {
                const int bs = std::min(params.batch, x.rows() - start);
                Tensor2 xb(bs, x.cols());
                Tensor2 target(bs, n_classes);
                for (int i = 0; i < bs; ++i) {
                    const int id = order[start + i];
                    for (int j = 0; j < x.cols(); ++j) xb(i, j) = xs(id, j);
                    target(i, y[id]) = 1.0;
                }
                Tape t(TapeMode::training);
                BoundNet b = bind(net_, params_, t, true);
                ForwardTrace tr = forward(b, t.leaf(std::move(xb)));
                Value loss = loss_c(t, tr.output, target);
                t.backward(loss);
                params_.adam_step(collect_grads(b), adam);
            }
        }
    }

    std::vector<int> predict(const Tensor2& x) {
        Tape t(TapeMode::inference);
        BoundNet b = bind(net_, params_, t, false);
        ForwardTrace tr = forward(b, t.leaf(standardized(x)));
        const Tensor2& probs = t.value(tr.output);
        std::vector<int> out(x.rows());
        for (int i = 0; i < x.rows(); ++i) {
            int best = 0;
            for (int c = 1; c < n_classes_; ++c)
                if (probs(i, c) > probs(i, best)) best = c;
            out[i] = best;
        }
        return out;
    }

    const ParamSet& weights() const { return params_; }

private:
    void standardize_from(const Tensor2& x) {
        mean_.assign(x.cols(), 0.0);
        sd_.assign(x.cols(), 0.0);
        for (int i = 0; i < x.rows(); ++i)
            for (int j = 0; j < x.cols(); ++j) mean_[j] += x(i, j);
        for (double& v : mean_) v /= x.rows();
        for (int i = 0; i < x.rows(); ++i)
            for (int j = 0; j < x.cols(); ++j) {
                const double d = x(i, j) - mean_[j];
                sd_[j] += d * d;
            }
        for (double& v : sd_) v = std::max(std::sqrt(v / x.rows()), 1e-9);
    }

    Tensor2 standardized(const Tensor2& x) const {
        Tensor2 out(x.rows(), x.cols());
        for (int i = 0; i < x.rows(); ++i)
            for (int j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean_[j]) / sd_[j];
        return out;
    }

    Network net_;
    ParamSet params_;
    std::vector<double> mean_, sd_;
    int n_classes_ = 2;
};

}  // namespace rctgan
