#pragma once
// Named parameter blocks with per-block Adam state. One ParamSet per network,
// so the three GAN optimizers are independent and each keeps its own step count.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rctgan/grad/tensor.hpp"

namespace rctgan {

// name -> gradient; ordered so updates are deterministic.
using GradMap = std::map<std::string, Tensor2>;

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class ParamSet {
public:
    struct Block {
        std::string name;
        Tensor2 value;
        bool trainable = true;
        Tensor2 m, v;  // Adam moments, allocated for trainable blocks
    };

    Tensor2& add(const std::string& name, Tensor2 init, bool trainable = true) {
        if (index_.count(name)) throw std::invalid_argument("ParamSet: duplicate block " + name);
        Block b;
        b.name = name;
        b.trainable = trainable;
        if (trainable) {
            b.m = Tensor2(init.rows(), init.cols());
            b.v = Tensor2(init.rows(), init.cols());
        }
        b.value = std::move(init);
        index_[name] = blocks_.size();
        blocks_.push_back(std::move(b));
        return blocks_.back().value;
    }

    bool has(const std::string& name) const { return index_.count(name) > 0; }

    Tensor2& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::invalid_argument("ParamSet: no block " + name);
        return blocks_[it->second].value;
    }
    const Tensor2& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::invalid_argument("ParamSet: no block " + name);
        return blocks_[it->second].value;
    }

    const std::vector<Block>& blocks() const { return blocks_; }
    std::vector<Block>& blocks() { return blocks_; }
    size_t size() const { return blocks_.size(); }
    int64_t step_count() const { return step_; }

    // Standard Adam with bias correction. Blocks without a gradient entry keep
    // their moments untouched; t advances once per call.
    void adam_step(const GradMap& grads, const AdamConfig& cfg) {
        ++step_;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
        for (Block& b : blocks_) {
            if (!b.trainable) continue;
            auto it = grads.find(b.name);
            if (it == grads.end()) continue;
            const Tensor2& g = it->second;
            if (!g.same_shape(b.value))
                throw std::invalid_argument("adam_step: gradient shape " + g.shape_str() +
                                            " does not match block " + b.name + " " +
                                            b.value.shape_str());
            for (int i = 0; i < g.rows(); ++i) {
                double* pv = b.value.row_ptr(i);
                double* pm = b.m.row_ptr(i);
                double* pvv = b.v.row_ptr(i);
                const double* pg = g.row_ptr(i);
                for (int j = 0; j < g.cols(); ++j) {
                    pm[j] = cfg.beta1 * pm[j] + (1.0 - cfg.beta1) * pg[j];
                    pvv[j] = cfg.beta2 * pvv[j] + (1.0 - cfg.beta2) * pg[j] * pg[j];
                    const double mhat = pm[j] / bc1;
                    const double vhat = pvv[j] / bc2;
                    pv[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
                }
            }
        }
    }

private:
    std::vector<Block> blocks_;
    std::unordered_map<std::string, size_t> index_;
    int64_t step_ = 0;
};

}  // namespace rctgan
