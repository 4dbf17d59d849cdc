#pragma once
// The three network architectures, PacGAN packing, and the generator's
// per-slice output activations (tanh on alphas, Gumbel-softmax on one-hots).

#include <string>
#include <vector>

#include "rctgan/codec/encode.hpp"
#include "rctgan/codec/schema.hpp"
#include "rctgan/gan/config.hpp"
#include "rctgan/grad/net.hpp"

namespace rctgan {

// Generator: input (noise + cond) -> residual-concat blocks -> linear to
// encoded width. With noise 128, cond 2, width 256 the chain is
// 130 -> 386 -> 642 -> 69.
inline Network build_generator(const TableSchema& schema, const CondSpace& cond,
                               const GanConfig& cfg) {
    const int in = cfg.noise_dim + cond.width;
    std::vector<LayerSpec> layers;
    int cur = in;
    int seg = in;
    for (int b = 0; b < cfg.gen_blocks; ++b) {
        layers.push_back(linear_layer(cur, cfg.gen_width));
        layers.push_back(batchnorm_layer(cfg.gen_width));
        layers.push_back(relu_layer(cfg.gen_width));
        layers.push_back(concat_layer(seg, cfg.gen_width));
        cur = seg + cfg.gen_width;
        seg = cur;
    }
    layers.push_back(linear_layer(cur, schema.encoded_width()));
    return make_network("g", in, std::move(layers));
}

// Critic: input pac*(encoded+cond) -> residual blocks -> scalar. With per-row
// width 71 and pac 10 the chain is 710 -> 966 -> 1222 -> 1. The ctgan/ablation
// toggle drops the concat skip (plain 710 -> 256 -> 256 -> 1).
inline Network build_critic(const TableSchema& schema, const CondSpace& cond,
                            const GanConfig& cfg) {
    const int in = cfg.pac * (schema.encoded_width() + cond.width);
    std::vector<LayerSpec> layers;
    int cur = in;
    int seg = in;
    for (int b = 0; b < cfg.critic_blocks; ++b) {
        layers.push_back(linear_layer(cur, cfg.critic_width));
        layers.push_back(batchnorm_layer(cfg.critic_width));
        layers.push_back(relu_layer(cfg.critic_width));
        if (cfg.residual_critic()) {
            layers.push_back(concat_layer(seg, cfg.critic_width));
            cur = seg + cfg.critic_width;
            seg = cur;
        } else {
            cur = cfg.critic_width;
            seg = cur;
        }
    }
    layers.push_back(linear_layer(cur, 1));
    return make_network("d", in, std::move(layers));
}

// Classifier: one *unpacked* encoded row in, N+1 softmax out (real target
// categories plus the synthetic class appended last).
inline Network build_classifier(const TableSchema& schema, const GanConfig& cfg) {
    const int n_real = static_cast<int>(schema.columns[schema.target_index()].categories.size());
    std::vector<LayerSpec> layers;
    int cur = schema.encoded_width();
    for (int h : cfg.clf_hidden) {
        layers.push_back(linear_layer(cur, h));
        layers.push_back(leaky_relu_layer(h, cfg.clf_leaky));
        layers.push_back(dropout_layer(h, cfg.clf_dropout));
        cur = h;
    }
    layers.push_back(linear_layer(cur, n_real + 1));
    layers.push_back(softmax_layer(n_real + 1));
    return make_network("c", schema.encoded_width(), std::move(layers));
}

// Feature-wise concatenation of consecutive groups of `pac` rows. Row-major
// data makes this a pure reshape.
inline Tensor2 pack(const Tensor2& rows, int pac) {
    if (pac <= 0) throw std::invalid_argument("pack: pac must be positive");
    if (rows.rows() % pac != 0)
        throw std::invalid_argument("pack: row count " + std::to_string(rows.rows()) +
                                    " not divisible by pac " + std::to_string(pac));
    Tensor2 out(rows.rows() / pac, rows.cols() * pac);
    const double* src = rows.data();
    double* dst = out.data();
    for (int64_t i = 0; i < rows.size(); ++i) dst[i] = src[i];
    return out;
}

inline Value pack(Tape& t, Value rows, int pac) {
    if (pac <= 0) throw std::invalid_argument("pack: pac must be positive");
    if (rows.rows() % pac != 0)
        throw std::invalid_argument("pack: row count not divisible by pac");
    return t.reshape(rows, rows.rows() / pac, rows.cols() * pac);
}

// Applies the per-slice output activations to a raw generator output already
// on the tape: tanh on alpha slices, Gumbel-softmax (temperature tau) on
// one-hot slices. Differentiable; noise enters as a constant.
inline Value apply_output_activations(Tape& t, Value raw, const TableSchema& schema,
                                      double tau, Rng& rng) {
    std::vector<Value> parts;
    for (const Span& sp : schema.spans()) {
        Value slice = t.slice_cols(raw, sp.offset, sp.width);
        if (sp.role == SpanRole::alpha) {
            parts.push_back(t.tanh_act(slice));
        } else {
            Tensor2 gnoise(slice.rows(), sp.width);
            for (int i = 0; i < gnoise.rows(); ++i)
                for (int j = 0; j < sp.width; ++j) gnoise(i, j) = rng.gumbel();
            Value noisy = t.add(slice, t.leaf(std::move(gnoise)));
            parts.push_back(t.softmax_rows(t.scale(noisy, 1.0 / tau)));
        }
    }
    return t.concat_cols(parts);
}

// Snaps every one-hot slice of generated data to exact one-hots (argmax).
inline void harden_onehots(Tensor2& data, const TableSchema& schema) {
    for (const Span& sp : schema.spans()) {
        if (sp.role == SpanRole::alpha) continue;
        for (int r = 0; r < data.rows(); ++r) {
            int best = 0;
            for (int j = 1; j < sp.width; ++j)
                if (data(r, sp.offset + j) > data(r, sp.offset + best)) best = j;
            for (int j = 0; j < sp.width; ++j)
                data(r, sp.offset + j) = j == best ? 1.0 : 0.0;
        }
    }
}

}  // namespace rctgan
