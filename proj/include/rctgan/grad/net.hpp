#pragma once
// Layer specifications, parameter init/binding, the network forward pass, and
// the unrolled input-gradient construction used by the WGAN gradient penalty.
//
// The `concat` layer realizes the residual-concat block: its output is the
// current activation concatenated onto the activation at the start of the
// current segment (the previous concat output, or the network input). That is
// the only topology the three networks need, so forward stays a linear chain.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rctgan/grad/adam.hpp"
#include "rctgan/grad/rng.hpp"
#include "rctgan/grad/tape.hpp"

namespace rctgan {

enum class LayerKind : uint8_t {
    linear,
    batchnorm1d,
    relu,
    leaky_relu,
    dropout,
    softmax,
    tanh_act,
    concat,
};

struct LayerSpec {
    LayerKind kind;
    int in_dim = 0;
    int out_dim = 0;
    double alpha = 0.0;  // leaky_relu slope
    double p = 0.0;      // dropout rate
};

inline LayerSpec linear_layer(int in, int out) { return {LayerKind::linear, in, out}; }
inline LayerSpec batchnorm_layer(int d) { return {LayerKind::batchnorm1d, d, d}; }
inline LayerSpec relu_layer(int d) { return {LayerKind::relu, d, d}; }
inline LayerSpec leaky_relu_layer(int d, double alpha) {
    return {LayerKind::leaky_relu, d, d, alpha};
}
inline LayerSpec dropout_layer(int d, double p) { return {LayerKind::dropout, d, d, 0.0, p}; }
inline LayerSpec softmax_layer(int d) { return {LayerKind::softmax, d, d}; }
inline LayerSpec tanh_layer(int d) { return {LayerKind::tanh_act, d, d}; }
// skip = width of the segment start being re-concatenated, branch = current width
inline LayerSpec concat_layer(int skip, int branch) {
    return {LayerKind::concat, branch, skip + branch};
}

struct Network {
    std::string name;  // parameter block prefix
    int input_dim = 0;
    std::vector<LayerSpec> layers;
    int output_dim = 0;
};

// Validates that dimensions chain consistently (including concat segments).
inline Network make_network(std::string name, int input_dim, std::vector<LayerSpec> layers) {
    if (layers.empty()) throw std::invalid_argument("make_network: no layers");
    int cur = input_dim;
    int seg = input_dim;
    for (size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        if (l.in_dim != cur)
            throw std::invalid_argument("make_network: layer " + std::to_string(i) +
                                        " expects in_dim " + std::to_string(l.in_dim) +
                                        " but chain is at " + std::to_string(cur));
        switch (l.kind) {
            case LayerKind::linear:
                cur = l.out_dim;
                break;
            case LayerKind::concat:
                if (l.out_dim != seg + cur)
                    throw std::invalid_argument("make_network: concat out_dim mismatch");
                cur = l.out_dim;
                seg = cur;
                break;
            case LayerKind::leaky_relu:
                if (!(l.alpha > 0.0 && l.alpha < 1.0))
                    throw std::invalid_argument("make_network: leaky slope outside (0,1)");
                break;
            case LayerKind::dropout:
                if (!(l.p > 0.0 && l.p < 1.0))
                    throw std::invalid_argument("make_network: dropout rate outside (0,1)");
                break;
            default:
                break;
        }
        if (l.kind != LayerKind::linear && l.kind != LayerKind::concat && l.out_dim != l.in_dim)
            throw std::invalid_argument("make_network: shape-preserving layer changed width");
    }
    Network net;
    net.name = std::move(name);
    net.input_dim = input_dim;
    net.layers = std::move(layers);
    net.output_dim = cur;
    return net;
}

namespace blockname {
inline std::string of(const Network& n, size_t layer, const char* part) {
    return n.name + ".l" + std::to_string(layer) + "." + part;
}
}  // namespace blockname

// Linear weights ~ U(-sqrt(1/in), sqrt(1/in)), biases zero; BN gamma=1 beta=0
// with running stats (mean 0, var 1) stored as non-trainable buffers.
inline void init_params(const Network& net, ParamSet& params, Rng& rng) {
    for (size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        if (l.kind == LayerKind::linear) {
            const double bound = std::sqrt(1.0 / l.in_dim);
            params.add(blockname::of(net, i, "w"),
                       rng.uniform_matrix(l.out_dim, l.in_dim, -bound, bound));
            params.add(blockname::of(net, i, "b"), Tensor2(1, l.out_dim));
        } else if (l.kind == LayerKind::batchnorm1d) {
            params.add(blockname::of(net, i, "gamma"), Tensor2(1, l.in_dim, 1.0));
            params.add(blockname::of(net, i, "beta"), Tensor2(1, l.in_dim));
            params.add(blockname::of(net, i, "rmean"), Tensor2(1, l.in_dim), false);
            params.add(blockname::of(net, i, "rvar"), Tensor2(1, l.in_dim, 1.0), false);
        }
    }
}

struct BoundLayer {
    Value w, b;        // linear
    Value gamma, beta;  // batchnorm
};

// A network's parameters materialized as leaves on one tape.
struct BoundNet {
    const Network* net = nullptr;
    ParamSet* params = nullptr;
    Tape* tape = nullptr;
    bool trainable = false;
    std::vector<BoundLayer> layers;
    std::vector<std::pair<std::string, Value>> bound;  // every bound block

    Value leaf_of(const std::string& name, bool req) {
        Value v = tape->leaf(params->at(name), req);
        bound.emplace_back(name, v);
        return v;
    }
};

inline BoundNet bind(const Network& net, ParamSet& params, Tape& tape, bool trainable) {
    BoundNet b;
    b.net = &net;
    b.params = &params;
    b.tape = &tape;
    b.trainable = trainable;
    b.layers.resize(net.layers.size());
    for (size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        if (l.kind == LayerKind::linear) {
            b.layers[i].w = b.leaf_of(blockname::of(net, i, "w"), trainable);
            b.layers[i].b = b.leaf_of(blockname::of(net, i, "b"), trainable);
        } else if (l.kind == LayerKind::batchnorm1d) {
            b.layers[i].gamma = b.leaf_of(blockname::of(net, i, "gamma"), trainable);
            b.layers[i].beta = b.leaf_of(blockname::of(net, i, "beta"), trainable);
        }
    }
    return b;
}

struct LayerTrace {
    Value in, out;
    Value bn_xhat, bn_rstd;  // batchnorm internals (rstd is a const leaf at inference)
    int seg_pos = -1;        // concat: trace index whose OUTPUT is the segment start
    bool identity = false;   // dropout at inference: out == in, no node added
};

struct ForwardTrace {
    Value input, output;
    std::vector<LayerTrace> layers;
};

constexpr double kBatchNormEps = 1e-5;
constexpr double kBatchNormMomentum = 0.9;

// Runs the network on `x`, recording everything on the bound tape. Training
// mode uses batch statistics (and updates the running buffers); inference mode
// uses the stored running statistics and disables dropout. `rng` is required
// only when the net contains dropout layers in training mode.
inline ForwardTrace forward(BoundNet& b, Value x, Rng* rng = nullptr) {
    const Network& net = *b.net;
    Tape& t = *b.tape;
    if (x.cols() != net.input_dim)
        throw std::invalid_argument("forward: input width " + std::to_string(x.cols()) +
                                    " does not match net input dim " +
                                    std::to_string(net.input_dim));
    ForwardTrace tr;
    tr.input = x;
    tr.layers.reserve(net.layers.size());
    Value cur = x;
    int seg_pos = -1;  // trace index whose output starts the current segment
    for (size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        LayerTrace lt;
        lt.in = cur;
        switch (l.kind) {
            case LayerKind::linear:
                cur = t.add_row(t.matmul(cur, b.layers[i].w, false, true), b.layers[i].b);
                break;
            case LayerKind::batchnorm1d: {
                if (t.mode() == TapeMode::training) {
                    Value mu = t.col_mean(cur);
                    Value xc = t.sub_row(cur, mu);
                    Value var = t.col_mean(t.square(xc));
                    Value rstd = t.rsqrt_eps(var, kBatchNormEps);
                    Value xhat = t.mul_row(xc, rstd);
                    cur = t.add_row(t.mul_row(xhat, b.layers[i].gamma), b.layers[i].beta);
                    lt.bn_xhat = xhat;
                    lt.bn_rstd = rstd;
                    Tensor2& rm = b.params->at(blockname::of(net, i, "rmean"));
                    Tensor2& rv = b.params->at(blockname::of(net, i, "rvar"));
                    const Tensor2& muv = t.value(mu);
                    const Tensor2& varv = t.value(var);
                    for (int j = 0; j < rm.cols(); ++j) {
                        rm(0, j) = kBatchNormMomentum * rm(0, j) +
                                   (1.0 - kBatchNormMomentum) * muv(0, j);
                        rv(0, j) = kBatchNormMomentum * rv(0, j) +
                                   (1.0 - kBatchNormMomentum) * varv(0, j);
                    }
                } else {
                    const Tensor2& rm = b.params->at(blockname::of(net, i, "rmean"));
                    const Tensor2& rv = b.params->at(blockname::of(net, i, "rvar"));
                    Tensor2 rstd_v(1, rv.cols());
                    for (int j = 0; j < rv.cols(); ++j)
                        rstd_v(0, j) = 1.0 / std::sqrt(rv(0, j) + kBatchNormEps);
                    Value rm_leaf = t.leaf(rm);
                    Value rstd = t.leaf(std::move(rstd_v));
                    Value xhat = t.mul_row(t.sub_row(cur, rm_leaf), rstd);
                    cur = t.add_row(t.mul_row(xhat, b.layers[i].gamma), b.layers[i].beta);
                    lt.bn_xhat = xhat;
                    lt.bn_rstd = rstd;
                }
                break;
            }
            case LayerKind::relu:
                cur = t.relu(cur);
                break;
            case LayerKind::leaky_relu:
                cur = t.leaky_relu(cur, l.alpha);
                break;
            case LayerKind::dropout:
                if (t.mode() == TapeMode::training) {
                    if (!rng)
                        throw std::invalid_argument("forward: dropout needs an rng in training");
                    cur = t.dropout(cur, l.p, *rng);
                } else {
                    lt.identity = true;
                }
                break;
            case LayerKind::softmax:
                cur = t.softmax_rows(cur);
                break;
            case LayerKind::tanh_act:
                cur = t.tanh_act(cur);
                break;
            case LayerKind::concat: {
                Value seg = seg_pos < 0 ? tr.input : tr.layers[seg_pos].out;
                cur = t.concat_cols({seg, cur});
                lt.seg_pos = seg_pos;
                seg_pos = static_cast<int>(i);
                break;
            }
        }
        lt.out = cur;
        tr.layers.push_back(lt);
    }
    tr.output = cur;
    if (!t.value(cur).all_finite())
        throw TrainingDiverged("forward: non-finite network output");
    return tr;
}

namespace detail {
inline Tensor2 step_mask(const Tensor2& z, double neg_slope) {
    Tensor2 m(z.rows(), z.cols());
    for (int i = 0; i < z.rows(); ++i)
        for (int j = 0; j < z.cols(); ++j) m(i, j) = z(i, j) > 0.0 ? 1.0 : neg_slope;
    return m;
}
}  // namespace detail

// Builds d(sum of outputs)/d(input) for a scalar-output network as new nodes
// ON the tape, layer by layer in reverse. Because every piece is an ordinary
// differentiable primitive, a penalty computed from the result contributes
// second-order terms to the parameter gradients on the next backward().
// Activation masks (ReLU/LeakyReLU/dropout) enter as constants — their own
// derivative is zero almost everywhere.
inline Value input_gradient_graph(BoundNet& b, const ForwardTrace& tr) {
    const Network& net = *b.net;
    Tape& t = *b.tape;
    if (tr.output.cols() != 1)
        throw std::invalid_argument("input_gradient_graph: network output must be 1 per row");
    const int n = tr.output.rows();
    const int L = static_cast<int>(net.layers.size());

    std::optional<Value> adj_input;
    std::vector<std::optional<Value>> adj(L);
    auto add_to = [&](int pos, Value v) {
        std::optional<Value>& slot = pos < 0 ? adj_input : adj[pos];
        slot = slot.has_value() ? t.add(*slot, v) : v;
    };

    adj[L - 1] = t.leaf(Tensor2(n, 1, 1.0));
    for (int i = L - 1; i >= 0; --i) {
        if (!adj[i].has_value())
            throw std::logic_error("input_gradient_graph: disconnected layer chain");
        Value g = *adj[i];
        const LayerSpec& l = net.layers[i];
        const LayerTrace& lt = tr.layers[i];
        switch (l.kind) {
            case LayerKind::linear:
                add_to(i - 1, t.matmul(g, b.layers[i].w));
                break;
            case LayerKind::batchnorm1d: {
                Value gy = t.mul_row(g, b.layers[i].gamma);
                if (t.mode() == TapeMode::training) {
                    // dz = rstd * (gy - mean(gy) - xhat * mean(gy*xhat)), means over the batch
                    Value m1 = t.col_mean(gy);
                    Value m2 = t.col_mean(t.mul(gy, lt.bn_xhat));
                    Value dz = t.mul_row(t.sub(t.sub_row(gy, m1), t.mul_row(lt.bn_xhat, m2)),
                                         lt.bn_rstd);
                    add_to(i - 1, dz);
                } else {
                    add_to(i - 1, t.mul_row(gy, lt.bn_rstd));
                }
                break;
            }
            case LayerKind::relu:
                add_to(i - 1, t.mask_mul(g, detail::step_mask(t.value(lt.in), 0.0)));
                break;
            case LayerKind::leaky_relu:
                add_to(i - 1, t.mask_mul(g, detail::step_mask(t.value(lt.in), l.alpha)));
                break;
            case LayerKind::tanh_act: {
                Value dydz = t.add_const(t.scale(t.square(lt.out), -1.0), 1.0);
                add_to(i - 1, t.mul(g, dydz));
                break;
            }
            case LayerKind::dropout:
                if (lt.identity) add_to(i - 1, g);
                else add_to(i - 1, t.mask_mul(g, t.aux(lt.out)));
                break;
            case LayerKind::concat: {
                const int skip_w = l.out_dim - l.in_dim;
                add_to(lt.seg_pos, t.slice_cols(g, 0, skip_w));
                add_to(i - 1, t.slice_cols(g, skip_w, l.in_dim));
                break;
            }
            case LayerKind::softmax:
                throw std::invalid_argument(
                    "input_gradient_graph: no input-gradient construction for softmax");
        }
    }
    if (!adj_input.has_value())
        throw std::logic_error("input_gradient_graph: input unreachable");
    return *adj_input;
}

// Gradients of all bound blocks after backward(); blocks untouched by the loss
// report zeros of their own shape.
inline GradMap collect_grads(const BoundNet& b) {
    GradMap out;
    for (const auto& [name, v] : b.bound) {
        if (b.tape->has_grad(v)) {
            out[name] = b.tape->grad(v);
        } else {
            const Tensor2& val = b.tape->value(v);
            out[name] = Tensor2(val.rows(), val.cols());
        }
    }
    return out;
}

}  // namespace rctgan
