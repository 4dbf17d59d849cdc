#pragma once
// Reverse-mode differentiation over Tensor2 values.
//
// A Tape records primitive ops in topological order (define-by-run). backward()
// seeds a scalar loss with gradient 1 and sweeps the nodes once in reverse,
// accumulating gradients into every node that requires them. The op set is the
// minimum the three GAN networks need, plus the pieces the unrolled critic
// input-gradient is built from (see net.hpp).

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rctgan/errors.hpp"
#include "rctgan/grad/rng.hpp"
#include "rctgan/grad/tensor.hpp"

namespace rctgan {

enum class Op : uint8_t {
    leaf,
    matmul,        // aux flags ta/tb
    add,           // same shape
    sub,
    mul,           // elementwise
    add_row,       // (n x d) + (1 x d)
    sub_row,       // (n x d) - (1 x d)
    mul_row,       // (n x d) * (1 x d)
    mul_col,       // (n x d) * (n x 1)
    scale,         // * constant k
    add_const,     // + constant k
    relu,
    leaky_relu,    // slope k
    tanh_act,
    softmax_rows,
    log_softmax_rows,
    log_clamped,   // ln(max(x, k))
    square,
    sqrt_elem,     // requires x >= 0
    rsqrt_eps,     // 1/sqrt(x + k)
    sum_all,       // -> 1x1
    mean_all,      // -> 1x1
    row_sum,       // -> n x 1
    col_sum,       // -> 1 x d
    col_mean,      // -> 1 x d
    concat_cols,   // variadic
    slice_cols,    // [off, off+width)
    reshape,       // same element count, row-major reinterpretation
    gather_rows,   // row subset by index list
    dropout_mask,  // mask sampled at record time, pre-scaled by 1/keep
    mask_mul,      // elementwise * constant tensor (no grad into the mask)
};

enum class TapeMode { training, inference };

class Tape;

// Lightweight node handle. Valid only while its tape is alive.
struct Value {
    Tape* tape = nullptr;
    int id = -1;
    bool valid() const { return tape != nullptr && id >= 0; }
    inline int rows() const;
    inline int cols() const;
};

class Tape {
public:
    explicit Tape(TapeMode mode = TapeMode::training) : mode_(mode) {}

    TapeMode mode() const { return mode_; }
    void set_mode(TapeMode m) { mode_ = m; }

    int size() const { return static_cast<int>(nodes_.size()); }

    const Tensor2& value(Value v) const { return node(v).value; }
    // Saved mask of a dropout/mask_mul node (used by the input-gradient unroll).
    const Tensor2& aux(Value v) const { return node(v).aux; }
    const Tensor2& grad(Value v) const {
        const Node& n = node(v);
        if (n.grad.empty() && !n.value.empty())
            throw std::logic_error("Tape::grad: no gradient computed for this node");
        return n.grad;
    }
    bool has_grad(Value v) const { return !node(v).grad.empty(); }
    double scalar(Value v) const {
        const Node& n = node(v);
        if (n.value.size() != 1) throw std::logic_error("Tape::scalar: node is not 1x1");
        return n.value(0, 0);
    }

    Value leaf(Tensor2 v, bool requires_grad = false) {
        Node n;
        n.op = Op::leaf;
        n.value = std::move(v);
        n.requires_grad = requires_grad;
        return push(std::move(n));
    }

    Value matmul(Value a, Value b, bool ta = false, bool tb = false) {
        Node n = binary(Op::matmul, a, b);
        n.ta = ta;
        n.tb = tb;
        n.value = rctgan::matmul(val(a), val(b), ta, tb);
        return push(std::move(n));
    }

    Value add(Value a, Value b) { return ewise(Op::add, a, b); }
    Value sub(Value a, Value b) { return ewise(Op::sub, a, b); }
    Value mul(Value a, Value b) { return ewise(Op::mul, a, b); }

    Value add_row(Value a, Value r) { return rowwise(Op::add_row, a, r); }
    Value sub_row(Value a, Value r) { return rowwise(Op::sub_row, a, r); }
    Value mul_row(Value a, Value r) { return rowwise(Op::mul_row, a, r); }

    Value mul_col(Value a, Value c) {
        const Tensor2& av = val(a);
        const Tensor2& cv = val(c);
        if (cv.cols() != 1 || cv.rows() != av.rows())
            throw std::invalid_argument("mul_col: column vector shape mismatch");
        Node n = binary(Op::mul_col, a, c);
        n.value = av;
        for (int i = 0; i < av.rows(); ++i) {
            double* row = n.value.row_ptr(i);
            const double s = cv(i, 0);
            for (int j = 0; j < av.cols(); ++j) row[j] *= s;
        }
        return push(std::move(n));
    }

    Value scale(Value a, double k) {
        Node n = unary(Op::scale, a);
        n.k = k;
        n.value = val(a);
        for (int i = 0; i < n.value.rows(); ++i) {
            double* row = n.value.row_ptr(i);
            for (int j = 0; j < n.value.cols(); ++j) row[j] *= k;
        }
        return push(std::move(n));
    }

    Value add_const(Value a, double k) {
        Node n = unary(Op::add_const, a);
        n.k = k;
        n.value = val(a);
        for (int i = 0; i < n.value.rows(); ++i) {
            double* row = n.value.row_ptr(i);
            for (int j = 0; j < n.value.cols(); ++j) row[j] += k;
        }
        return push(std::move(n));
    }

    Value relu(Value a) {
        Node n = unary(Op::relu, a);
        n.value = val(a);
        apply(n.value, [](double x) { return x > 0.0 ? x : 0.0; });
        return push(std::move(n));
    }

    Value leaky_relu(Value a, double alpha) {
        Node n = unary(Op::leaky_relu, a);
        n.k = alpha;
        n.value = val(a);
        apply(n.value, [alpha](double x) { return x > 0.0 ? x : alpha * x; });
        return push(std::move(n));
    }

    Value tanh_act(Value a) {
        Node n = unary(Op::tanh_act, a);
        n.value = val(a);
        apply(n.value, [](double x) { return std::tanh(x); });
        return push(std::move(n));
    }

    // Numerically stable row softmax; output rows sum to 1 and are positive.
    Value softmax_rows(Value a) {
        Node n = unary(Op::softmax_rows, a);
        n.value = val(a);
        for (int i = 0; i < n.value.rows(); ++i) {
            double* row = n.value.row_ptr(i);
            double mx = row[0];
            for (int j = 1; j < n.value.cols(); ++j) mx = std::max(mx, row[j]);
            double s = 0.0;
            for (int j = 0; j < n.value.cols(); ++j) {
                row[j] = std::exp(row[j] - mx);
                s += row[j];
            }
            for (int j = 0; j < n.value.cols(); ++j) row[j] /= s;
        }
        return push(std::move(n));
    }

    // Row-wise log(softmax); keeps gradients finite even for confidently wrong
    // predictions (unlike log(clamped softmax), whose floor zeroes them).
    Value log_softmax_rows(Value a) {
        Node n = unary(Op::log_softmax_rows, a);
        n.value = val(a);
        for (int i = 0; i < n.value.rows(); ++i) {
            double* row = n.value.row_ptr(i);
            double mx = row[0];
            for (int j = 1; j < n.value.cols(); ++j) mx = std::max(mx, row[j]);
            double s = 0.0;
            for (int j = 0; j < n.value.cols(); ++j) s += std::exp(row[j] - mx);
            const double lse = mx + std::log(s);
            for (int j = 0; j < n.value.cols(); ++j) row[j] -= lse;
        }
        return push(std::move(n));
    }

    Value log_clamped(Value a, double floor = 1e-12) {
        Node n = unary(Op::log_clamped, a);
        n.k = floor;
        n.value = val(a);
        apply(n.value, [floor](double x) { return std::log(x > floor ? x : floor); });
        return push(std::move(n));
    }

    Value square(Value a) {
        Node n = unary(Op::square, a);
        n.value = val(a);
        apply(n.value, [](double x) { return x * x; });
        return push(std::move(n));
    }

    Value sqrt_elem(Value a) {
        Node n = unary(Op::sqrt_elem, a);
        n.value = val(a);
        apply(n.value, [](double x) {
            if (x < 0.0) throw std::invalid_argument("sqrt_elem: negative input");
            return std::sqrt(x);
        });
        return push(std::move(n));
    }

    Value rsqrt_eps(Value a, double eps) {
        Node n = unary(Op::rsqrt_eps, a);
        n.k = eps;
        n.value = val(a);
        apply(n.value, [eps](double x) { return 1.0 / std::sqrt(x + eps); });
        return push(std::move(n));
    }

    Value sum_all(Value a) {
        Node n = unary(Op::sum_all, a);
        double s = 0.0;
        const Tensor2& av = val(a);
        for (int i = 0; i < av.rows(); ++i)
            for (int j = 0; j < av.cols(); ++j) s += av(i, j);
        n.value = Tensor2::scalar(s);
        return push(std::move(n));
    }

    Value mean_all(Value a) {
        const Tensor2& av = val(a);
        if (av.empty()) throw std::invalid_argument("mean_all: empty tensor");
        Node n = unary(Op::mean_all, a);
        double s = 0.0;
        for (int i = 0; i < av.rows(); ++i)
            for (int j = 0; j < av.cols(); ++j) s += av(i, j);
        n.value = Tensor2::scalar(s / static_cast<double>(av.size()));
        return push(std::move(n));
    }

    Value row_sum(Value a) {
        const Tensor2& av = val(a);
        Node n = unary(Op::row_sum, a);
        n.value = Tensor2(av.rows(), 1);
        for (int i = 0; i < av.rows(); ++i) {
            double s = 0.0;
            const double* row = av.row_ptr(i);
            for (int j = 0; j < av.cols(); ++j) s += row[j];
            n.value(i, 0) = s;
        }
        return push(std::move(n));
    }

    Value col_sum(Value a) { return col_reduce(Op::col_sum, a); }
    Value col_mean(Value a) { return col_reduce(Op::col_mean, a); }

    Value concat_cols(const std::vector<Value>& parts) {
        if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
        Node n;
        n.op = Op::concat_cols;
        int total = 0;
        const int rows = val(parts[0]).rows();
        for (Value p : parts) {
            const Tensor2& pv = val(p);
            if (pv.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
            total += pv.cols();
            n.ins.push_back(p.id);
            n.requires_grad = n.requires_grad || node_at(p.id).requires_grad;
        }
        n.value = Tensor2(rows, total);
        int off = 0;
        for (Value p : parts) {
            const Tensor2& pv = val(p);
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < pv.cols(); ++j) n.value(i, off + j) = pv(i, j);
            off += pv.cols();
        }
        return push(std::move(n));
    }

    Value slice_cols(Value a, int off, int width) {
        Node n = unary(Op::slice_cols, a);
        n.off = off;
        n.width = width;
        n.value = val(a).slice_cols(off, width);
        return push(std::move(n));
    }

    Value reshape(Value a, int rows, int cols) {
        const Tensor2& av = val(a);
        if (static_cast<int64_t>(rows) * cols != av.size())
            throw std::invalid_argument("reshape: element count mismatch");
        Node n = unary(Op::reshape, a);
        n.value = Tensor2(rows, cols);
        const double* src = av.data();
        double* dst = n.value.data();
        for (int64_t i = 0; i < av.size(); ++i) dst[i] = src[i];
        return push(std::move(n));
    }

    Value gather_rows(Value a, std::vector<int> idx) {
        const Tensor2& av = val(a);
        Node n = unary(Op::gather_rows, a);
        n.value = Tensor2(static_cast<int>(idx.size()), av.cols());
        for (size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0 || idx[i] >= av.rows())
                throw std::invalid_argument("gather_rows: index out of range");
            for (int j = 0; j < av.cols(); ++j)
                n.value(static_cast<int>(i), j) = av(idx[i], j);
        }
        n.rows_idx = std::move(idx);
        return push(std::move(n));
    }

    // Inverted dropout: zero with probability p, survivors scaled by 1/(1-p).
    // No-op (identity node) in inference mode.
    Value dropout(Value a, double p, Rng& rng) {
        if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p outside [0,1)");
        if (mode_ == TapeMode::inference || p == 0.0) return a;
        const Tensor2& av = val(a);
        Node n = unary(Op::dropout_mask, a);
        n.aux = Tensor2(av.rows(), av.cols());
        const double keep = 1.0 - p;
        for (int i = 0; i < av.rows(); ++i)
            for (int j = 0; j < av.cols(); ++j)
                n.aux(i, j) = rng.uniform() < p ? 0.0 : 1.0 / keep;
        n.value = av;
        for (int i = 0; i < av.rows(); ++i)
            for (int j = 0; j < av.cols(); ++j) n.value(i, j) *= n.aux(i, j);
        return push(std::move(n));
    }

    // Elementwise product with a constant tensor; gradient flows into `a` only.
    Value mask_mul(Value a, Tensor2 mask) {
        const Tensor2& av = val(a);
        if (!mask.same_shape(av)) throw std::invalid_argument("mask_mul: shape mismatch");
        Node n = unary(Op::mask_mul, a);
        n.value = av;
        for (int i = 0; i < av.rows(); ++i)
            for (int j = 0; j < av.cols(); ++j) n.value(i, j) *= mask(i, j);
        n.aux = std::move(mask);
        return push(std::move(n));
    }

    // Reverse sweep from a 1x1 loss node. Gradients of earlier backward() calls
    // are discarded; node values are left untouched so the tape stays inspectable.
    void backward(Value loss) {
        Node& ln = node(loss);
        if (ln.value.size() != 1)
            throw std::invalid_argument("backward: loss node is not scalar (1x1)");
        if (!ln.requires_grad)
            throw std::invalid_argument("backward: loss does not depend on any grad-enabled leaf");
        for (Node& n : nodes_) n.grad = Tensor2();
        ln.grad = Tensor2::scalar(1.0);
        for (int id = loss.id; id >= 0; --id) {
            Node& n = nodes_[id];
            if (n.grad.empty() || n.op == Op::leaf) continue;
            backprop(n);
        }
    }

private:
    struct Node {
        Op op = Op::leaf;
        std::array<int, 2> in{-1, -1};
        std::vector<int> ins;       // concat only
        std::vector<int> rows_idx;  // gather_rows only
        Tensor2 value;
        Tensor2 grad;
        Tensor2 aux;  // dropout / mask_mul mask
        double k = 0.0;
        int off = 0, width = 0;
        bool ta = false, tb = false;
        bool requires_grad = false;
    };

    Node& node(Value v) {
        check(v);
        return nodes_[v.id];
    }
    const Node& node(Value v) const {
        check(v);
        return nodes_[v.id];
    }
    Node& node_at(int id) { return nodes_[id]; }
    const Tensor2& val(Value v) const { return node(v).value; }

    void check(Value v) const {
        if (v.tape != this || v.id < 0 || v.id >= size())
            throw std::logic_error("Value does not belong to this tape");
    }

    Value push(Node n) {
        if (!n.value.all_finite())
            throw TrainingDiverged("non-finite values produced by op " +
                                   std::to_string(static_cast<int>(n.op)));
        nodes_.push_back(std::move(n));
        return Value{this, size() - 1};
    }

    Node unary(Op op, Value a) {
        Node n;
        n.op = op;
        n.in[0] = a.id;
        n.requires_grad = node(a).requires_grad;
        return n;
    }

    Node binary(Op op, Value a, Value b) {
        Node n;
        n.op = op;
        n.in[0] = a.id;
        n.in[1] = b.id;
        n.requires_grad = node(a).requires_grad || node(b).requires_grad;
        return n;
    }

    Value ewise(Op op, Value a, Value b) {
        const Tensor2& av = val(a);
        const Tensor2& bv = val(b);
        if (!av.same_shape(bv))
            throw std::invalid_argument("elementwise op: shape mismatch " + av.shape_str() +
                                        " vs " + bv.shape_str());
        Node n = binary(op, a, b);
        n.value = av;
        for (int i = 0; i < av.rows(); ++i) {
            double* row = n.value.row_ptr(i);
            const double* brow = bv.row_ptr(i);
            for (int j = 0; j < av.cols(); ++j) {
                switch (op) {
                    case Op::add: row[j] += brow[j]; break;
                    case Op::sub: row[j] -= brow[j]; break;
                    default: row[j] *= brow[j]; break;
                }
            }
        }
        return push(std::move(n));
    }

    Value rowwise(Op op, Value a, Value r) {
        const Tensor2& av = val(a);
        const Tensor2& rv = val(r);
        if (rv.rows() != 1 || rv.cols() != av.cols())
            throw std::invalid_argument("row-broadcast op: expected 1x" +
                                        std::to_string(av.cols()) + ", got " + rv.shape_str());
        Node n = binary(op, a, r);
        n.value = av;
        const double* brow = rv.row_ptr(0);
        for (int i = 0; i < av.rows(); ++i) {
            double* row = n.value.row_ptr(i);
            for (int j = 0; j < av.cols(); ++j) {
                switch (op) {
                    case Op::add_row: row[j] += brow[j]; break;
                    case Op::sub_row: row[j] -= brow[j]; break;
                    default: row[j] *= brow[j]; break;
                }
            }
        }
        return push(std::move(n));
    }

    Value col_reduce(Op op, Value a) {
        const Tensor2& av = val(a);
        if (av.rows() == 0) throw std::invalid_argument("column reduce: empty tensor");
        Node n = unary(op, a);
        n.value = Tensor2(1, av.cols());
        for (int i = 0; i < av.rows(); ++i) {
            const double* row = av.row_ptr(i);
            for (int j = 0; j < av.cols(); ++j) n.value(0, j) += row[j];
        }
        if (op == Op::col_mean) {
            for (int j = 0; j < av.cols(); ++j) n.value(0, j) /= av.rows();
        }
        return push(std::move(n));
    }

    template <class F>
    static void apply(Tensor2& t, F f) {
        for (int i = 0; i < t.rows(); ++i) {
            double* row = t.row_ptr(i);
            for (int j = 0; j < t.cols(); ++j) row[j] = f(row[j]);
        }
    }

    void accum(int id, const Tensor2& g) {
        if (id < 0) return;
        Node& n = nodes_[id];
        if (!n.requires_grad) return;
        if (n.grad.empty()) {
            n.grad = g;
            return;
        }
        for (int i = 0; i < g.rows(); ++i) {
            double* dst = n.grad.row_ptr(i);
            const double* src = g.row_ptr(i);
            for (int j = 0; j < g.cols(); ++j) dst[j] += src[j];
        }
    }

    void backprop(Node& n) {
        const Tensor2& g = n.grad;
        switch (n.op) {
            case Op::leaf:
                break;
            case Op::matmul: {
                const Tensor2& a = nodes_[n.in[0]].value;
                const Tensor2& b = nodes_[n.in[1]].value;
                if (nodes_[n.in[0]].requires_grad) {
                    Tensor2 da;
                    if (!n.ta && !n.tb) da = rctgan::matmul(g, b, false, true);
                    else if (!n.ta && n.tb) da = rctgan::matmul(g, b, false, false);
                    else if (n.ta && !n.tb) da = rctgan::matmul(b, g, false, true);
                    else da = rctgan::matmul(b, g, true, true);
                    accum(n.in[0], da);
                }
                if (nodes_[n.in[1]].requires_grad) {
                    Tensor2 db;
                    if (!n.ta && !n.tb) db = rctgan::matmul(a, g, true, false);
                    else if (!n.ta && n.tb) db = rctgan::matmul(g, a, true, false);
                    else if (n.ta && !n.tb) db = rctgan::matmul(a, g, false, false);
                    else db = rctgan::matmul(g, a, true, true);
                    accum(n.in[1], db);
                }
                break;
            }
            case Op::add:
                accum(n.in[0], g);
                accum(n.in[1], g);
                break;
            case Op::sub: {
                accum(n.in[0], g);
                if (nodes_[n.in[1]].requires_grad) {
                    Tensor2 neg = g;
                    apply(neg, [](double x) { return -x; });
                    accum(n.in[1], neg);
                }
                break;
            }
            case Op::mul: {
                const Tensor2& a = nodes_[n.in[0]].value;
                const Tensor2& b = nodes_[n.in[1]].value;
                if (nodes_[n.in[0]].requires_grad) accum(n.in[0], ewise_product(g, b));
                if (nodes_[n.in[1]].requires_grad) accum(n.in[1], ewise_product(g, a));
                break;
            }
            case Op::add_row:
            case Op::sub_row: {
                accum(n.in[0], g);
                if (nodes_[n.in[1]].requires_grad) {
                    Tensor2 dr(1, g.cols());
                    for (int i = 0; i < g.rows(); ++i)
                        for (int j = 0; j < g.cols(); ++j) dr(0, j) += g(i, j);
                    if (n.op == Op::sub_row)
                        apply(dr, [](double x) { return -x; });
                    accum(n.in[1], dr);
                }
                break;
            }
            case Op::mul_row: {
                const Tensor2& a = nodes_[n.in[0]].value;
                const Tensor2& r = nodes_[n.in[1]].value;
                if (nodes_[n.in[0]].requires_grad) {
                    Tensor2 da = g;
                    for (int i = 0; i < da.rows(); ++i)
                        for (int j = 0; j < da.cols(); ++j) da(i, j) *= r(0, j);
                    accum(n.in[0], da);
                }
                if (nodes_[n.in[1]].requires_grad) {
                    Tensor2 dr(1, g.cols());
                    for (int i = 0; i < g.rows(); ++i)
                        for (int j = 0; j < g.cols(); ++j) dr(0, j) += g(i, j) * a(i, j);
                    accum(n.in[1], dr);
                }
                break;
            }
            case Op::mul_col: {
                const Tensor2& a = nodes_[n.in[0]].value;
                const Tensor2& c = nodes_[n.in[1]].value;
                if (nodes_[n.in[0]].requires_grad) {
                    Tensor2 da = g;
                    for (int i = 0; i < da.rows(); ++i) {
                        const double s = c(i, 0);
                        for (int j = 0; j < da.cols(); ++j) da(i, j) *= s;
                    }
                    accum(n.in[0], da);
                }
                if (nodes_[n.in[1]].requires_grad) {
                    Tensor2 dc(g.rows(), 1);
                    for (int i = 0; i < g.rows(); ++i) {
                        double s = 0.0;
                        for (int j = 0; j < g.cols(); ++j) s += g(i, j) * a(i, j);
                        dc(i, 0) = s;
                    }
                    accum(n.in[1], dc);
                }
                break;
            }
            case Op::scale: {
                Tensor2 da = g;
                const double k = n.k;
                apply(da, [k](double x) { return k * x; });
                accum(n.in[0], da);
                break;
            }
            case Op::add_const:
                accum(n.in[0], g);
                break;
            case Op::relu: {
                const Tensor2& a = nodes_[n.in[0]].value;
                Tensor2 da = g;
                for (int i = 0; i < da.rows(); ++i)
                    for (int j = 0; j < da.cols(); ++j)
                        if (a(i, j) <= 0.0) da(i, j) = 0.0;
                accum(n.in[0], da);
                break;
            }
            case Op::leaky_relu: {
                const Tensor2& a = nodes_[n.in[0]].value;
                Tensor2 da = g;
                for (int i = 0; i < da.rows(); ++i)
                    for (int j = 0; j < da.cols(); ++j)
                        if (a(i, j) <= 0.0) da(i, j) *= n.k;
                accum(n.in[0], da);
                break;
            }
            case Op::tanh_act: {
                Tensor2 da = g;
                for (int i = 0; i < da.rows(); ++i)
                    for (int j = 0; j < da.cols(); ++j)
                        da(i, j) *= 1.0 - n.value(i, j) * n.value(i, j);
                accum(n.in[0], da);
                break;
            }
            case Op::softmax_rows: {
                // dz = y * (g - rowsum(g * y))
                Tensor2 da(g.rows(), g.cols());
                for (int i = 0; i < g.rows(); ++i) {
                    double dot = 0.0;
                    for (int j = 0; j < g.cols(); ++j) dot += g(i, j) * n.value(i, j);
                    for (int j = 0; j < g.cols(); ++j)
                        da(i, j) = n.value(i, j) * (g(i, j) - dot);
                }
                accum(n.in[0], da);
                break;
            }
            case Op::log_softmax_rows: {
                // dz = g - softmax * rowsum(g), softmax = exp(saved output)
                Tensor2 da(g.rows(), g.cols());
                for (int i = 0; i < g.rows(); ++i) {
                    double gsum = 0.0;
                    for (int j = 0; j < g.cols(); ++j) gsum += g(i, j);
                    for (int j = 0; j < g.cols(); ++j)
                        da(i, j) = g(i, j) - std::exp(n.value(i, j)) * gsum;
                }
                accum(n.in[0], da);
                break;
            }
            case Op::log_clamped: {
                const Tensor2& a = nodes_[n.in[0]].value;
                Tensor2 da = g;
                for (int i = 0; i < da.rows(); ++i)
                    for (int j = 0; j < da.cols(); ++j)
                        da(i, j) = a(i, j) > n.k ? da(i, j) / a(i, j) : 0.0;
                accum(n.in[0], da);
                break;
            }
            case Op::square: {
                const Tensor2& a = nodes_[n.in[0]].value;
                Tensor2 da = g;
                for (int i = 0; i < da.rows(); ++i)
                    for (int j = 0; j < da.cols(); ++j) da(i, j) *= 2.0 * a(i, j);
                accum(n.in[0], da);
                break;
            }
            case Op::sqrt_elem: {
                Tensor2 da = g;
                for (int i = 0; i < da.rows(); ++i)
                    for (int j = 0; j < da.cols(); ++j)
                        da(i, j) /= 2.0 * std::max(n.value(i, j), 1e-150);
                accum(n.in[0], da);
                break;
            }
            case Op::rsqrt_eps: {
                Tensor2 da = g;
                for (int i = 0; i < da.rows(); ++i)
                    for (int j = 0; j < da.cols(); ++j) {
                        const double y = n.value(i, j);
                        da(i, j) *= -0.5 * y * y * y;
                    }
                accum(n.in[0], da);
                break;
            }
            case Op::sum_all: {
                const Tensor2& a = nodes_[n.in[0]].value;
                accum(n.in[0], Tensor2(a.rows(), a.cols(), g(0, 0)));
                break;
            }
            case Op::mean_all: {
                const Tensor2& a = nodes_[n.in[0]].value;
                accum(n.in[0], Tensor2(a.rows(), a.cols(),
                                       g(0, 0) / static_cast<double>(a.size())));
                break;
            }
            case Op::row_sum: {
                const Tensor2& a = nodes_[n.in[0]].value;
                Tensor2 da(a.rows(), a.cols());
                for (int i = 0; i < a.rows(); ++i)
                    for (int j = 0; j < a.cols(); ++j) da(i, j) = g(i, 0);
                accum(n.in[0], da);
                break;
            }
            case Op::col_sum:
            case Op::col_mean: {
                const Tensor2& a = nodes_[n.in[0]].value;
                const double inv = n.op == Op::col_mean ? 1.0 / a.rows() : 1.0;
                Tensor2 da(a.rows(), a.cols());
                for (int i = 0; i < a.rows(); ++i)
                    for (int j = 0; j < a.cols(); ++j) da(i, j) = g(0, j) * inv;
                accum(n.in[0], da);
                break;
            }
            case Op::concat_cols: {
                int off = 0;
                for (int id : n.ins) {
                    const Tensor2& p = nodes_[id].value;
                    if (nodes_[id].requires_grad) accum(id, g.slice_cols(off, p.cols()));
                    off += p.cols();
                }
                break;
            }
            case Op::slice_cols: {
                const Tensor2& a = nodes_[n.in[0]].value;
                Tensor2 da(a.rows(), a.cols());
                for (int i = 0; i < g.rows(); ++i)
                    for (int j = 0; j < g.cols(); ++j) da(i, n.off + j) = g(i, j);
                accum(n.in[0], da);
                break;
            }
            case Op::reshape: {
                const Tensor2& a = nodes_[n.in[0]].value;
                Tensor2 da(a.rows(), a.cols());
                const double* src = g.data();
                double* dst = da.data();
                for (int64_t i = 0; i < a.size(); ++i) dst[i] = src[i];
                accum(n.in[0], da);
                break;
            }
            case Op::gather_rows: {
                const Tensor2& a = nodes_[n.in[0]].value;
                Tensor2 da(a.rows(), a.cols());
                for (size_t i = 0; i < n.rows_idx.size(); ++i)
                    for (int j = 0; j < g.cols(); ++j)
                        da(n.rows_idx[i], j) += g(static_cast<int>(i), j);
                accum(n.in[0], da);
                break;
            }
            case Op::dropout_mask:
            case Op::mask_mul:
                accum(n.in[0], ewise_product(g, n.aux));
                break;
        }
    }

    static Tensor2 ewise_product(const Tensor2& a, const Tensor2& b) {
        Tensor2 out = a;
        for (int i = 0; i < out.rows(); ++i)
            for (int j = 0; j < out.cols(); ++j) out(i, j) *= b(i, j);
        return out;
    }

    TapeMode mode_;
    std::vector<Node> nodes_;
};

inline int Value::rows() const { return tape->value(*this).rows(); }
inline int Value::cols() const { return tape->value(*this).cols(); }

}  // namespace rctgan
