#pragma once
// Shared test helpers: the central finite-difference oracle and tolerance
// comparisons. The oracle re-evaluates a scalar loss with one entry nudged,
// independent of the tape's backward pass.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rctgan/grad/rng.hpp"
#include "rctgan/grad/tape.hpp"
#include "rctgan/grad/tensor.hpp"

namespace testutil {

inline double rel_err(double a, double b) {
    const double m = std::max(std::abs(a), std::abs(b));
    if (m == 0.0) return 0.0;
    return std::abs(a - b) / m;
}

// |a-b| <= rtol*max(|a|,|b|) + atol
inline bool close(double a, double b, double rtol = 1e-4, double atol = 1e-9) {
    return std::abs(a - b) <= rtol * std::max(std::abs(a), std::abs(b)) + atol;
}

// Central finite difference of `loss` w.r.t. entry (r,c) of `t`, restoring it.
inline double fd_entry(const std::function<double()>& loss, rctgan::Tensor2& t, int r, int c,
                       double h = 1e-5) {
    const double orig = t(r, c);
    t(r, c) = orig + h;
    const double fp = loss();
    t(r, c) = orig - h;
    const double fm = loss();
    t(r, c) = orig;
    return (fp - fm) / (2.0 * h);
}

inline rctgan::Tensor2 random_tensor(rctgan::Rng& rng, int r, int c, double lo = -2.0,
                                     double hi = 2.0, double avoid_below = 0.0) {
    rctgan::Tensor2 t(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            double v = rng.uniform(lo, hi);
            while (avoid_below > 0.0 && std::abs(v) < avoid_below) v = rng.uniform(lo, hi);
            t(i, j) = v;
        }
    return t;
}

// Checks d(sum(op_output * R))/d(input entries) against central finite
// differences for an op built by `build` over the given leaf inputs. Returns
// any failures as strings so callers can assert/print as they like.
inline std::vector<std::string> op_grad_failures(
    const std::string& name,
    const std::function<rctgan::Value(rctgan::Tape&, std::vector<rctgan::Value>&)>& build,
    std::vector<rctgan::Tensor2> inputs, double rtol = 1e-4) {
    using namespace rctgan;
    Rng rng(99);
    Tensor2 weight;
    {
        Tape t;
        std::vector<Value> vals;
        for (auto& in : inputs) vals.push_back(t.leaf(in, true));
        Value out = build(t, vals);
        weight = random_tensor(rng, out.rows(), out.cols(), 0.2, 1.7);
    }
    auto run = [&](bool want_grads) {
        Tape t;
        std::vector<Value> vals;
        for (auto& in : inputs) vals.push_back(t.leaf(in, true));
        Value out = build(t, vals);
        Value loss = t.sum_all(t.mask_mul(out, weight));
        if (want_grads) t.backward(loss);
        std::vector<Tensor2> grads;
        if (want_grads)
            for (Value v : vals)
                grads.push_back(t.has_grad(v) ? t.grad(v) : Tensor2(v.rows(), v.cols()));
        return std::make_pair(t.scalar(loss), grads);
    };
    std::vector<std::string> failures;
    auto grads = run(true).second;
    for (size_t k = 0; k < inputs.size(); ++k)
        for (int i = 0; i < inputs[k].rows(); ++i)
            for (int j = 0; j < inputs[k].cols(); ++j) {
                const double fd = fd_entry([&] { return run(false).first; }, inputs[k], i, j);
                if (!close(grads[k](i, j), fd, rtol, 1e-8))
                    failures.push_back(name + " input " + std::to_string(k) + " (" +
                                       std::to_string(i) + "," + std::to_string(j) +
                                       "): ad=" + std::to_string(grads[k](i, j)) +
                                       " fd=" + std::to_string(fd));
            }
    return failures;
}

// Every registered op exercised once; shared by the unit and acceptance suites.
inline std::vector<std::string> all_op_grad_failures() {
    using namespace rctgan;
    std::vector<std::string> failures;
    auto check = [&](const std::string& name, auto&& build, std::vector<Tensor2> inputs) {
        auto f = op_grad_failures(name, build, std::move(inputs));
        failures.insert(failures.end(), f.begin(), f.end());
    };
    Rng rng(1);
    for (int mode = 0; mode < 4; ++mode) {
        const bool ta = mode & 1, tb = mode & 2;
        Tensor2 a = ta ? random_tensor(rng, 4, 3) : random_tensor(rng, 3, 4);
        Tensor2 b = tb ? random_tensor(rng, 2, 4) : random_tensor(rng, 4, 2);
        check("matmul" + std::to_string(mode),
              [ta, tb](Tape& t, std::vector<Value>& v) { return t.matmul(v[0], v[1], ta, tb); },
              {a, b});
    }
    Tensor2 a = random_tensor(rng, 3, 4);
    Tensor2 b = random_tensor(rng, 3, 4);
    Tensor2 r = random_tensor(rng, 1, 4);
    Tensor2 c = random_tensor(rng, 3, 1);
    Tensor2 nz = random_tensor(rng, 3, 4, -2.0, 2.0, 0.05);
    Tensor2 pos = random_tensor(rng, 3, 4, 0.1, 3.0);
    check("add", [](Tape& t, auto& v) { return t.add(v[0], v[1]); }, {a, b});
    check("sub", [](Tape& t, auto& v) { return t.sub(v[0], v[1]); }, {a, b});
    check("mul", [](Tape& t, auto& v) { return t.mul(v[0], v[1]); }, {a, b});
    check("add_row", [](Tape& t, auto& v) { return t.add_row(v[0], v[1]); }, {a, r});
    check("sub_row", [](Tape& t, auto& v) { return t.sub_row(v[0], v[1]); }, {a, r});
    check("mul_row", [](Tape& t, auto& v) { return t.mul_row(v[0], v[1]); }, {a, r});
    check("mul_col", [](Tape& t, auto& v) { return t.mul_col(v[0], v[1]); }, {a, c});
    check("scale", [](Tape& t, auto& v) { return t.scale(v[0], -1.7); }, {a});
    check("add_const", [](Tape& t, auto& v) { return t.add_const(v[0], 0.3); }, {a});
    check("relu", [](Tape& t, auto& v) { return t.relu(v[0]); }, {nz});
    check("leaky_relu", [](Tape& t, auto& v) { return t.leaky_relu(v[0], 0.2); }, {nz});
    check("tanh", [](Tape& t, auto& v) { return t.tanh_act(v[0]); }, {nz});
    check("softmax", [](Tape& t, auto& v) { return t.softmax_rows(v[0]); }, {nz});
    check("log_softmax", [](Tape& t, auto& v) { return t.log_softmax_rows(v[0]); }, {nz});
    check("log_clamped", [](Tape& t, auto& v) { return t.log_clamped(v[0]); }, {pos});
    check("square", [](Tape& t, auto& v) { return t.square(v[0]); }, {a});
    check("sqrt", [](Tape& t, auto& v) { return t.sqrt_elem(v[0]); }, {pos});
    check("rsqrt", [](Tape& t, auto& v) { return t.rsqrt_eps(v[0], 1e-5); }, {pos});
    check("sum_all", [](Tape& t, auto& v) { return t.sum_all(v[0]); }, {a});
    check("mean_all", [](Tape& t, auto& v) { return t.mean_all(v[0]); }, {a});
    check("row_sum", [](Tape& t, auto& v) { return t.row_sum(v[0]); }, {a});
    check("col_sum", [](Tape& t, auto& v) { return t.col_sum(v[0]); }, {a});
    check("col_mean", [](Tape& t, auto& v) { return t.col_mean(v[0]); }, {a});
    check("concat", [](Tape& t, auto& v) { return t.concat_cols({v[0], v[1]}); },
          {a, random_tensor(rng, 3, 2)});
    check("slice", [](Tape& t, auto& v) { return t.slice_cols(v[0], 1, 2); }, {a});
    check("reshape", [](Tape& t, auto& v) { return t.reshape(v[0], 2, 6); }, {a});
    check("gather", [](Tape& t, auto& v) { return t.gather_rows(v[0], {2, 0, 2}); }, {a});
    check("dropout",
          [](Tape& t, auto& v) {
              Rng mask_rng(77);
              return t.dropout(v[0], 0.4, mask_rng);
          },
          {random_tensor(rng, 4, 5)});
    check("mask_mul",
          [](Tape& t, auto& v) { return t.mask_mul(v[0], Tensor2(3, 4, 0.5)); }, {a});
    return failures;
}

}  // namespace testutil
