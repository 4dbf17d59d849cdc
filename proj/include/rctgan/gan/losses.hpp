#pragma once
// The four training losses and the WGAN gradient penalty.

#include "rctgan/grad/net.hpp"
#include "rctgan/grad/tape.hpp"

namespace rctgan {

// Generator adversarial loss: -mean of the critic's per-pack fake scores.
inline Value loss_g(Tape& t, Value fake_scores) {
    if (fake_scores.rows() == 0) throw std::invalid_argument("loss_g: empty scores");
    return t.scale(t.mean_all(fake_scores), -1.0);
}

// Critic Wasserstein loss: -(mean(real) - mean(fake)). The gradient penalty is
// added separately by the training step.
inline Value loss_d(Tape& t, Value real_scores, Value fake_scores) {
    if (real_scores.rows() == 0 || fake_scores.rows() == 0)
        throw std::invalid_argument("loss_d: empty scores");
    return t.sub(t.mean_all(fake_scores), t.mean_all(real_scores));
}

// Multi-class cross entropy: mean over rows of -sum(target * log(pred)),
// log clamped at 1e-12. `pred` rows must already be distributions.
inline Value loss_c(Tape& t, Value pred, const Tensor2& target_onehot) {
    if (!t.value(pred).same_shape(target_onehot))
        throw std::invalid_argument("loss_c: prediction/target shape mismatch");
    if (target_onehot.rows() == 0) throw std::invalid_argument("loss_c: empty batch");
    Value picked = t.row_sum(t.mask_mul(t.log_clamped(pred, 1e-12), target_onehot));
    return t.scale(t.mean_all(picked), -1.0);
}

// Cross entropy straight from logits (log-softmax). Used for the generator's
// class and conditional-consistency terms, where the prediction starts out
// confidently wrong and a clamped log would zero the gradient.
inline Value ce_from_logits(Tape& t, Value logits, const Tensor2& target_onehot) {
    if (!t.value(logits).same_shape(target_onehot))
        throw std::invalid_argument("ce_from_logits: shape mismatch");
    Value picked = t.row_sum(t.mask_mul(t.log_softmax_rows(logits), target_onehot));
    return t.scale(t.mean_all(picked), -1.0);
}

// Combined critic-side objective (reported value).
inline double loss_total(double d_value, double c_value) {
    if (!std::isfinite(d_value) || !std::isfinite(c_value))
        throw TrainingDiverged("loss_total: non-finite input");
    return d_value + c_value;
}

// WGAN-GP: interpolate real/fake packs with per-pack u ~ U(0,1), build the
// critic's input gradient as tape nodes, and penalize its deviation from unit
// norm. The result participates in backward(), so critic parameter gradients
// pick up the second-order term.
inline Value gradient_penalty(Tape& t, BoundNet& critic, const Tensor2& real_packed,
                              const Tensor2& fake_packed, double lambda, Rng& rng) {
    if (!real_packed.same_shape(fake_packed))
        throw std::invalid_argument("gradient_penalty: pack shape mismatch");
    Tensor2 xhat(real_packed.rows(), real_packed.cols());
    for (int i = 0; i < xhat.rows(); ++i) {
        const double u = rng.uniform();
        const double* rp = real_packed.row_ptr(i);
        const double* fp = fake_packed.row_ptr(i);
        double* xp = xhat.row_ptr(i);
        for (int j = 0; j < xhat.cols(); ++j) xp[j] = u * rp[j] + (1.0 - u) * fp[j];
    }
    ForwardTrace tr = forward(critic, t.leaf(std::move(xhat)));
    Value grad = input_gradient_graph(critic, tr);
    Value norm = t.sqrt_elem(t.add_const(t.row_sum(t.square(grad)), 1e-12));
    return t.scale(t.mean_all(t.square(t.add_const(norm, -1.0))), lambda);
}

}  // namespace rctgan
