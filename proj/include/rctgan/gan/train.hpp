#pragma once
// The alternating training loop: critic step (Wasserstein + gradient penalty
// on packed batches), classifier step (real classes + synthetic class), and
// generator step (adversarial + class CE toward the conditioned class +
// conditional consistency). Plus fit/sample and checkpoint conversion.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rctgan/codec/encode.hpp"
#include "rctgan/codec/schema.hpp"
#include "rctgan/gan/checkpoint.hpp"
#include "rctgan/gan/config.hpp"
#include "rctgan/gan/losses.hpp"
#include "rctgan/gan/networks.hpp"

namespace rctgan {

struct StepMetrics {
    double loss_d = 0.0;
    double loss_c = 0.0;
    double loss_g = 0.0;
    double gp = 0.0;
};

using StepHook = std::function<void(int step, const StepMetrics&)>;

struct GanModel {
    TableSchema schema;
    GanConfig cfg;
    CondSpace cond;
    Network gen, critic;
    std::optional<Network> clf;
    ParamSet gen_params, critic_params, clf_params;
    ParamSet gen_ema;  // sampling weights: EMA over generator steps
    uint64_t seed = 0;

    ParamSet& sampling_params() { return cfg.gen_ema ? gen_ema : gen_params; }
};

inline GanModel init_gan(const TableSchema& schema, const GanConfig& cfg, uint64_t seed) {
    cfg.validate();
    GanModel m;
    m.schema = schema;
    m.cfg = cfg;
    m.seed = seed;
    m.cond = CondSpace::from(schema);
    if (m.cond.width == 0) throw DataError("init_gan: schema has no discrete columns");
    m.gen = build_generator(schema, m.cond, cfg);
    m.critic = build_critic(schema, m.cond, cfg);
    Rng rng = Rng(seed).split(0xA11);
    init_params(m.gen, m.gen_params, rng);
    init_params(m.critic, m.critic_params, rng);
    if (cfg.classifier_enabled()) {
        m.clf = build_classifier(schema, cfg);
        init_params(*m.clf, m.clf_params, rng);
    }
    m.gen_ema = m.gen_params;
    return m;
}

// Training-ready view of the real data: encoded once up front, with the
// condition-matching row index.
struct TrainData {
    EncodedMatrix enc;
    CondSpace cond;
    MatchIndex match;
    std::vector<int> target_cat;  // per row, category id of the target column

    static TrainData prepare(const Table& rows, const TableSchema& schema, Rng& rng) {
        TrainData d;
        d.enc = encode(rows, schema, rng);
        d.cond = CondSpace::from(schema);
        d.match = MatchIndex::build(rows, schema, d.cond);
        const int tcol = schema.target_index();
        const int table_col = rows.require_col(schema.columns[tcol].name);
        d.target_cat.reserve(rows.n_rows());
        for (const auto& row : rows.rows)
            d.target_cat.push_back(schema.columns[tcol].cat_index(str(row[table_col])));
        return d;
    }
};

namespace train_detail {

struct CondBatch {
    std::vector<CondVector> conds;
    Tensor2 onehot;  // batch x cond width
};

inline CondBatch sample_cond_batch(const TableSchema& schema, const CondSpace& cs, int n,
                                   Rng& rng) {
    CondBatch b;
    b.conds.reserve(n);
    for (int i = 0; i < n; ++i) b.conds.push_back(sample_condition(schema, rng));
    b.onehot = cs.onehot_rows(b.conds);
    return b;
}

inline Tensor2 gather_rows(const Tensor2& src, const std::vector<int>& ids) {
    Tensor2 out(static_cast<int>(ids.size()), src.cols());
    for (size_t i = 0; i < ids.size(); ++i) {
        const double* s = src.row_ptr(ids[i]);
        double* d = out.row_ptr(static_cast<int>(i));
        for (int j = 0; j < src.cols(); ++j) d[j] = s[j];
    }
    return out;
}

inline Tensor2 onehot_rows(const std::vector<int>& labels, int n_classes) {
    Tensor2 t(static_cast<int>(labels.size()), n_classes);
    for (size_t i = 0; i < labels.size(); ++i) t(static_cast<int>(i), labels[i]) = 1.0;
    return t;
}

// 1 x encoded_width mask that zeroes the target column's own one-hot slice.
// Classifier inputs are multiplied by this so the class is judged from the
// feature slices, never read off the label slice (which the generator could
// otherwise set to win the class game without learning class features).
inline Tensor2 target_slice_mask(const TableSchema& schema) {
    Tensor2 mask(1, schema.encoded_width(), 1.0);
    const int tcol = schema.target_index();
    for (const Span& sp : schema.spans())
        if (sp.col == tcol)
            for (int j = 0; j < sp.width; ++j) mask(0, sp.offset + j) = 0.0;
    return mask;
}

// Straight-through hardening: value = one-hots snapped to argmax, gradient =
// identity into the soft activations. Real rows carry exact one-hots, so
// without this the classifier would detect fakes from softness alone and its
// guidance would push the generator toward saturation instead of features.
inline Value straight_through_hard(Tape& t, Value soft, const TableSchema& schema) {
    Tensor2 delta = t.value(soft);
    harden_onehots(delta, schema);
    const Tensor2& sv = t.value(soft);
    for (int i = 0; i < delta.rows(); ++i)
        for (int j = 0; j < delta.cols(); ++j) delta(i, j) -= sv(i, j);
    return t.add(soft, t.leaf(std::move(delta)));
}

struct GenPass {
    Value raw;  // final linear output (per-slice logits / pre-tanh alphas)
    Value act;  // after tanh / Gumbel-softmax
    BoundNet bound;
};

// Generator forward + output activations on the given tape.
inline GenPass generator_pass(Tape& t, GanModel& m, const Tensor2& noise_and_cond,
                              bool trainable, Rng& rng, ParamSet* params = nullptr) {
    GenPass gp;
    gp.bound = bind(m.gen, params ? *params : m.gen_params, t, trainable);
    ForwardTrace tr = forward(gp.bound, t.leaf(noise_and_cond), &rng);
    gp.raw = tr.output;
    gp.act = apply_output_activations(t, tr.output, m.schema, m.cfg.gumbel_tau, rng);
    return gp;
}

}  // namespace train_detail

// One alternating step: (a) critic, (b) classifier (rctgan mode), (c) generator.
inline StepMetrics train_step(GanModel& m, const TrainData& data, Rng& rng) {
    using namespace train_detail;
    const GanConfig& cfg = m.cfg;
    const int B = cfg.batch_size;
    const AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2};
    StepMetrics out;

    // ---- (a) critic ----
    {
        CondBatch cb = sample_cond_batch(m.schema, m.cond, B, rng);
        std::vector<int> row_ids(B);
        for (int i = 0; i < B; ++i) row_ids[i] = data.match.draw(data.cond, cb.conds[i], rng);
        Tensor2 real_rows = gather_rows(data.enc.data, row_ids);

        Tensor2 zc = hstack(rng.normal_matrix(B, cfg.noise_dim), cb.onehot);
        Tensor2 fake_rows;
        {
            Tape gt(TapeMode::training);
            GenPass gp = generator_pass(gt, m, zc, false, rng);
            fake_rows = gt.value(gp.act);  // detached
        }

        Tape dt(TapeMode::training);
        BoundNet db = bind(m.critic, m.critic_params, dt, true);
        Tensor2 real_packed = pack(hstack(real_rows, cb.onehot), cfg.pac);
        Tensor2 fake_packed = pack(hstack(fake_rows, cb.onehot), cfg.pac);
        Value sr = forward(db, dt.leaf(real_packed)).output;
        Value sf = forward(db, dt.leaf(fake_packed)).output;
        Value ld = loss_d(dt, sr, sf);
        Value gp = gradient_penalty(dt, db, real_packed, fake_packed, cfg.gp_lambda, rng);
        Value dloss = dt.add(ld, gp);
        dt.backward(dloss);
        m.critic_params.adam_step(collect_grads(db), adam);
        out.loss_d = dt.scalar(ld);
        out.gp = dt.scalar(gp);

        // ---- (b) classifier (rctgan mode only) ----
        if (cfg.classifier_enabled()) {
            const int n_real =
                static_cast<int>(m.schema.columns[m.schema.target_index()].categories.size());
            std::vector<int> labels;
            labels.reserve(2 * B);
            for (int id : row_ids) labels.push_back(data.target_cat[id]);
            for (int i = 0; i < B; ++i) labels.push_back(n_real);  // synthetic class
            Tensor2 fake_hard = fake_rows;
            harden_onehots(fake_hard, m.schema);
            Tensor2 x = vstack(real_rows, fake_hard);
            const Tensor2 mask = target_slice_mask(m.schema);
            for (int i = 0; i < x.rows(); ++i)
                for (int j = 0; j < x.cols(); ++j) x(i, j) *= mask(0, j);
            Tape ct(TapeMode::training);
            BoundNet cbn = bind(*m.clf, m.clf_params, ct, true);
            ForwardTrace ctr = forward(cbn, ct.leaf(std::move(x)), &rng);
            Value lc = loss_c(ct, ctr.output, onehot_rows(labels, n_real + 1));
            ct.backward(lc);
            m.clf_params.adam_step(collect_grads(cbn), adam);
            out.loss_c = ct.scalar(lc);
        }
    }

    // ---- (c) generator ----
    {
        CondBatch cb = sample_cond_batch(m.schema, m.cond, B, rng);
        Tensor2 zc = hstack(rng.normal_matrix(B, cfg.noise_dim), cb.onehot);

        Tape t(TapeMode::training);
        GenPass gp = generator_pass(t, m, zc, true, rng);
        Value fake_in = t.concat_cols({gp.act, t.leaf(cb.onehot)});
        Value packed = pack(t, fake_in, cfg.pac);
        BoundNet db = bind(m.critic, m.critic_params, t, false);
        Value scores = forward(db, packed).output;
        Value total = loss_g(t, scores);

        const int tcol = m.schema.target_index();
        if (cfg.classifier_enabled()) {
            // CE toward the conditioned real class, on rows conditioned on the target
            std::vector<int> on_target;
            std::vector<int> classes;
            for (int i = 0; i < B; ++i)
                if (cb.conds[i].column == tcol) {
                    on_target.push_back(i);
                    classes.push_back(cb.conds[i].category);
                }
            if (!on_target.empty()) {
                const int n_real =
                    static_cast<int>(m.schema.columns[tcol].categories.size());
                BoundNet cbn = bind(*m.clf, m.clf_params, t, false);
                Value st = straight_through_hard(t, t.gather_rows(gp.act, on_target),
                                                 m.schema);
                Value clf_in = t.mul_row(st, t.leaf(target_slice_mask(m.schema)));
                ForwardTrace ctr = forward(cbn, clf_in, &rng);
                // mean over the conditioned subset, from the pre-softmax logits:
                // rare conditions keep full-strength class gradients
                Value clf_logits = ctr.layers[ctr.layers.size() - 2].out;
                Value ce = ce_from_logits(t, clf_logits, onehot_rows(classes, n_real + 1));
                total = t.add(total, t.scale(ce, cfg.class_weight));
            }
        }

        // conditional consistency: CE between the generated raw logits of the
        // conditioned column's slice and the chosen category (subset mean)
        const std::vector<Span> spans = m.schema.spans();
        for (const auto& entry : m.cond.entries) {
            std::vector<int> idx;
            std::vector<int> cats;
            for (int i = 0; i < B; ++i)
                if (cb.conds[i].column == entry.column) {
                    idx.push_back(i);
                    cats.push_back(cb.conds[i].category);
                }
            if (idx.empty()) continue;
            const Span* sp = nullptr;
            for (const Span& s : spans)
                if (s.col == entry.column && s.role == SpanRole::cat_onehot) sp = &s;
            Value logits = t.gather_rows(t.slice_cols(gp.raw, sp->offset, sp->width), idx);
            Value ce = ce_from_logits(t, logits, onehot_rows(cats, sp->width));
            total = t.add(total, ce);
        }

        t.backward(total);
        m.gen_params.adam_step(collect_grads(gp.bound), adam);
        out.loss_g = t.scalar(total);

        // track the EMA sampling weights (buffers included)
        const double decay = cfg.ema_decay;
        for (size_t i = 0; i < m.gen_params.blocks().size(); ++i) {
            const Tensor2& src = m.gen_params.blocks()[i].value;
            Tensor2& dst = m.gen_ema.blocks()[i].value;
            for (int r = 0; r < src.rows(); ++r) {
                const double* s = src.row_ptr(r);
                double* e = dst.row_ptr(r);
                for (int c = 0; c < src.cols(); ++c)
                    e[c] = decay * e[c] + (1.0 - decay) * s[c];
            }
        }
    }

    if (!std::isfinite(out.loss_d) || !std::isfinite(out.loss_c) ||
        !std::isfinite(out.loss_g) || !std::isfinite(out.gp))
        throw TrainingDiverged("train_step: non-finite loss (d=" + std::to_string(out.loss_d) +
                               " c=" + std::to_string(out.loss_c) +
                               " g=" + std::to_string(out.loss_g) +
                               " gp=" + std::to_string(out.gp) + ")");
    return out;
}

// ---------------------------------------------------------------------------
// fit / generate / sample
// ---------------------------------------------------------------------------

inline Checkpoint make_checkpoint(const GanModel& m) {
    Checkpoint c;
    c.seed = m.seed;
    c.schema_text = schema_to_text(m.schema);
    c.config_text = m.cfg.to_text();
    for (const ParamSet* ps : {&m.gen_params, &m.critic_params, &m.clf_params})
        for (const auto& b : ps->blocks()) c.blocks.emplace_back(b.name, b.value);
    for (const auto& b : m.gen_ema.blocks()) c.blocks.emplace_back("ema." + b.name, b.value);
    return c;
}

inline GanModel model_from_checkpoint(const Checkpoint& c) {
    GanModel m = init_gan(schema_from_text(c.schema_text), GanConfig::from_text(c.config_text),
                          c.seed);
    auto restore = [&](ParamSet& ps, const std::string& prefix) {
        for (auto& b : ps.blocks()) {
            bool found = false;
            for (const auto& [name, t] : c.blocks) {
                if (name != prefix + b.name) continue;
                if (!t.same_shape(b.value))
                    throw DataError("checkpoint: block " + name + " has shape " +
                                    t.shape_str() + ", expected " + b.value.shape_str());
                b.value = t;
                found = true;
                break;
            }
            if (!found) throw DataError("checkpoint: missing block " + prefix + b.name);
        }
    };
    restore(m.gen_params, "");
    restore(m.critic_params, "");
    if (m.cfg.classifier_enabled()) restore(m.clf_params, "");
    restore(m.gen_ema, "ema.");
    return m;
}

// Runs epochs * (rows/batch) steps, emitting per-step metrics through `hook`.
inline Checkpoint fit(const Table& rows, const TableSchema& schema, const GanConfig& cfg,
                      uint64_t seed, const StepHook& hook = {}) {
    cfg.validate();
    const int tcol = schema.target_index();
    const ColumnMeta& tmeta = schema.columns[tcol];
    const int table_col = rows.require_col(tmeta.name);
    for (size_t c = 0; c < tmeta.categories.size(); ++c) {
        bool any = false;
        for (const auto& row : rows.rows)
            if (str(row[table_col]) == tmeta.categories[c]) {
                any = true;
                break;
            }
        if (!any)
            throw DataError("fit: no training rows for target category '" +
                            tmeta.categories[c] + "'");
    }

    Rng rng(seed);
    GanModel m = init_gan(schema, cfg, seed);
    TrainData data = TrainData::prepare(rows, schema, rng);
    const int steps_per_epoch =
        std::max<int>(1, static_cast<int>(rows.n_rows()) / cfg.batch_size);
    int step = 0;
    for (int e = 0; e < cfg.epochs; ++e) {
        for (int s = 0; s < steps_per_epoch; ++s) {
            StepMetrics sm = train_step(m, data, rng);
            if (hook) hook(step, sm);
            ++step;
        }
    }
    return make_checkpoint(m);
}

// Generates `count` encoded rows under fixed or per-row conditions, in chunks
// so large requests stay within a bounded tape footprint.
inline EncodedMatrix generate_encoded(GanModel& m, const std::vector<CondVector>& conds,
                                      Rng& rng, bool hard) {
    const int n = static_cast<int>(conds.size());
    EncodedMatrix out;
    out.spans = m.schema.spans();
    out.data = Tensor2(n, m.schema.encoded_width());
    if (n == 0) return out;
    constexpr int kChunk = 512;
    for (int start = 0; start < n; start += kChunk) {
        const int len = std::min(kChunk, n - start);
        std::vector<CondVector> part(conds.begin() + start, conds.begin() + start + len);
        Tensor2 cond_mat = m.cond.onehot_rows(part);
        Tensor2 zc = hstack(rng.normal_matrix(len, m.cfg.noise_dim), cond_mat);
        Tape t(TapeMode::inference);
        train_detail::GenPass gp =
            train_detail::generator_pass(t, m, zc, false, rng, &m.sampling_params());
        const Tensor2& chunk = t.value(gp.act);
        for (int i = 0; i < len; ++i)
            for (int j = 0; j < chunk.cols(); ++j) out.data(start + i, j) = chunk(i, j);
    }
    if (hard) harden_onehots(out.data, m.schema);
    return out;
}

// Decoded synthetic rows of one target class; the target cell is set to the
// requested category.
inline Table sample_rows(GanModel& m, const std::string& cls, int count, Rng& rng) {
    const int tcol = m.schema.target_index();
    const int cat = m.schema.columns[tcol].cat_index(cls);
    if (cat < 0) throw DataError("sample: unknown class '" + cls + "'");
    std::vector<CondVector> conds(count, CondVector{tcol, cat});
    EncodedMatrix enc = generate_encoded(m, conds, rng, /*hard=*/true);
    Table rows = decode(enc, m.schema);
    for (auto& row : rows.rows) row[tcol] = m.schema.columns[tcol].categories[cat];
    return rows;
}

}  // namespace rctgan
