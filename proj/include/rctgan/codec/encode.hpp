#pragma once
// Mode-specific normalization of tables into the GAN's numeric representation,
// the inverse transform, the conditional-vector machinery, and
// training-by-sampling row draws.

#include <cmath>
#include <string>
#include <vector>

#include "rctgan/codec/schema.hpp"
#include "rctgan/codec/table.hpp"
#include "rctgan/errors.hpp"
#include "rctgan/grad/rng.hpp"
#include "rctgan/grad/tensor.hpp"

namespace rctgan {

struct EncodedMatrix {
    Tensor2 data;
    std::vector<Span> spans;
};

// A continuous value c under mode k encodes as alpha = (c - mean_k)/(4 std_k),
// clipped to [-1, 1], plus a one-hot mode indicator. The mode is sampled from
// the mixture's posterior responsibility at c, restricted to modes whose alpha
// would not clip whenever any such mode exists (keeps the round trip exact).
inline void encode_continuous_cell(const ColumnMeta& meta, double c, Rng& rng, double* out) {
    if (!std::isfinite(c)) c = meta.impute;
    const int k = static_cast<int>(meta.modes.size());
    thread_local std::vector<double> resp;
    resp.assign(k, 0.0);
    double total = 0.0, total_inrange = 0.0;
    int argmax = 0;
    for (int j = 0; j < k; ++j) {
        const GaussMode& m = meta.modes[j];
        const double z = (c - m.mean) / m.stddev;
        const double r = m.weight / m.stddev * std::exp(-0.5 * z * z);
        resp[j] = r;
        total += r;
        if (std::abs(z) <= 4.0) total_inrange += r;
        if (r > resp[argmax]) argmax = j;
    }
    int pick = argmax;
    if (total_inrange > 0.0) {
        double u = rng.uniform() * total_inrange;
        for (int j = 0; j < k; ++j) {
            const GaussMode& m = meta.modes[j];
            if (std::abs((c - m.mean) / m.stddev) > 4.0) continue;
            u -= resp[j];
            if (u <= 0.0) {
                pick = j;
                break;
            }
            pick = j;  // numeric tail: last in-range mode
        }
    } else if (total > 0.0) {
        double u = rng.uniform() * total;
        for (int j = 0; j < k; ++j) {
            u -= resp[j];
            if (u <= 0.0) {
                pick = j;
                break;
            }
            pick = j;
        }
    }
    const GaussMode& m = meta.modes[pick];
    double alpha = (c - m.mean) / (4.0 * m.stddev);
    alpha = std::max(-1.0, std::min(1.0, alpha));
    out[0] = alpha;
    for (int j = 0; j < k; ++j) out[1 + j] = j == pick ? 1.0 : 0.0;
}

inline EncodedMatrix encode(const Table& table, const TableSchema& schema, Rng& rng) {
    if (table.n_cols() != schema.columns.size())
        throw DataError("encode: table/schema column count mismatch");
    EncodedMatrix enc;
    enc.spans = schema.spans();
    enc.data = Tensor2(static_cast<int>(table.n_rows()), schema.encoded_width());
    for (size_t r = 0; r < table.n_rows(); ++r) {
        double* out = enc.data.row_ptr(static_cast<int>(r));
        int off = 0;
        for (size_t c = 0; c < schema.columns.size(); ++c) {
            const ColumnMeta& meta = schema.columns[c];
            if (meta.kind == ColKind::continuous) {
                encode_continuous_cell(meta, num(table.rows[r][c]), rng, out + off);
                off += meta.encoded_width();
            } else {
                const std::string& v = str(table.rows[r][c]);
                const int idx = meta.cat_index(v);
                if (idx < 0)
                    throw DataError("encode: unknown category '" + v + "' in column " +
                                    meta.name);
                for (size_t j = 0; j < meta.categories.size(); ++j)
                    out[off + j] = static_cast<int>(j) == idx ? 1.0 : 0.0;
                off += meta.encoded_width();
            }
        }
    }
    return enc;
}

// Inverse transform; soft one-hots resolve by argmax, alpha clamps to [-1,1].
inline Table decode(const EncodedMatrix& enc, const TableSchema& schema) {
    if (enc.data.cols() != schema.encoded_width())
        throw DataError("decode: encoded width " + std::to_string(enc.data.cols()) +
                        " does not match schema width " +
                        std::to_string(schema.encoded_width()));
    Table out;
    for (const auto& c : schema.columns) {
        out.names.push_back(c.name);
        out.kinds.push_back(c.kind);
    }
    out.rows.resize(enc.data.rows());
    for (int r = 0; r < enc.data.rows(); ++r) {
        const double* row = enc.data.row_ptr(r);
        auto& cells = out.rows[r];
        cells.reserve(schema.columns.size());
        int off = 0;
        for (const ColumnMeta& meta : schema.columns) {
            if (meta.kind == ColKind::continuous) {
                const int k = static_cast<int>(meta.modes.size());
                int pick = 0;
                for (int j = 1; j < k; ++j)
                    if (row[off + 1 + j] > row[off + 1 + pick]) pick = j;
                double alpha = std::max(-1.0, std::min(1.0, row[off]));
                const GaussMode& m = meta.modes[pick];
                cells.emplace_back(alpha * 4.0 * m.stddev + m.mean);
                off += meta.encoded_width();
            } else {
                const int k = static_cast<int>(meta.categories.size());
                int pick = 0;
                for (int j = 1; j < k; ++j)
                    if (row[off + j] > row[off + pick]) pick = j;
                cells.emplace_back(meta.categories[pick]);
                off += meta.encoded_width();
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// conditional vectors / training-by-sampling
// ---------------------------------------------------------------------------

struct CondVector {
    int column = -1;  // schema column index (discrete)
    int category = -1;
};

// Layout of the one-hot conditional vector across all discrete columns.
struct CondSpace {
    struct Entry {
        int column;  // schema column index
        int offset;
        int count;
    };
    std::vector<Entry> entries;
    int width = 0;

    static CondSpace from(const TableSchema& schema) {
        CondSpace cs;
        int off = 0;
        for (size_t i = 0; i < schema.columns.size(); ++i) {
            const ColumnMeta& c = schema.columns[i];
            if (c.kind != ColKind::discrete) continue;
            cs.entries.push_back({static_cast<int>(i), off,
                                  static_cast<int>(c.categories.size())});
            off += static_cast<int>(c.categories.size());
        }
        cs.width = off;
        return cs;
    }

    const Entry& entry_for(int column) const {
        for (const auto& e : entries)
            if (e.column == column) return e;
        throw DataError("cond space: column is not discrete");
    }

    void write_onehot(const CondVector& cv, double* out) const {
        for (int j = 0; j < width; ++j) out[j] = 0.0;
        const Entry& e = entry_for(cv.column);
        out[e.offset + cv.category] = 1.0;
    }

    Tensor2 onehot_rows(const std::vector<CondVector>& cvs) const {
        Tensor2 t(static_cast<int>(cvs.size()), width);
        for (size_t i = 0; i < cvs.size(); ++i)
            write_onehot(cvs[i], t.row_ptr(static_cast<int>(i)));
        return t;
    }
};

// Pick a discrete column uniformly, then a category with probability
// proportional to log(1 + frequency mass).
inline CondVector sample_condition(const TableSchema& schema, Rng& rng) {
    std::vector<int> disc = schema.discrete_columns();
    if (disc.empty()) throw DataError("sample_condition: schema has no discrete columns");
    const int col = disc[rng.uniform_int(static_cast<int>(disc.size()))];
    const ColumnMeta& meta = schema.columns[col];
    double total = 0.0;
    for (double f : meta.frequencies) total += std::log1p(f);
    CondVector cv;
    cv.column = col;
    cv.category = static_cast<int>(meta.categories.size()) - 1;
    double u = rng.uniform() * total;
    for (size_t j = 0; j < meta.frequencies.size(); ++j) {
        u -= std::log1p(meta.frequencies[j]);
        if (u <= 0.0) {
            cv.category = static_cast<int>(j);
            break;
        }
    }
    return cv;
}

// Uniform draw with replacement among rows whose conditioned column matches.
inline std::vector<int> draw_matching_rows(const Table& table, const TableSchema& schema,
                                           const CondVector& cv, int batch, Rng& rng) {
    const ColumnMeta& meta = schema.columns[cv.column];
    const int tcol = table.require_col(meta.name);
    std::vector<int> matching;
    for (size_t r = 0; r < table.n_rows(); ++r)
        if (str(table.rows[r][tcol]) == meta.categories[cv.category])
            matching.push_back(static_cast<int>(r));
    if (matching.empty())
        throw DataError("draw_matching_rows: no rows match category '" +
                        meta.categories[cv.category] + "'");
    std::vector<int> out(batch);
    for (int i = 0; i < batch; ++i)
        out[i] = matching[rng.uniform_int(static_cast<int>(matching.size()))];
    return out;
}

// Precomputed (discrete column, category) -> row ids, for the training loop.
struct MatchIndex {
    // indexed parallel to CondSpace::entries
    std::vector<std::vector<std::vector<int>>> ids;

    static MatchIndex build(const Table& table, const TableSchema& schema,
                            const CondSpace& cs) {
        MatchIndex mi;
        mi.ids.resize(cs.entries.size());
        for (size_t e = 0; e < cs.entries.size(); ++e) {
            const ColumnMeta& meta = schema.columns[cs.entries[e].column];
            const int tcol = table.require_col(meta.name);
            mi.ids[e].resize(meta.categories.size());
            for (size_t r = 0; r < table.n_rows(); ++r) {
                const int idx = meta.cat_index(str(table.rows[r][tcol]));
                if (idx >= 0) mi.ids[e][idx].push_back(static_cast<int>(r));
            }
        }
        return mi;
    }

    int draw(const CondSpace& cs, const CondVector& cv, Rng& rng) const {
        for (size_t e = 0; e < cs.entries.size(); ++e) {
            if (cs.entries[e].column != cv.column) continue;
            const auto& rows = ids[e][cv.category];
            if (rows.empty()) throw DataError("match index: no rows for condition");
            return rows[rng.uniform_int(static_cast<int>(rows.size()))];
        }
        throw DataError("match index: condition column not indexed");
    }
};

}  // namespace rctgan
