#pragma once
// Dataset construction for the evaluation framework: stratified 8:2 split with
// ratio-controlled normal subsampling, the synthetic desk-scale benchmark with
// known generating parameters, and table featurization for the classifiers.

#include <algorithm>
#include <string>
#include <vector>

#include "rctgan/codec/encode.hpp"
#include "rctgan/codec/schema.hpp"
#include "rctgan/codec/table.hpp"
#include "rctgan/grad/rng.hpp"

namespace rctgan {

struct SplitSpec {
    double train_frac = 0.8;
    int ratio = 100;  // normal rows per failure row
};

struct SplitCounts {
    int fail_train = 0, norm_train = 0, fail_test = 0, norm_test = 0;
};

struct DataSplit {
    Table train, test;
    SplitCounts counts;
    std::vector<int> train_ids, test_ids;  // original row indices (disjointness guard)
};

namespace bench_detail {

inline void shuffle_ids(std::vector<int>& ids, Rng& rng) {
    for (int i = static_cast<int>(ids.size()) - 1; i > 0; --i)
        std::swap(ids[i], ids[rng.uniform_int(i + 1)]);
}

}  // namespace bench_detail

// Minority category of a discrete column (ties -> later category).
inline std::string minority_category(const Table& rows, const std::string& column) {
    const int col = rows.require_col(column);
    std::vector<std::string> cats;
    std::vector<int> counts;
    for (const auto& r : rows.rows) {
        const std::string& v = str(r[col]);
        bool found = false;
        for (size_t i = 0; i < cats.size(); ++i)
            if (cats[i] == v) {
                ++counts[i];
                found = true;
            }
        if (!found) {
            cats.push_back(v);
            counts.push_back(1);
        }
    }
    if (cats.size() < 2) throw DataError("minority_category: fewer than 2 categories");
    size_t best = 0;
    for (size_t i = 1; i < cats.size(); ++i)
        if (counts[i] <= counts[best]) best = i;
    return cats[best];
}

// Stratified split: positive rows split train_frac : rest, normal rows
// subsampled (disjointly) to ratio * positive counts.
inline DataSplit build_dataset(const Table& rows, const std::string& target,
                               const std::string& positive, const SplitSpec& spec, Rng& rng) {
    const int col = rows.require_col(target);
    std::vector<int> pos_ids, neg_ids;
    for (size_t r = 0; r < rows.n_rows(); ++r)
        (str(rows.rows[r][col]) == positive ? pos_ids : neg_ids).push_back(static_cast<int>(r));
    if (pos_ids.empty() || neg_ids.empty())
        throw DataError("build_dataset: need both classes present");

    bench_detail::shuffle_ids(pos_ids, rng);
    bench_detail::shuffle_ids(neg_ids, rng);

    DataSplit out;
    out.counts.fail_train = static_cast<int>(spec.train_frac * pos_ids.size());
    out.counts.fail_test = static_cast<int>(pos_ids.size()) - out.counts.fail_train;
    out.counts.norm_train = out.counts.fail_train * spec.ratio;
    out.counts.norm_test = out.counts.fail_test * spec.ratio;
    if (out.counts.fail_train <= 0 || out.counts.fail_test <= 0)
        throw DataError("build_dataset: too few positive rows to split");
    if (out.counts.norm_train + out.counts.norm_test > static_cast<int>(neg_ids.size()))
        throw DataError("build_dataset: normal pool too small (" +
                        std::to_string(neg_ids.size()) + " < " +
                        std::to_string(out.counts.norm_train + out.counts.norm_test) + ")");

    out.train_ids.assign(pos_ids.begin(), pos_ids.begin() + out.counts.fail_train);
    out.test_ids.assign(pos_ids.begin() + out.counts.fail_train, pos_ids.end());
    out.train_ids.insert(out.train_ids.end(), neg_ids.begin(),
                         neg_ids.begin() + out.counts.norm_train);
    out.test_ids.insert(out.test_ids.end(), neg_ids.begin() + out.counts.norm_train,
                        neg_ids.begin() + out.counts.norm_train + out.counts.norm_test);
    bench_detail::shuffle_ids(out.train_ids, rng);
    bench_detail::shuffle_ids(out.test_ids, rng);
    out.train = rows.subset(out.train_ids);
    out.test = rows.subset(out.test_ids);
    return out;
}

// ---------------------------------------------------------------------------
// synthetic desk-scale benchmark
// ---------------------------------------------------------------------------

struct BenchmarkSpec {
    int n_continuous = 8;
    int rows = 5050;
    int ratio = 100;        // 1:ratio minority:majority
    double separation = 2.5;  // minority mode shift in within-cluster stddevs
    double minority_spread = 1.0;  // minority within-mode stddev (normal is 1)
    int minority_modes = 2;
    uint64_t seed = 0;
};

struct BenchmarkTruth {
    std::vector<std::vector<double>> normal_means;    // per normal mode
    std::vector<std::vector<double>> minority_means;  // per minority mode
    double stddev = 1.0;           // normal within-mode stddev
    double minority_stddev = 1.0;  // minority within-mode stddev
};

// Two-class tabular data: class-conditional Gaussian mixtures with known
// parameters, plus a 3-category discrete column correlated with class.
// Minority modes sit `separation` stddevs from the normal mass with unit
// within-mode spread, so at moderate separation the classes overlap: a
// purity-grown tree on the raw imbalance memorizes micro-boxes around the few
// minority rows (low recall), while balanced training data moves the decision
// boundary to the likelihood-ratio point. Minority count = rows / (ratio + 1).
inline Table make_synthetic_benchmark(const BenchmarkSpec& spec,
                                      BenchmarkTruth* truth = nullptr) {
    Rng rng(spec.seed);
    const int d = spec.n_continuous;
    const int n_min = spec.rows / (spec.ratio + 1);
    const int n_norm = spec.rows - n_min;

    BenchmarkTruth t;
    t.stddev = 1.0;
    t.minority_stddev = spec.minority_spread;
    for (int m = 0; m < 2; ++m) {
        std::vector<double> mean(d, 0.0);
        mean[0] = m == 0 ? -1.0 : 1.0;
        t.normal_means.push_back(mean);
    }
    constexpr double inv_sqrt2 = 0.7071067811865476;
    for (int m = 0; m < spec.minority_modes; ++m) {
        std::vector<double> mean(d, 0.0);
        // each minority mode shifts a pair of feature axes diagonally
        const int a = (2 * m + 1) % d;
        const int b = (2 * m + 2) % d;
        mean[a] = spec.separation * inv_sqrt2;
        mean[b] = (m % 2 == 0 ? 1.0 : -1.0) * spec.separation * inv_sqrt2;
        t.minority_means.push_back(mean);
    }

    Table out;
    for (int j = 0; j < d; ++j) {
        out.names.push_back("f" + std::to_string(j));
        out.kinds.push_back(ColKind::continuous);
    }
    out.names.push_back("sensor");
    out.kinds.push_back(ColKind::discrete);
    out.names.push_back("cls");
    out.kinds.push_back(ColKind::discrete);

    auto emit = [&](bool minority) {
        const auto& means = minority ? t.minority_means : t.normal_means;
        const int mode = rng.uniform_int(static_cast<int>(means.size()));
        const double sd = minority ? spec.minority_spread : 1.0;
        std::vector<Cell> row;
        row.reserve(d + 2);
        for (int j = 0; j < d; ++j) row.emplace_back(means[mode][j] + sd * rng.normal());
        // discrete sensor reading, correlated with class
        const double u = rng.uniform();
        const char* sensor;
        if (minority) sensor = u < 0.7 ? "s2" : (u < 0.85 ? "s1" : "s0");
        else sensor = u < 0.75 ? "s0" : (u < 0.95 ? "s1" : "s2");
        row.emplace_back(std::string(sensor));
        row.emplace_back(std::string(minority ? "failure" : "normal"));
        out.rows.push_back(std::move(row));
    };
    for (int i = 0; i < n_norm; ++i) emit(false);
    for (int i = 0; i < n_min; ++i) emit(true);

    // deterministic shuffle so classes are interleaved
    std::vector<int> ids(out.rows.size());
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    bench_detail::shuffle_ids(ids, rng);
    Table shuffled = out.subset(ids);
    if (truth) *truth = std::move(t);
    return shuffled;
}

// ---------------------------------------------------------------------------
// featurization for the downstream classifiers
// ---------------------------------------------------------------------------

struct FeatureMatrix {
    Tensor2 x;
    std::vector<int> y;  // target category ids per schema
    std::vector<std::string> feature_names;
};

// Continuous columns pass through raw (missing -> schema impute value);
// non-target discrete columns expand to one-hots; y = target category index.
inline FeatureMatrix featurize(const Table& rows, const TableSchema& schema) {
    const int tcol = schema.target_index();
    int width = 0;
    for (size_t c = 0; c < schema.columns.size(); ++c) {
        if (static_cast<int>(c) == tcol) continue;
        width += schema.columns[c].kind == ColKind::continuous
                     ? 1
                     : static_cast<int>(schema.columns[c].categories.size());
    }
    FeatureMatrix fm;
    fm.x = Tensor2(static_cast<int>(rows.n_rows()), width);
    fm.y.reserve(rows.n_rows());
    for (size_t c = 0; c < schema.columns.size(); ++c) {
        if (static_cast<int>(c) == tcol) continue;
        const ColumnMeta& meta = schema.columns[c];
        if (meta.kind == ColKind::continuous) {
            fm.feature_names.push_back(meta.name);
        } else {
            for (const auto& cat : meta.categories)
                fm.feature_names.push_back(meta.name + "=" + cat);
        }
    }
    for (size_t r = 0; r < rows.n_rows(); ++r) {
        double* out = fm.x.row_ptr(static_cast<int>(r));
        int off = 0;
        for (size_t c = 0; c < schema.columns.size(); ++c) {
            const ColumnMeta& meta = schema.columns[c];
            const int table_col = rows.require_col(meta.name);
            if (static_cast<int>(c) == tcol) {
                const int cat = meta.cat_index(str(rows.rows[r][table_col]));
                if (cat < 0)
                    throw DataError("featurize: unknown target category '" +
                                    str(rows.rows[r][table_col]) + "'");
                if (c == static_cast<size_t>(tcol)) fm.y.push_back(cat);
                continue;
            }
            if (meta.kind == ColKind::continuous) {
                const double v = num(rows.rows[r][table_col]);
                out[off++] = std::isfinite(v) ? v : meta.impute;
            } else {
                const int cat = meta.cat_index(str(rows.rows[r][table_col]));
                if (cat < 0)
                    throw DataError("featurize: unknown category in column " + meta.name);
                for (size_t j = 0; j < meta.categories.size(); ++j)
                    out[off++] = static_cast<int>(j) == cat ? 1.0 : 0.0;
            }
        }
    }
    return fm;
}

}  // namespace rctgan
