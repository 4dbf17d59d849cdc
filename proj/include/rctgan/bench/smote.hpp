#pragma once
// SMOTE baseline: new minority rows interpolated between a minority point and
// one of its k nearest minority neighbors (k=5). Continuous cells interpolate;
// discrete cells copy the base row. Distances use standardized continuous
// features.

#include <algorithm>
#include <vector>

#include "rctgan/codec/schema.hpp"
#include "rctgan/codec/table.hpp"
#include "rctgan/grad/rng.hpp"

namespace rctgan {

inline Table smote_minority(const Table& train, const TableSchema& schema,
                            const std::string& minority, int n_new, Rng& rng, int k = 5) {
    const int tcol_schema = schema.target_index();
    const int tcol = train.require_col(schema.columns[tcol_schema].name);
    std::vector<int> min_ids;
    for (size_t r = 0; r < train.n_rows(); ++r)
        if (str(train.rows[r][tcol]) == minority) min_ids.push_back(static_cast<int>(r));
    if (min_ids.empty()) throw DataError("smote: no minority rows");

    std::vector<int> cont_cols;
    for (size_t c = 0; c < train.n_cols(); ++c)
        if (train.kinds[c] == ColKind::continuous) cont_cols.push_back(static_cast<int>(c));

    // standardize continuous features over the minority set for the distance
    const int m = static_cast<int>(min_ids.size());
    const int d = static_cast<int>(cont_cols.size());
    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j) mean[j] += num(train.rows[min_ids[i]][cont_cols[j]]);
    for (double& v : mean) v /= std::max(m, 1);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j) {
            const double x = num(train.rows[min_ids[i]][cont_cols[j]]) - mean[j];
            sd[j] += x * x;
        }
    for (double& v : sd) v = std::max(std::sqrt(v / std::max(m, 1)), 1e-12);

    // kNN among minority points (exact, m is small)
    const int kk = std::min(k, m - 1);
    std::vector<std::vector<int>> nn(m);
    if (kk > 0) {
        for (int i = 0; i < m; ++i) {
            std::vector<std::pair<double, int>> dist;
            dist.reserve(m - 1);
            for (int j = 0; j < m; ++j) {
                if (j == i) continue;
                double s = 0.0;
                for (int f = 0; f < d; ++f) {
                    const double a =
                        (num(train.rows[min_ids[i]][cont_cols[f]]) - mean[f]) / sd[f];
                    const double b =
                        (num(train.rows[min_ids[j]][cont_cols[f]]) - mean[f]) / sd[f];
                    s += (a - b) * (a - b);
                }
                dist.emplace_back(s, j);
            }
            std::sort(dist.begin(), dist.end());
            for (int q = 0; q < kk; ++q) nn[i].push_back(dist[q].second);
        }
    }

    Table out;
    out.names = train.names;
    out.kinds = train.kinds;
    out.rows.reserve(n_new);
    for (int s = 0; s < n_new; ++s) {
        const int base = rng.uniform_int(m);
        const int nbr = kk > 0 ? nn[base][rng.uniform_int(kk)] : base;
        const double lambda = rng.uniform();
        std::vector<Cell> row = train.rows[min_ids[base]];
        for (int f = 0; f < d; ++f) {
            const double a = num(train.rows[min_ids[base]][cont_cols[f]]);
            const double b = num(train.rows[min_ids[nbr]][cont_cols[f]]);
            row[cont_cols[f]] = a + lambda * (b - a);
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace rctgan
