#pragma once
// Schema fitting: per-column metadata driving the GAN's numeric encoding.
// Continuous columns get a univariate Gaussian mixture (EM on standardized
// values, component count chosen by BIC up to max_modes, weights < 0.005
// pruned); discrete columns get category lists with train-set frequencies.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "rctgan/codec/table.hpp"
#include "rctgan/errors.hpp"

namespace rctgan {

struct GaussMode {
    double weight = 1.0;
    double mean = 0.0;
    double stddev = 1.0;
};

struct ColumnMeta {
    std::string name;
    ColKind kind = ColKind::continuous;

    // discrete
    std::vector<std::string> categories;
    std::vector<double> frequencies;  // fractions over the fit set, sum to 1

    // continuous
    std::vector<GaussMode> modes;
    double impute = 0.0;  // fit-set median, substituted for missing cells
    bool em_converged = true;

    int encoded_width() const {
        return kind == ColKind::continuous ? 1 + static_cast<int>(modes.size())
                                           : static_cast<int>(categories.size());
    }

    int cat_index(const std::string& v) const {
        for (size_t i = 0; i < categories.size(); ++i)
            if (categories[i] == v) return static_cast<int>(i);
        return -1;
    }
};

enum class SpanRole : uint8_t { alpha, mode_onehot, cat_onehot };

struct Span {
    int col = 0;  // schema column index
    int offset = 0;
    int width = 0;
    SpanRole role = SpanRole::alpha;
};

struct TableSchema {
    std::vector<ColumnMeta> columns;
    std::string target_column;

    int target_index() const {
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i].name == target_column) return static_cast<int>(i);
        throw DataError("schema: target column '" + target_column + "' missing");
    }

    int encoded_width() const {
        int w = 0;
        for (const auto& c : columns) w += c.encoded_width();
        return w;
    }

    int cond_width() const {
        int w = 0;
        for (const auto& c : columns)
            if (c.kind == ColKind::discrete) w += static_cast<int>(c.categories.size());
        return w;
    }

    std::vector<Span> spans() const {
        std::vector<Span> out;
        int off = 0;
        for (size_t i = 0; i < columns.size(); ++i) {
            const ColumnMeta& c = columns[i];
            if (c.kind == ColKind::continuous) {
                out.push_back({static_cast<int>(i), off, 1, SpanRole::alpha});
                out.push_back({static_cast<int>(i), off + 1,
                               static_cast<int>(c.modes.size()), SpanRole::mode_onehot});
                off += c.encoded_width();
            } else {
                out.push_back({static_cast<int>(i), off,
                               static_cast<int>(c.categories.size()), SpanRole::cat_onehot});
                off += c.encoded_width();
            }
        }
        return out;
    }

    std::vector<int> discrete_columns() const {
        std::vector<int> out;
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i].kind == ColKind::discrete) out.push_back(static_cast<int>(i));
        return out;
    }
};

// ---------------------------------------------------------------------------
// univariate GMM via EM
// ---------------------------------------------------------------------------

namespace em {

struct Fit {
    std::vector<GaussMode> modes;
    double loglik = 0.0;
    bool converged = false;
};

constexpr int kMaxIter = 100;
constexpr double kTol = 1e-6;
constexpr double kMinStd = 1e-6;
constexpr double kPruneWeight = 0.005;

// EM on standardized data for a fixed component count. Means start at
// quantiles, variances at var(x)/K, weights uniform.
inline Fit fit_fixed_k(const std::vector<double>& x, int k) {
    const int n = static_cast<int>(x.size());
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    double var = 0.0;
    for (double v : x) var += v * v;
    var = std::max(var / n, 1e-12);  // x is standardized (mean ~0)

    std::vector<double> w(k, 1.0 / k), mu(k), sg(k, std::sqrt(var / k));
    for (int j = 0; j < k; ++j) {
        const double q = (j + 0.5) / k;
        mu[j] = sorted[std::min(n - 1, static_cast<int>(q * n))];
    }
    for (double& s : sg) s = std::max(s, kMinStd);

    std::vector<double> resp(static_cast<size_t>(n) * k);
    double prev_ll = -1e300;
    Fit fit;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        // E-step (log-sum-exp per sample)
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            double mx = -1e300;
            for (int j = 0; j < k; ++j) {
                const double z = (x[i] - mu[j]) / sg[j];
                const double lp = std::log(w[j]) - std::log(sg[j]) - 0.5 * z * z -
                                  0.9189385332046727;  // log sqrt(2pi)
                resp[static_cast<size_t>(i) * k + j] = lp;
                mx = std::max(mx, lp);
            }
            double s = 0.0;
            for (int j = 0; j < k; ++j)
                s += std::exp(resp[static_cast<size_t>(i) * k + j] - mx);
            const double lse = mx + std::log(s);
            ll += lse;
            for (int j = 0; j < k; ++j) {
                double& r = resp[static_cast<size_t>(i) * k + j];
                r = std::exp(r - lse);
            }
        }
        // M-step
        for (int j = 0; j < k; ++j) {
            double nk = 0.0, sum = 0.0;
            for (int i = 0; i < n; ++i) {
                const double r = resp[static_cast<size_t>(i) * k + j];
                nk += r;
                sum += r * x[i];
            }
            if (nk < 1e-10) {
                w[j] = 0.0;
                continue;
            }
            mu[j] = sum / nk;
            double ss = 0.0;
            for (int i = 0; i < n; ++i) {
                const double d = x[i] - mu[j];
                ss += resp[static_cast<size_t>(i) * k + j] * d * d;
            }
            sg[j] = std::max(std::sqrt(ss / nk), kMinStd);
            w[j] = nk / n;
        }
        const double mean_ll = ll / n;
        if (std::abs(mean_ll - prev_ll) < kTol) {
            fit.converged = true;
            fit.loglik = ll;
            break;
        }
        prev_ll = mean_ll;
        fit.loglik = ll;
    }
    for (int j = 0; j < k; ++j)
        if (w[j] > 0.0) fit.modes.push_back({w[j], mu[j], sg[j]});
    return fit;
}

// BIC model selection over 1..max_modes components. Large columns are fitted
// on evenly spaced order statistics (deterministic, distribution-preserving);
// the search stops after three consecutive non-improving component counts.
constexpr int kEmSubsample = 2000;

inline Fit fit_bic(const std::vector<double>& x_full, int max_modes) {
    std::vector<double> x;
    if (static_cast<int>(x_full.size()) > kEmSubsample) {
        std::vector<double> sorted = x_full;
        std::sort(sorted.begin(), sorted.end());
        x.reserve(kEmSubsample);
        const double step = static_cast<double>(sorted.size()) / kEmSubsample;
        for (int i = 0; i < kEmSubsample; ++i)
            x.push_back(sorted[static_cast<size_t>((i + 0.5) * step)]);
    } else {
        x = x_full;
    }
    const double n = static_cast<double>(x.size());
    Fit best;
    double best_bic = 1e300;
    int stale = 0;
    for (int k = 1; k <= max_modes; ++k) {
        Fit f = fit_fixed_k(x, k);
        const double params = 3.0 * static_cast<double>(f.modes.size()) - 1.0;
        const double bic = -2.0 * f.loglik + params * std::log(n);
        if (bic < best_bic - 1e-9) {
            best_bic = bic;
            best = std::move(f);
            stale = 0;
        } else if (++stale >= 3) {
            break;
        }
    }
    return best;
}

}  // namespace em

// ---------------------------------------------------------------------------
// fit_schema
// ---------------------------------------------------------------------------

inline TableSchema fit_schema(const Table& table, const std::string& target,
                              int max_modes = 10) {
    if (table.n_rows() < 2) throw DataError("fit_schema: need at least 2 rows");
    const int tcol = table.require_col(target);
    if (table.kinds[tcol] != ColKind::discrete)
        throw DataError("fit_schema: target column must be discrete");

    TableSchema schema;
    schema.target_column = target;
    for (size_t c = 0; c < table.n_cols(); ++c) {
        ColumnMeta meta;
        meta.name = table.names[c];
        meta.kind = table.kinds[c];
        if (meta.kind == ColKind::discrete) {
            for (const auto& row : table.rows) {
                const std::string& v = str(row[c]);
                int idx = meta.cat_index(v);
                if (idx < 0) {
                    meta.categories.push_back(v);
                    meta.frequencies.push_back(0.0);
                    idx = static_cast<int>(meta.categories.size()) - 1;
                }
                meta.frequencies[idx] += 1.0;
            }
            for (double& f : meta.frequencies) f /= static_cast<double>(table.n_rows());
        } else {
            std::vector<double> vals;
            vals.reserve(table.n_rows());
            for (const auto& row : table.rows) {
                const double v = num(row[c]);
                if (std::isfinite(v)) vals.push_back(v);
            }
            if (vals.empty()) vals.push_back(0.0);
            std::vector<double> sorted = vals;
            std::sort(sorted.begin(), sorted.end());
            meta.impute = sorted[sorted.size() / 2];

            double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
            double sd = 0.0;
            for (double v : vals) sd += (v - mean) * (v - mean);
            sd = std::sqrt(sd / vals.size());

            if (sd < 1e-12) {
                // constant column: one degenerate mode at the constant
                meta.modes = {{1.0, mean, em::kMinStd}};
            } else {
                std::vector<double> x = vals;
                for (double& v : x) v = (v - mean) / sd;
                em::Fit fit = em::fit_bic(x, max_modes);
                if (!fit.converged) {
                    meta.em_converged = false;
                    meta.modes = {{1.0, mean, std::max(sd, em::kMinStd)}};
                } else {
                    double total = 0.0;
                    for (const auto& m : fit.modes)
                        if (m.weight >= em::kPruneWeight) total += m.weight;
                    for (const auto& m : fit.modes) {
                        if (m.weight < em::kPruneWeight) continue;
                        meta.modes.push_back({m.weight / total, mean + sd * m.mean,
                                              std::max(sd * m.stddev, em::kMinStd)});
                    }
                    if (meta.modes.empty())
                        meta.modes = {{1.0, mean, std::max(sd, em::kMinStd)}};
                }
            }
        }
        schema.columns.push_back(std::move(meta));
    }

    const ColumnMeta& tmeta = schema.columns[tcol];
    if (tmeta.categories.size() < 2)
        throw DataError("fit_schema: target column has fewer than 2 categories");
    return schema;
}

// ---------------------------------------------------------------------------
// schema descriptor text (persisted next to checkpoints)
// ---------------------------------------------------------------------------

inline std::string schema_to_text(const TableSchema& s) {
    std::ostringstream os;
    auto g = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "rctgan-schema 1\n";
    os << "target " << s.target_column << "\n";
    for (const auto& c : s.columns) {
        if (c.kind == ColKind::continuous) {
            os << "column continuous " << c.name << "\n";
            os << "impute " << g(c.impute) << "\n";
            os << "converged " << (c.em_converged ? 1 : 0) << "\n";
            os << "modes " << c.modes.size() << "\n";
            for (const auto& m : c.modes)
                os << "mode " << g(m.weight) << " " << g(m.mean) << " " << g(m.stddev) << "\n";
        } else {
            os << "column discrete " << c.name << "\n";
            os << "categories " << c.categories.size() << "\n";
            for (size_t i = 0; i < c.categories.size(); ++i)
                os << "category " << g(c.frequencies[i]) << " " << c.categories[i] << "\n";
        }
    }
    os << "end\n";
    return os.str();
}

inline TableSchema schema_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    auto fail = [](const std::string& why) -> void { throw DataError("schema parse: " + why); };
    if (!std::getline(is, line) || line != "rctgan-schema 1") fail("bad header");
    TableSchema s;
    ColumnMeta* cur = nullptr;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line == "end") break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "target") {
            ls >> std::ws;
            std::getline(ls, s.target_column);
        } else if (key == "column") {
            std::string kind;
            ls >> kind >> std::ws;
            ColumnMeta meta;
            std::getline(ls, meta.name);
            meta.kind = kind == "continuous" ? ColKind::continuous : ColKind::discrete;
            s.columns.push_back(std::move(meta));
            cur = &s.columns.back();
        } else if (cur && key == "impute") {
            ls >> cur->impute;
        } else if (cur && key == "converged") {
            int v = 1;
            ls >> v;
            cur->em_converged = v != 0;
        } else if (cur && (key == "modes" || key == "categories")) {
            // counts are implied by the entries that follow
        } else if (cur && key == "mode") {
            GaussMode m;
            ls >> m.weight >> m.mean >> m.stddev;
            cur->modes.push_back(m);
        } else if (cur && key == "category") {
            double f = 0.0;
            ls >> f >> std::ws;
            std::string name;
            std::getline(ls, name);
            cur->categories.push_back(name);
            cur->frequencies.push_back(f);
        } else {
            fail("unexpected line '" + line + "'");
        }
    }
    if (s.columns.empty()) fail("no columns");
    s.target_index();  // validates target presence
    return s;
}

}  // namespace rctgan
