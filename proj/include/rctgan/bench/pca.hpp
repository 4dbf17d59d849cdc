#pragma once
// 2-D projection for distribution plots: PCA via covariance eigendecomposition
// (cyclic Jacobi rotations), fitted on real rows, applied to real + synthetic.

#include <array>
#include <string>
#include <vector>

#include "rctgan/bench/dataset.hpp"
#include "rctgan/errors.hpp"
#include "rctgan/grad/tensor.hpp"

namespace rctgan {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns eigenvalues;
// V's columns hold the corresponding eigenvectors.
inline std::vector<double> jacobi_eigen(Tensor2 a, Tensor2& v, int max_sweeps = 100) {
    const int d = a.rows();
    if (a.cols() != d) throw std::invalid_argument("jacobi: matrix not square");
    v = Tensor2(d, d);
    for (int i = 0; i < d; ++i) v(i, i) = 1.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-24) break;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < d; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < d; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < d; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
    }
    std::vector<double> eig(d);
    for (int i = 0; i < d; ++i) eig[i] = a(i, i);
    return eig;
}

struct Pca2 {
    std::vector<double> mean;
    std::vector<double> pc1, pc2;
    double var1 = 0.0, var2 = 0.0;

    std::array<double, 2> project(const double* row, int d) const {
        double x = 0.0, y = 0.0;
        for (int j = 0; j < d; ++j) {
            const double c = row[j] - mean[j];
            x += c * pc1[j];
            y += c * pc2[j];
        }
        return {x, y};
    }
};

inline Pca2 fit_pca2(const Tensor2& x) {
    const int n = x.rows(), d = x.cols();
    if (n < 2) throw DataError("pca: need at least 2 rows");
    Pca2 p;
    p.mean.assign(d, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) p.mean[j] += x(i, j);
    for (double& v : p.mean) v /= n;
    Tensor2 cov(d, d);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a) {
            const double ca = x(i, a) - p.mean[a];
            for (int b = a; b < d; ++b) cov(a, b) += ca * (x(i, b) - p.mean[b]);
        }
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            cov(a, b) /= (n - 1);
            cov(b, a) = cov(a, b);
        }
    double total_var = 0.0;
    for (int a = 0; a < d; ++a) total_var += cov(a, a);
    if (total_var < 1e-24) throw DataError("pca: zero-variance data");

    Tensor2 vecs;
    std::vector<double> eig = jacobi_eigen(cov, vecs);
    int i1 = 0, i2 = -1;
    for (int i = 1; i < d; ++i)
        if (eig[i] > eig[i1]) i1 = i;
    for (int i = 0; i < d; ++i)
        if (i != i1 && (i2 < 0 || eig[i] > eig[i2])) i2 = i;
    if (d == 1) i2 = i1;  // degenerate: duplicate the single axis
    p.var1 = eig[i1];
    p.var2 = i2 >= 0 ? eig[i2] : 0.0;
    p.pc1.resize(d);
    p.pc2.resize(d);
    for (int j = 0; j < d; ++j) {
        p.pc1[j] = vecs(j, i1);
        p.pc2[j] = vecs(j, i2);
    }
    // deterministic sign: largest-magnitude component positive
    for (std::vector<double>* pc : {&p.pc1, &p.pc2}) {
        int big = 0;
        for (int j = 1; j < d; ++j)
            if (std::abs((*pc)[j]) > std::abs((*pc)[big])) big = j;
        if ((*pc)[big] < 0.0)
            for (double& v : *pc) v = -v;
    }
    return p;
}

struct ProjectedPoint {
    double x = 0.0, y = 0.0;
    std::string cls;
    bool synthetic = false;
};

// PCA basis from real rows, both sets projected onto the top-2 components.
inline std::vector<ProjectedPoint> project_2d(const Table& real, const Table& synth,
                                              const TableSchema& schema) {
    FeatureMatrix fr = featurize(real, schema);
    FeatureMatrix fs = featurize(synth, schema);
    Pca2 pca = fit_pca2(fr.x);
    const ColumnMeta& target = schema.columns[schema.target_index()];
    std::vector<ProjectedPoint> out;
    out.reserve(fr.x.rows() + fs.x.rows());
    for (int i = 0; i < fr.x.rows(); ++i) {
        auto [px, py] = pca.project(fr.x.row_ptr(i), fr.x.cols());
        out.push_back({px, py, target.categories[fr.y[i]], false});
    }
    for (int i = 0; i < fs.x.rows(); ++i) {
        auto [px, py] = pca.project(fs.x.row_ptr(i), fs.x.cols());
        out.push_back({px, py, target.categories[fs.y[i]], true});
    }
    return out;
}

}  // namespace rctgan
