#pragma once
// Dense row-major fp64 matrix. The single tensor type used everywhere:
// batches are rows, features are columns. Scalars are 1x1.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace rctgan {

class Tensor2 {
public:
    Tensor2() = default;

    Tensor2(int rows, int cols, double fill = 0.0) : rows_(rows), cols_(cols) {
        if (rows < 0 || cols < 0)
            throw std::invalid_argument("Tensor2: negative dimension");
        data_.assign(static_cast<size_t>(rows) * static_cast<size_t>(cols), fill);
    }

    static Tensor2 of(int rows, int cols, std::initializer_list<double> v) {
        Tensor2 t(rows, cols);
        if (static_cast<size_t>(t.size()) != v.size())
            throw std::invalid_argument("Tensor2::of: element count mismatch");
        size_t i = 0;
        for (double x : v) t.data_[i++] = x;
        return t;
    }

    static Tensor2 row_of(std::initializer_list<double> v) {
        return of(1, static_cast<int>(v.size()), v);
    }

    static Tensor2 scalar(double x) { return of(1, 1, {x}); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int64_t size() const { return static_cast<int64_t>(rows_) * cols_; }
    bool empty() const { return size() == 0; }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    double* row_ptr(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
    const double* row_ptr(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Tensor2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    std::string shape_str() const {
        return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
    }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    void fill(double x) { data_.assign(data_.size(), x); }

    Tensor2 slice_cols(int off, int width) const {
        if (off < 0 || width < 0 || off + width > cols_)
            throw std::invalid_argument("Tensor2::slice_cols: range out of bounds");
        Tensor2 out(rows_, width);
        for (int r = 0; r < rows_; ++r) {
            const double* src = row_ptr(r) + off;
            double* dst = out.row_ptr(r);
            for (int c = 0; c < width; ++c) dst[c] = src[c];
        }
        return out;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline Tensor2 transpose(const Tensor2& a) {
    Tensor2 out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i) {
        const double* row = a.row_ptr(i);
        for (int j = 0; j < a.cols(); ++j) out(j, i) = row[j];
    }
    return out;
}

// C = op(A) * op(B), where op is optional transpose. Everything routes through
// the saxpy-style NN kernel (it vectorizes; dot-product reductions do not), so
// transposed operands are materialized first — O(n*m) against O(n*m*k) compute.
inline Tensor2 matmul(const Tensor2& a, const Tensor2& b, bool ta = false, bool tb = false) {
    const int am = ta ? a.cols() : a.rows();
    const int ak = ta ? a.rows() : a.cols();
    const int bk = tb ? b.cols() : b.rows();
    const int bn = tb ? b.rows() : b.cols();
    if (ak != bk)
        throw std::invalid_argument("matmul: inner dimension mismatch " + a.shape_str() +
                                    (ta ? "^T" : "") + " * " + b.shape_str() + (tb ? "^T" : ""));
    if (tb) return matmul(ta ? transpose(a) : a, transpose(b), false, false);
    Tensor2 c(am, bn, 0.0);
    if (!ta) {
        for (int i = 0; i < am; ++i) {
            const double* arow = a.row_ptr(i);
            double* crow = c.row_ptr(i);
            for (int k = 0; k < ak; ++k) {
                const double aik = arow[k];
                if (aik == 0.0) continue;
                const double* brow = b.row_ptr(k);
                for (int j = 0; j < bn; ++j) crow[j] += aik * brow[j];
            }
        }
    } else {
        for (int k = 0; k < a.rows(); ++k) {
            const double* arow = a.row_ptr(k);
            const double* brow = b.row_ptr(k);
            for (int i = 0; i < am; ++i) {
                const double aki = arow[i];
                if (aki == 0.0) continue;
                double* crow = c.row_ptr(i);
                for (int j = 0; j < bn; ++j) crow[j] += aki * brow[j];
            }
        }
    }
    return c;
}

inline Tensor2 vstack(const Tensor2& a, const Tensor2& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.cols() != b.cols())
        throw std::invalid_argument("vstack: column mismatch");
    Tensor2 out(a.rows() + b.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
    for (int r = 0; r < b.rows(); ++r)
        for (int c = 0; c < b.cols(); ++c) out(a.rows() + r, c) = b(r, c);
    return out;
}

inline Tensor2 hstack(const Tensor2& a, const Tensor2& b) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("hstack: row mismatch");
    Tensor2 out(a.rows(), a.cols() + b.cols());
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
        for (int c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b(r, c);
    }
    return out;
}

}  // namespace rctgan
