#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace gmed {

// Dense row-major matrix. Small enough to pass by value; all training-time
// shapes are (batch x dim) or (out x in).
template <typename T>
struct Mat {
    std::vector<T> data;
    std::size_t rows = 0, cols = 0;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, T fill = T{0}) : data(r * c, fill), rows(r), cols(c) {}

    T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    T* row(std::size_t i) { return data.data() + i * cols; }
    const T* row(std::size_t i) const { return data.data() + i * cols; }
    std::size_t size() const { return data.size(); }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

// C = A * B^T, A: (m x k), B: (n x k), C: (m x n). Row-dot-row keeps both
// operands sequential in memory. The loops are register-blocked 4x4: each
// block runs 16 independent dot-product accumulators and reuses every loaded
// element four times. Each accumulator still sums over k strictly in order,
// so results are bitwise identical to the one-dot-at-a-time loop.
template <typename T>
void matmul_abt(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
    assert(a.cols == b.cols);
    c = Mat<T>(a.rows, b.rows);
    constexpr std::size_t IB = 4, JB = 4;
    const std::size_t kk = a.cols;
    std::size_t i = 0;
    for (; i + IB <= a.rows; i += IB) {
        const T* ar[IB];
        for (std::size_t u = 0; u < IB; ++u) ar[u] = a.row(i + u);
        std::size_t j = 0;
        for (; j + JB <= b.rows; j += JB) {
            const T* br[JB];
            for (std::size_t v = 0; v < JB; ++v) br[v] = b.row(j + v);
            T acc[IB][JB] = {};
            for (std::size_t k = 0; k < kk; ++k) {
                T bv[JB];
                for (std::size_t v = 0; v < JB; ++v) bv[v] = br[v][k];
                for (std::size_t u = 0; u < IB; ++u) {
                    const T av = ar[u][k];
                    for (std::size_t v = 0; v < JB; ++v) acc[u][v] += av * bv[v];
                }
            }
            for (std::size_t u = 0; u < IB; ++u)
                for (std::size_t v = 0; v < JB; ++v) c(i + u, j + v) = acc[u][v];
        }
        for (; j < b.rows; ++j) {
            const T* br = b.row(j);
            T acc[IB] = {};
            for (std::size_t k = 0; k < kk; ++k) {
                const T bv = br[k];
                for (std::size_t u = 0; u < IB; ++u) acc[u] += ar[u][k] * bv;
            }
            for (std::size_t u = 0; u < IB; ++u) c(i + u, j) = acc[u];
        }
    }
    for (; i < a.rows; ++i) {
        const T* ar = a.row(i);
        std::size_t j = 0;
        for (; j + JB <= b.rows; j += JB) {
            const T* br[JB];
            for (std::size_t v = 0; v < JB; ++v) br[v] = b.row(j + v);
            T acc[JB] = {};
            for (std::size_t k = 0; k < kk; ++k) {
                const T av = ar[k];
                for (std::size_t v = 0; v < JB; ++v) acc[v] += av * br[v][k];
            }
            for (std::size_t v = 0; v < JB; ++v) c(i, j + v) = acc[v];
        }
        for (; j < b.rows; ++j) {
            const T* br = b.row(j);
            T acc = 0;
            for (std::size_t k = 0; k < kk; ++k) acc += ar[k] * br[k];
            c(i, j) = acc;
        }
    }
}

// C = A * B, A: (m x k), B: (k x n). ikj order so the inner loop streams
// rows of B and C.
template <typename T>
void matmul_ab(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
    assert(a.cols == b.rows);
    c = Mat<T>(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        T* cr = c.row(i);
        const T* ar = a.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const T av = ar[k];
            const T* br = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) cr[j] += av * br[j];
        }
    }
}

// C += A^T * B, A: (m x k), B: (m x n), C: (k x n). Accumulates outer
// products row by row; used for weight gradients.
template <typename T>
void matmul_atb_acc(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
    assert(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const T* ar = a.row(i);
        const T* br = b.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const T av = ar[k];
            if (av == T{0}) continue;
            T* cr = c.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) cr[j] += av * br[j];
        }
    }
}

template <typename T>
double dot(const std::vector<T>& a, const std::vector<T>& b) {
    assert(a.size() == b.size());
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += double(a[i]) * double(b[i]);
    return acc;
}

template <typename T>
double l2_norm(const std::vector<T>& a) {
    return std::sqrt(dot(a, a));
}

}  // namespace gmed
