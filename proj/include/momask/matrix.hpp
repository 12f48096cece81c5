#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace momask {

// Dense row-major matrix of doubles. Small and value-semantic; everything at
// desk scale fits comfortably in memory.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(size_t r, size_t c) { return data[r * cols + c]; }
    double operator()(size_t r, size_t c) const { return data[r * cols + c]; }

    std::span<double> row(size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(size_t r) const { return {data.data() + r * cols, cols}; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

inline double squared_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

} // namespace momask
