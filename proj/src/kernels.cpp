#include "momask/kernels.hpp"

#include <cassert>
#include <stdexcept>

#include "momask/parallel.hpp"

namespace momask {

namespace {

inline void assign_one(const Matrix& entries, const Matrix& points, size_t i,
                       std::span<int32_t> out_idx, std::span<double> out_dist) {
    auto p = points.row(i);
    int32_t best = 0;
    double best_d = squared_distance(entries.row(0), p);
    for (size_t k = 1; k < entries.rows; ++k) {
        double d = squared_distance(entries.row(k), p);
        if (d < best_d) { // strict: ties keep the lowest index
            best_d = d;
            best = static_cast<int32_t>(k);
        }
    }
    out_idx[i] = best;
    out_dist[i] = best_d;
}

inline void check_assign_args(const Matrix& entries, const Matrix& points,
                              std::span<int32_t> out_idx, std::span<double> out_dist) {
    if (entries.rows == 0) throw std::invalid_argument("assign_nearest: empty codebook");
    if (entries.cols != points.cols)
        throw std::invalid_argument("assign_nearest: dimension mismatch");
    assert(out_idx.size() == points.rows && out_dist.size() == points.rows);
}

} // namespace

void assign_nearest_serial(const Matrix& entries, const Matrix& points,
                           std::span<int32_t> out_idx, std::span<double> out_dist) {
    check_assign_args(entries, points, out_idx, out_dist);
    for (size_t i = 0; i < points.rows; ++i) assign_one(entries, points, i, out_idx, out_dist);
}

void assign_nearest_omp(const Matrix& entries, const Matrix& points,
                        std::span<int32_t> out_idx, std::span<double> out_dist) {
    check_assign_args(entries, points, out_idx, out_dist);
    parallel_for(points.rows, [&](size_t i) { assign_one(entries, points, i, out_idx, out_dist); });
}

void assign_nearest(const Matrix& entries, const Matrix& points,
                    std::span<int32_t> out_idx, std::span<double> out_dist) {
    assign_nearest_omp(entries, points, out_idx, out_dist);
}

int32_t nearest_index(const Matrix& entries, std::span<const double> point, double* dist_out) {
    if (entries.rows == 0) throw std::invalid_argument("nearest_index: empty codebook");
    if (entries.cols != point.size())
        throw std::invalid_argument("nearest_index: dimension mismatch");
    int32_t best = 0;
    double best_d = squared_distance(entries.row(0), point);
    for (size_t k = 1; k < entries.rows; ++k) {
        double d = squared_distance(entries.row(k), point);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int32_t>(k);
        }
    }
    if (dist_out) *dist_out = best_d;
    return best;
}

namespace {

inline void third_diff_row(const Matrix& x, double scale, Matrix& out, size_t t) {
    for (size_t c = 0; c < x.cols; ++c)
        out(t, c) = (x(t + 3, c) - 3.0 * x(t + 2, c) + 3.0 * x(t + 1, c) - x(t, c)) * scale;
}

} // namespace

void third_difference_serial(const Matrix& x, double scale, Matrix& out) {
    if (x.rows < 4) throw std::invalid_argument("third_difference: need at least 4 rows");
    out = Matrix(x.rows - 3, x.cols);
    for (size_t t = 0; t < out.rows; ++t) third_diff_row(x, scale, out, t);
}

void third_difference_omp(const Matrix& x, double scale, Matrix& out) {
    if (x.rows < 4) throw std::invalid_argument("third_difference: need at least 4 rows");
    out = Matrix(x.rows - 3, x.cols);
    parallel_for(out.rows, [&](size_t t) { third_diff_row(x, scale, out, t); });
}

void third_difference(const Matrix& x, double scale, Matrix& out) {
    third_difference_omp(x, scale, out);
}

} // namespace momask
