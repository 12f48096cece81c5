#pragma once

#include <cstdint>
#include <span>

#include "momask/matrix.hpp"

namespace momask {

// Data-parallel inner loops. Each has a serial reference implementation and
// an OpenMP variant; outputs are bit-identical for any thread count because
// every index writes its own slot and per-point arithmetic is serial.

// For each point row, the index of the nearest codebook entry under squared
// Euclidean distance (ties to the lowest index) and that distance.
void assign_nearest_serial(const Matrix& entries, const Matrix& points,
                           std::span<int32_t> out_idx, std::span<double> out_dist);
void assign_nearest_omp(const Matrix& entries, const Matrix& points,
                        std::span<int32_t> out_idx, std::span<double> out_dist);
void assign_nearest(const Matrix& entries, const Matrix& points,
                    std::span<int32_t> out_idx, std::span<double> out_dist);

int32_t nearest_index(const Matrix& entries, std::span<const double> point, double* dist_out = nullptr);

// Third backward difference per column, scaled: out(t, c) =
// (x(t,c) - 3x(t-1,c) + 3x(t-2,c) - x(t-3,c)) * scale for t in [3, T).
// out has shape (T-3) x C.
void third_difference_serial(const Matrix& x, double scale, Matrix& out);
void third_difference_omp(const Matrix& x, double scale, Matrix& out);
void third_difference(const Matrix& x, double scale, Matrix& out);

} // namespace momask
