#pragma once

#include "momask/matrix.hpp"

namespace momask {

struct EigenResult {
    std::vector<double> values; // ascending
    Matrix vectors;             // column k pairs with values[k]
};

// Cyclic Jacobi for symmetric matrices: fixed sweep order, stops when the
// off-diagonal Frobenius norm drops below tol or after max_sweeps. Plenty
// for the <= 64 dim feature covariances this project produces.
EigenResult jacobi_eigen(const Matrix& sym, double tol = 1e-12, int max_sweeps = 100);

double offdiag_norm(const Matrix& m);

// V diag(sqrt(max(eig,0))) V^T
Matrix symmetric_sqrt(const Matrix& sym);

// sum_k sqrt(max(eig_k, 0))
double sqrt_eigen_trace(const Matrix& sym);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

} // namespace momask
