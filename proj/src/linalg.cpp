#include "momask/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace momask {

double offdiag_norm(const Matrix& m) {
    double s = 0.0;
    for (size_t i = 0; i < m.rows; ++i)
        for (size_t j = 0; j < m.cols; ++j)
            if (i != j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

EigenResult jacobi_eigen(const Matrix& sym, double tol, int max_sweeps) {
    if (sym.rows != sym.cols) throw std::invalid_argument("jacobi_eigen: matrix not square");
    const size_t n = sym.rows;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (std::abs(sym(i, j) - sym(j, i)) > 1e-9 * std::max(1.0, std::abs(sym(i, j))))
                throw std::invalid_argument("jacobi_eigen: matrix not symmetric");

    Matrix a = sym;
    // enforce exact symmetry so the rotations see one consistent value
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }

    Matrix vec(n, n);
    for (size_t i = 0; i < n; ++i) vec(i, i) = 1.0;

    for (int sweep = 0; sweep < max_sweeps && offdiag_norm(a) >= tol; ++sweep) {
        for (size_t p = 0; p + 1 < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (apq == 0.0) continue;
                double diff = a(q, q) - a(p, p);
                double t;
                if (std::abs(apq) * 100.0 + std::abs(diff) == std::abs(diff)) {
                    t = apq / diff; // rotation angle tiny, first-order form
                } else {
                    double theta = 0.5 * diff / apq;
                    t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                    if (theta < 0.0) t = -t;
                }
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;

                double app = a(p, p), aqq = a(q, q);
                a(p, p) = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a(q, q) = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    double arp = a(r, p), arq = a(r, q);
                    a(r, p) = c * arp - s * arq;
                    a(p, r) = a(r, p);
                    a(r, q) = s * arp + c * arq;
                    a(q, r) = a(r, q);
                }
                for (size_t r = 0; r < n; ++r) {
                    double vrp = vec(r, p), vrq = vec(r, q);
                    vec(r, p) = c * vrp - s * vrq;
                    vec(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }

    EigenResult res;
    res.values.resize(n);
    for (size_t i = 0; i < n; ++i) res.values[i] = a(i, i);

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t x, size_t y) { return res.values[x] < res.values[y]; });

    EigenResult sorted;
    sorted.values.resize(n);
    sorted.vectors = Matrix(n, n);
    for (size_t k = 0; k < n; ++k) {
        sorted.values[k] = res.values[order[k]];
        for (size_t r = 0; r < n; ++r) sorted.vectors(r, k) = vec(r, order[k]);
    }
    return sorted;
}

Matrix symmetric_sqrt(const Matrix& sym) {
    EigenResult eig = jacobi_eigen(sym);
    const size_t n = sym.rows;
    Matrix out(n, n);
    for (size_t k = 0; k < n; ++k) {
        double root = std::sqrt(std::max(eig.values[k], 0.0));
        if (root == 0.0) continue;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                out(i, j) += root * eig.vectors(i, k) * eig.vectors(j, k);
    }
    return out;
}

double sqrt_eigen_trace(const Matrix& sym) {
    EigenResult eig = jacobi_eigen(sym);
    double s = 0.0;
    for (double v : eig.values) s += std::sqrt(std::max(v, 0.0));
    return s;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
    Matrix out(a.rows, b.cols);
    for (size_t i = 0; i < a.rows; ++i)
        for (size_t k = 0; k < a.cols; ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (size_t i = 0; i < m.rows; ++i)
        for (size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
    return out;
}

} // namespace momask
