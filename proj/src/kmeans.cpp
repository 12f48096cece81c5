#include "momask/kmeans.hpp"

#include <algorithm>
#include <stdexcept>

#include "momask/kernels.hpp"

namespace momask {

namespace {

Matrix seed_plus_plus(const Matrix& points, size_t k, Rng& rng) {
    const size_t m = points.rows, d = points.cols;
    Matrix centroids(k, d);
    std::vector<double> dist2(m);

    size_t first = static_cast<size_t>(rng.uniform_int(m));
    std::copy_n(points.row(first).data(), d, centroids.row(0).data());
    for (size_t i = 0; i < m; ++i)
        dist2[i] = squared_distance(points.row(i), centroids.row(0));

    for (size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : dist2) total += v;
        size_t pick;
        if (total > 0.0) {
            pick = rng.categorical(dist2);
        } else {
            // fewer distinct points than centroids: duplicate uniformly
            pick = static_cast<size_t>(rng.uniform_int(m));
        }
        std::copy_n(points.row(pick).data(), d, centroids.row(c).data());
        for (size_t i = 0; i < m; ++i)
            dist2[i] = std::min(dist2[i], squared_distance(points.row(i), centroids.row(c)));
    }
    return centroids;
}

} // namespace

KMeansResult kmeans(const Matrix& points, size_t k, Rng& rng, int max_iters) {
    if (points.rows == 0) throw std::invalid_argument("kmeans: empty data");
    if (k == 0) throw std::invalid_argument("kmeans: k must be >= 1");
    const size_t m = points.rows, d = points.cols;

    KMeansResult res;
    res.centroids = seed_plus_plus(points, k, rng);
    res.assignment.assign(m, -1);
    std::vector<double> dist(m);
    std::vector<int32_t> next(m);

    for (int it = 0; it < max_iters; ++it) {
        assign_nearest(res.centroids, points, next, dist);
        if (next == res.assignment) break;
        res.assignment = next;

        Matrix sums(k, d);
        std::vector<double> counts(k, 0.0);
        for (size_t i = 0; i < m; ++i) {
            auto p = points.row(i);
            auto s = sums.row(static_cast<size_t>(res.assignment[i]));
            for (size_t c = 0; c < d; ++c) s[c] += p[c];
            counts[static_cast<size_t>(res.assignment[i])] += 1.0;
        }
        for (size_t j = 0; j < k; ++j) {
            if (counts[j] == 0.0) continue; // empty cluster keeps its centroid
            auto ctr = res.centroids.row(j);
            auto s = sums.row(j);
            for (size_t c = 0; c < d; ++c) ctr[c] = s[c] / counts[j];
        }
    }

    assign_nearest(res.centroids, points, res.assignment, dist);
    res.cluster_sizes.assign(k, 0.0);
    for (int32_t a : res.assignment) res.cluster_sizes[static_cast<size_t>(a)] += 1.0;
    return res;
}

} // namespace momask
