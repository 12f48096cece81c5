#pragma once

#include <cstdint>

#include "momask/matrix.hpp"
#include "momask/rng.hpp"

namespace momask {

struct KMeansResult {
    Matrix centroids;               // k x d
    std::vector<int32_t> assignment; // per point
    std::vector<double> cluster_sizes;
};

// Lloyd's algorithm with k-means++ seeding. Deterministic per rng state:
// seeding draws sequentially, the assignment step runs in the parallel
// kernel (per-point, order-free), accumulation is serial. Empty clusters
// keep their previous centroid. Stops when assignments are stable or after
// max_iters.
KMeansResult kmeans(const Matrix& points, size_t k, Rng& rng, int max_iters = 50);

} // namespace momask
