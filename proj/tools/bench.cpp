// Timing harness for the serial vs OpenMP kernel variants. Checks the
// bit-identical contract on the way through, so a fast-but-wrong variant
// cannot post a time.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "momask/kernels.hpp"
#include "momask/parallel.hpp"
#include "momask/rng.hpp"

using namespace momask;

namespace {

using clock_type = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn, int reps) {
    fn(); // warm-up
    auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) fn();
    auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

Matrix random_matrix(size_t rows, size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal();
    return m;
}

void bench_assign(size_t points, size_t entries, size_t dim, int reps) {
    Rng rng(11);
    Matrix cb = random_matrix(entries, dim, rng);
    Matrix pts = random_matrix(points, dim, rng);
    std::vector<int32_t> idx_s(points), idx_p(points);
    std::vector<double> dist_s(points), dist_p(points);

    double serial = time_ms([&] { assign_nearest_serial(cb, pts, idx_s, dist_s); }, reps);
    double omp = time_ms([&] { assign_nearest_omp(cb, pts, idx_p, dist_p); }, reps);

    bool same = std::memcmp(idx_s.data(), idx_p.data(), points * sizeof(int32_t)) == 0 &&
                std::memcmp(dist_s.data(), dist_p.data(), points * sizeof(double)) == 0;
    std::printf("assign_nearest  %6zu pts x %4zu entries x %3zu dim  serial %8.3f ms  omp %8.3f ms  x%.2f  %s\n",
                points, entries, dim, serial, omp, serial / omp, same ? "identical" : "MISMATCH");
}

void bench_third_diff(size_t frames, size_t cols, int reps) {
    Rng rng(13);
    Matrix x = random_matrix(frames, cols, rng);
    Matrix out_s(frames - 3, cols), out_p(frames - 3, cols);

    double serial = time_ms([&] { third_difference_serial(x, 8000.0, out_s); }, reps);
    double omp = time_ms([&] { third_difference_omp(x, 8000.0, out_p); }, reps);

    bool same = std::memcmp(out_s.data.data(), out_p.data.data(),
                            out_s.data.size() * sizeof(double)) == 0;
    std::printf("third_difference %5zu x %4zu                        serial %8.3f ms  omp %8.3f ms  x%.2f  %s\n",
                frames, cols, serial, omp, serial / omp, same ? "identical" : "MISMATCH");
}

} // namespace

int main() {
    std::printf("worker cap: %d (0 = runtime default)\n", jobs());
    bench_assign(2000, 64, 32, 20);
    bench_assign(20000, 512, 64, 5);
    bench_assign(50000, 1024, 128, 2);
    bench_third_diff(2000, 64, 50);
    bench_third_diff(20000, 512, 10);
    bench_third_diff(100000, 1024, 3);
    return 0;
}
