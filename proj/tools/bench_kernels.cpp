// Compares the OpenMP kernels against their serial reference counterparts:
// same outputs bit for bit, wall-clock side by side.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "feedtune/datasets.hpp"
#include "feedtune/mlp.hpp"
#include "feedtune/nes.hpp"

using namespace feedtune;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
double time_loop(std::size_t reps, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reps; ++r) fn();
    return seconds_since(t0) / static_cast<double>(reps);
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t rows = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
    const std::size_t reps = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 5;

#ifdef _OPENMP
    std::printf("openmp enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("openmp disabled at build time\n");
#endif

    GaussianBlobsSpec spec;
    spec.per_class = rows / spec.classes;
    spec.seed = 7;
    const LabeledDataset data = gen_gaussian_blobs(spec);
    const MlpModel model = make_mlp(2, {64, 128}, spec.classes, false, SeededRng(3));

    const Matrix ref = forward_serial(model, data.features);
    const Matrix par = forward(model, data.features);
    if (!(ref == par)) {
        std::printf("FAIL: parallel forward does not match serial reference\n");
        return 1;
    }
    const double t_serial = time_loop(reps, [&] { (void)forward_serial(model, data.features); });
    const double t_parallel = time_loop(reps, [&] { (void)forward(model, data.features); });
    std::printf("forward   %zu rows: serial %8.3f ms | openmp %8.3f ms | speedup %.2fx\n",
                data.size(), 1e3 * t_serial, 1e3 * t_parallel, t_serial / t_parallel);

    const std::size_t dim = 4096, half = 64;
    SeededRng rng_a(11), rng_b(11);
    const auto ga = gaussian_batch_serial(rng_a, dim, half);
    const auto gb = gaussian_batch(rng_b, dim, half);
    if (ga != gb) {
        std::printf("FAIL: parallel gaussian batch does not match serial reference\n");
        return 1;
    }
    SeededRng rng_c(12), rng_d(12);
    const double t_gs = time_loop(reps, [&] { (void)gaussian_batch_serial(rng_c, dim, half); });
    const double t_gp = time_loop(reps, [&] { (void)gaussian_batch(rng_d, dim, half); });
    std::printf("gaussian  %zux%zu:      serial %8.3f ms | openmp %8.3f ms | speedup %.2fx\n",
                half, dim, 1e3 * t_gs, 1e3 * t_gp, t_gs / t_gp);

    return 0;
}
