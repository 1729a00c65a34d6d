// Benchmarks the OpenMP write-phase and read kernels against the serial
// reference on synthetic crossbars.

#include "mcbnn/crossbar.hpp"
#include "mcbnn/network.hpp"

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace mcbnn;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CrossbarState make_bench_crossbar(std::size_t rows, std::size_t cols, Rng& rng) {
    NetworkConfig cfg;
    cfg.layer_sizes = {rows - 1, cols};
    cfg.model = "silver";
    cfg.R0 = 20e3;
    cfg.kappa_scale = 0.15;
    const Calibration cal = calibrate(cfg);
    EncodingConstants enc = cfg.encoding;
    enc.kappa = cal.kappa;
    const DeviceModel& model = builtin_model("silver");
    CrossbarState cb = make_crossbar(rows, cols, model, cfg.R0, enc, cfg.timing, rng);
    cb.model.c1 = cal.model.c1;
    cb.model.c2 = cal.model.c2;
    return cb;
}

void bench_write(std::size_t rows, std::size_t cols, int reps) {
    Rng rng(7);
    CrossbarState a = make_bench_crossbar(rows, cols, rng);
    CrossbarState b = a;

    std::vector<double> x(rows - 1), y(cols);
    Rng vec_rng(11);
    for (auto& v : x) v = vec_rng.uniform(-0.24, 0.24);
    for (auto& v : y) v = vec_rng.uniform(-1.0, 1.0);

    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) write_phase_serial(a, x, y);
    const double t_serial = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) write_phase(b, x, y);
    const double t_parallel = seconds_since(t0);

    const bool identical = a.x == b.x;
    std::printf("write_phase %3zux%-3zu  serial %8.3f ms  omp %8.3f ms  speedup %.2fx  %s\n",
                rows, cols, 1e3 * t_serial / reps, 1e3 * t_parallel / reps,
                t_serial / t_parallel, identical ? "bit-identical" : "MISMATCH");
}

void bench_read(std::size_t rows, std::size_t cols, int reps) {
    Rng rng(7);
    const CrossbarState cb = make_bench_crossbar(rows, cols, rng);
    std::vector<double> x(rows - 1);
    Rng vec_rng(11);
    for (auto& v : x) v = vec_rng.uniform(-0.24, 0.24);

    auto t0 = std::chrono::steady_clock::now();
    double sink = 0;
    for (int r = 0; r < reps; ++r) sink += forward_read(cb, x)[0];
    const double t = seconds_since(t0);
    std::printf("forward_read %3zux%-3zu  %8.1f us/call  (checksum %g)\n", rows, cols,
                1e6 * t / reps, sink);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled\n");
#endif
    bench_write(8, 8, 4);
    bench_write(16, 16, 2);
    bench_write(32, 32, 1);
    bench_read(32, 32, 2000);
    bench_read(128, 64, 500);
    return 0;
}
