// Timing comparison between the OpenMP kernels and their serial reference.
// Results must agree bit-for-bit; speed is whatever the machine gives.

#include <omp.h>

#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#include "grasplab/kernels.hpp"

namespace gk = grasplab::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = omp_get_wtime();
        f();
        best = std::min(best, omp_get_wtime() - t0);
    }
    return best;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::string_view(argv[1]) == "--quick";
    const int reps = quick ? 2 : 5;
    bool all_equal = true;

    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-26s %12s %12s %9s  %s\n", "kernel", "serial [s]", "openmp [s]", "speedup",
                "bit-equal");

    {
        const std::size_t n = quick ? 96 : 384;
        const auto a = random_vec(n * n, 1);
        const auto b = random_vec(n * n, 2);
        std::vector<double> c_serial(n * n), c_par(n * n);
        const double ts = time_best_of(
            reps, [&] { gk::serial::gemm(a.data(), b.data(), c_serial.data(), n, n, n); });
        const double tp =
            time_best_of(reps, [&] { gk::gemm(a.data(), b.data(), c_par.data(), n, n, n); });
        const bool eq = bit_equal(c_serial, c_par);
        all_equal = all_equal && eq;
        std::printf("gemm %4zux%-4zu             %12.6f %12.6f %8.2fx  %s\n", n, n, ts, tp,
                    ts / tp, eq ? "yes" : "NO");
    }

    {
        const std::size_t C = 3, H = quick ? 48 : 128, W = H, OC = 8, K = 3;
        const auto in = random_vec(C * H * W, 3);
        const auto k = random_vec(OC * C * K * K, 4);
        const std::size_t OH = H - K + 1, OW = W - K + 1;
        std::vector<double> out_serial(OC * OH * OW), out_par(OC * OH * OW);
        const double ts = time_best_of(reps, [&] {
            gk::serial::conv2d(in.data(), k.data(), nullptr, out_serial.data(), C, H, W, OC, K,
                               K, 1);
        });
        const double tp = time_best_of(reps, [&] {
            gk::conv2d(in.data(), k.data(), nullptr, out_par.data(), C, H, W, OC, K, K, 1);
        });
        const bool eq = bit_equal(out_serial, out_par);
        all_equal = all_equal && eq;
        std::printf("conv2d %zux%zux%-4zu %8s %12.6f %12.6f %8.2fx  %s\n", C, H, W, "", ts, tp,
                    ts / tp, eq ? "yes" : "NO");
    }

    {
        const std::size_t C = 8, H = quick ? 64 : 256, W = H;
        const auto in = random_vec(C * H * W, 5);
        std::vector<double> out_serial(C * (H / 2) * (W / 2)), out_par(out_serial.size());
        const double ts = time_best_of(reps, [&] {
            gk::serial::maxpool2d(in.data(), out_serial.data(), nullptr, C, H, W, 2, 2);
        });
        const double tp = time_best_of(
            reps, [&] { gk::maxpool2d(in.data(), out_par.data(), nullptr, C, H, W, 2, 2); });
        const bool eq = bit_equal(out_serial, out_par);
        all_equal = all_equal && eq;
        std::printf("maxpool2d %zux%zux%-4zu %5s %12.6f %12.6f %8.2fx  %s\n", C, H, W, "", ts,
                    tp, ts / tp, eq ? "yes" : "NO");
    }

    if (!all_equal) {
        std::printf("FAIL: parallel kernels diverged from the serial reference\n");
        return 1;
    }
    return 0;
}
