// Times the serial reference kernels against the OpenMP ones and checks
// that the two paths agree bit-for-bit on the same inputs.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "popt/kernels.hpp"
#include "popt/rng.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int iters) {
    auto start = clock_type::now();
    for (int i = 0; i < iters; ++i) fn();
    auto stop = clock_type::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / iters;
}

void report(const char* name, double serial_ms, double par_ms, bool exact) {
    std::printf("%-24s serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx   bit-equal %s\n",
                name, serial_ms, par_ms, serial_ms / par_ms, exact ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    int iters = 5;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--iters") == 0 && i + 1 < argc) iters = std::atoi(argv[++i]);
    }

#ifdef _OPENMP
    std::printf("kernel_bench: OpenMP with %d threads, %d iterations per kernel\n",
                omp_get_max_threads(), iters);
#else
    std::printf("kernel_bench: built without OpenMP, comparing identical serial paths\n");
#endif

    popt::Rng rng(12345);
    namespace K = popt::kernels;

    {
        std::vector<double> x(1 << 22);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        double rs = 0.0, rp = 0.0;
        double ts = time_ms([&] { rs = K::serial::sumsq(x); }, iters);
        double tp = time_ms([&] { rp = K::par::sumsq(x); }, iters);
        report("sumsq (4M)", ts, tp, rs == rp);
    }
    {
        std::vector<double> a(1 << 22), b(1 << 22);
        for (auto& v : a) v = rng.uniform(-1.0, 1.0);
        for (auto& v : b) v = rng.uniform(-1.0, 1.0);
        double rs = 0.0, rp = 0.0;
        double ts = time_ms([&] { rs = K::serial::dot(a, b); }, iters);
        double tp = time_ms([&] { rp = K::par::dot(a, b); }, iters);
        report("dot (4M)", ts, tp, rs == rp);
    }
    {
        std::vector<double> z(1 << 21), o1(1 << 21), o2(1 << 21);
        for (auto& v : z) v = rng.uniform(-4.0, 4.0);
        double ts = time_ms([&] { K::serial::gelu_forward(z, o1); }, iters);
        double tp = time_ms([&] { K::par::gelu_forward(z, o2); }, iters);
        report("gelu_forward (2M)", ts, tp, o1 == o2);
    }
    {
        const std::size_t m = 256, k = 384, n = 256;
        std::vector<double> a(m * k), w(k * n), bias(n), c1(m * n), c2(m * n);
        for (auto& v : a) v = rng.uniform(-1.0, 1.0);
        for (auto& v : w) v = rng.uniform(-1.0, 1.0);
        for (auto& v : bias) v = rng.uniform(-1.0, 1.0);
        double ts = time_ms(
            [&] { K::serial::linear_forward(a.data(), w.data(), bias.data(), c1.data(), m, k, n); },
            iters);
        double tp = time_ms(
            [&] { K::par::linear_forward(a.data(), w.data(), bias.data(), c2.data(), m, k, n); },
            iters);
        report("linear_forward 256x384x256", ts, tp, c1 == c2);

        std::vector<double> dw1(k * n), dw2(k * n), db1(n), db2(n);
        ts = time_ms(
            [&] { K::serial::linear_backward_params(a.data(), c1.data(), dw1.data(), db1.data(), m, k, n); },
            iters);
        tp = time_ms(
            [&] { K::par::linear_backward_params(a.data(), c2.data(), dw2.data(), db2.data(), m, k, n); },
            iters);
        report("linear_backward_params", ts, tp, dw1 == dw2 && db1 == db2);

        std::vector<double> da1(m * k), da2(m * k);
        ts = time_ms(
            [&] { K::serial::linear_backward_input(c1.data(), w.data(), da1.data(), m, k, n); },
            iters);
        tp = time_ms(
            [&] { K::par::linear_backward_input(c2.data(), w.data(), da2.data(), m, k, n); },
            iters);
        report("linear_backward_input", ts, tp, da1 == da2);
    }
    {
        const std::size_t na = 2048, nb = 2048, dim = 2;
        std::vector<double> a(na * dim), b(nb * dim);
        for (auto& v : a) v = rng.normal();
        for (auto& v : b) v = rng.normal();
        double rs = 0.0, rp = 0.0;
        double ts = time_ms(
            [&] { rs = K::serial::pairwise_distance_sum(a.data(), na, b.data(), nb, dim); }, iters);
        double tp = time_ms(
            [&] { rp = K::par::pairwise_distance_sum(a.data(), na, b.data(), nb, dim); }, iters);
        report("pairwise_distance 2048^2", ts, tp, rs == rp);
    }
    return 0;
}
