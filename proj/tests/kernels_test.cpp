#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "popt/kernels.hpp"
#include "popt/rng.hpp"

using namespace popt;

namespace {
std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}
}  // namespace

TEST_CASE("reductions: openmp path is bit-identical to the serial reference") {
    Rng rng(7);
    // sizes straddling the reduction block boundary
    for (std::size_t n : {std::size_t{1}, std::size_t{5}, kernels::kReduceBlock - 1,
                          kernels::kReduceBlock, kernels::kReduceBlock + 1,
                          3 * kernels::kReduceBlock + 17, std::size_t{100000}}) {
        auto a = random_vec(n, rng);
        auto b = random_vec(n, rng);
        CHECK(kernels::serial::sum(a) == kernels::par::sum(a));
        CHECK(kernels::serial::dot(a, b) == kernels::par::dot(a, b));
        CHECK(kernels::serial::sumsq(a) == kernels::par::sumsq(a));
    }
}

TEST_CASE("reductions agree with a long-double fold") {
    Rng rng(11);
    auto a = random_vec(50000, rng);
    long double ref = 0.0L;
    for (double v : a) ref += static_cast<long double>(v);
    CHECK(kernels::sum(a) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
}

TEST_CASE("elementwise kernels match across paths") {
    Rng rng(13);
    auto z = random_vec(20000, rng, -4.0, 4.0);
    auto up = random_vec(20000, rng);

    std::vector<double> o1(z.size()), o2(z.size());
    kernels::serial::gelu_forward(z, o1);
    kernels::par::gelu_forward(z, o2);
    CHECK(o1 == o2);

    kernels::serial::gelu_backward(z, up, o1);
    kernels::par::gelu_backward(z, up, o2);
    CHECK(o1 == o2);

    auto x1 = z;
    auto x2 = z;
    kernels::serial::scale(x1, 0.37);
    kernels::par::scale(x2, 0.37);
    CHECK(x1 == x2);

    kernels::serial::axpy(1.7, up, x1);
    kernels::par::axpy(1.7, up, x2);
    CHECK(x1 == x2);
}

TEST_CASE("gelu value and derivative sanity") {
    CHECK(kernels::gelu(0.0) == 0.0);
    CHECK(kernels::gelu(10.0) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(kernels::gelu(-10.0) == doctest::Approx(0.0).epsilon(1e-12));
    // derivative against central differences
    for (double x : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
        double h = 1e-6;
        double fd = (kernels::gelu(x + h) - kernels::gelu(x - h)) / (2.0 * h);
        CHECK(kernels::gelu_grad(x) == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("linear kernels match across paths") {
    Rng rng(17);
    const std::size_t m = 33, k = 47, n = 29;
    auto a = random_vec(m * k, rng);
    auto w = random_vec(k * n, rng);
    auto bias = random_vec(n, rng);
    auto dc = random_vec(m * n, rng);

    std::vector<double> c1(m * n), c2(m * n);
    kernels::serial::linear_forward(a.data(), w.data(), bias.data(), c1.data(), m, k, n);
    kernels::par::linear_forward(a.data(), w.data(), bias.data(), c2.data(), m, k, n);
    CHECK(c1 == c2);

    std::vector<double> da1(m * k), da2(m * k);
    kernels::serial::linear_backward_input(dc.data(), w.data(), da1.data(), m, k, n);
    kernels::par::linear_backward_input(dc.data(), w.data(), da2.data(), m, k, n);
    CHECK(da1 == da2);

    std::vector<double> dw1(k * n), dw2(k * n), db1(n), db2(n);
    kernels::serial::linear_backward_params(a.data(), dc.data(), dw1.data(), db1.data(), m, k, n);
    kernels::par::linear_backward_params(a.data(), dc.data(), dw2.data(), db2.data(), m, k, n);
    CHECK(dw1 == dw2);
    CHECK(db1 == db2);
}

TEST_CASE("linear_forward against a naive triple loop") {
    Rng rng(19);
    const std::size_t m = 5, k = 7, n = 3;
    auto a = random_vec(m * k, rng);
    auto w = random_vec(k * n, rng);
    auto bias = random_vec(n, rng);

    std::vector<double> c(m * n);
    kernels::linear_forward(a.data(), w.data(), bias.data(), c.data(), m, k, n);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = bias[j];
            for (std::size_t i = 0; i < k; ++i) acc += a[r * k + i] * w[i * n + j];
            CHECK(c[r * n + j] == doctest::Approx(acc).epsilon(1e-13));
        }
    }
}

TEST_CASE("pairwise distance sum matches across paths and a direct loop") {
    Rng rng(23);
    const std::size_t na = 61, nb = 53, dim = 2;
    auto a = random_vec(na * dim, rng);
    auto b = random_vec(nb * dim, rng);

    double rs = kernels::serial::pairwise_distance_sum(a.data(), na, b.data(), nb, dim);
    double rp = kernels::par::pairwise_distance_sum(a.data(), na, b.data(), nb, dim);
    CHECK(rs == rp);

    long double ref = 0.0L;
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            long double dx = a[i * dim] - b[j * dim];
            long double dy = a[i * dim + 1] - b[j * dim + 1];
            ref += sqrtl(dx * dx + dy * dy);
        }
    }
    CHECK(rs == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
}

TEST_CASE("all_finite flags inf and nan") {
    std::vector<double> ok{1.0, -2.0, 0.0};
    CHECK(kernels::all_finite(ok));
    std::vector<double> bad1{1.0, std::numeric_limits<double>::infinity()};
    std::vector<double> bad2{std::nan(""), 0.0};
    CHECK_FALSE(kernels::all_finite(bad1));
    CHECK_FALSE(kernels::all_finite(bad2));
}
