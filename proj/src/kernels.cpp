#include "popt/kernels.hpp"

#include <atomic>
#include <cmath>
#include <vector>

namespace popt::kernels {

namespace {

std::atomic<Exec> g_exec{Exec::Parallel};

// Below these sizes the OpenMP fork/join overhead dominates; the dispatchers
// fall back to the serial path. Results do not depend on the choice.
constexpr std::size_t kMinParallelElems = 8192;
constexpr std::size_t kMinParallelRows = 8;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double block_fold(const double* x, std::size_t n,
                         std::vector<double>& partials) {
    // Canonical order: per-block left fold, then left fold of the partials.
    std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    partials.assign(nblocks, 0.0);
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        std::size_t lo = blk * kReduceBlock;
        std::size_t hi = std::min(lo + kReduceBlock, n);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += x[i];
        partials[blk] = acc;
    }
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

}  // namespace

Exec exec_mode() { return g_exec.load(std::memory_order_relaxed); }
void set_exec_mode(Exec mode) { g_exec.store(mode, std::memory_order_relaxed); }

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
    double phi = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * phi;
}

// ---------------------------------------------------------------- serial

namespace serial {

double sum(std::span<const double> x) {
    std::vector<double> partials;
    return block_fold(x.data(), x.size(), partials);
}

double dot(std::span<const double> a, std::span<const double> b) {
    std::size_t n = a.size();
    std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partials(nblocks, 0.0);
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        std::size_t lo = blk * kReduceBlock;
        std::size_t hi = std::min(lo + kReduceBlock, n);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += a[i] * b[i];
        partials[blk] = acc;
    }
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

double sumsq(std::span<const double> x) { return dot(x, x); }

void scale(std::span<double> x, double a) {
    for (auto& v : x) v *= a;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void gelu_forward(std::span<const double> z, std::span<double> out) {
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = gelu(z[i]);
}

void gelu_backward(std::span<const double> z, std::span<const double> upstream,
                   std::span<double> out) {
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = upstream[i] * gelu_grad(z[i]);
}

void linear_forward(const double* a, const double* w, const double* bias,
                    double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t row = 0; row < m; ++row) {
        double* crow = c + row * n;
        if (bias != nullptr) {
            for (std::size_t j = 0; j < n; ++j) crow[j] = bias[j];
        } else {
            for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        }
        const double* arow = a + row * k;
        for (std::size_t i = 0; i < k; ++i) {
            double av = arow[i];
            const double* wrow = w + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * wrow[j];
        }
    }
}

void linear_backward_input(const double* dc, const double* w, double* da,
                           std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t row = 0; row < m; ++row) {
        const double* dcrow = dc + row * n;
        double* darow = da + row * k;
        for (std::size_t i = 0; i < k; ++i) {
            const double* wrow = w + i * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += dcrow[j] * wrow[j];
            darow[i] = acc;
        }
    }
}

void linear_backward_params(const double* a, const double* dc, double* dw,
                            double* db, std::size_t m, std::size_t k,
                            std::size_t n) {
    for (std::size_t i = 0; i < k; ++i) {
        double* dwrow = dw + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t row = 0; row < m; ++row) acc += a[row * k + i] * dc[row * n + j];
            dwrow[j] = acc;
        }
    }
    if (db != nullptr) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t row = 0; row < m; ++row) acc += dc[row * n + j];
            db[j] = acc;
        }
    }
}

double pairwise_distance_sum(const double* a, std::size_t na, const double* b,
                             std::size_t nb, std::size_t dim) {
    std::vector<double> partials(na, 0.0);
    for (std::size_t i = 0; i < na; ++i) {
        const double* ai = a + i * dim;
        double acc = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            const double* bj = b + j * dim;
            double d2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                double diff = ai[d] - bj[d];
                d2 += diff * diff;
            }
            acc += std::sqrt(d2);
        }
        partials[i] = acc;
    }
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

}  // namespace serial

// ---------------------------------------------------------------- OpenMP

namespace par {

double sum(std::span<const double> x) {
    const double* p = x.data();
    std::size_t n = x.size();
    std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partials(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (long long blk = 0; blk < static_cast<long long>(nblocks); ++blk) {
        std::size_t lo = static_cast<std::size_t>(blk) * kReduceBlock;
        std::size_t hi = std::min(lo + kReduceBlock, n);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += p[i];
        partials[static_cast<std::size_t>(blk)] = acc;
    }
    double total = 0.0;
    for (double v : partials) total += v;
    return total;
}

double dot(std::span<const double> a, std::span<const double> b) {
    const double* pa = a.data();
    const double* pb = b.data();
    std::size_t n = a.size();
    std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partials(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (long long blk = 0; blk < static_cast<long long>(nblocks); ++blk) {
        std::size_t lo = static_cast<std::size_t>(blk) * kReduceBlock;
        std::size_t hi = std::min(lo + kReduceBlock, n);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += pa[i] * pb[i];
        partials[static_cast<std::size_t>(blk)] = acc;
    }
    double total = 0.0;
    for (double v : partials) total += v;
    return total;
}

double sumsq(std::span<const double> x) { return dot(x, x); }

void scale(std::span<double> x, double a) {
    double* p = x.data();
    long long n = static_cast<long long>(x.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) p[i] *= a;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    const double* px = x.data();
    double* py = y.data();
    long long n = static_cast<long long>(x.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) py[i] += a * px[i];
}

void gelu_forward(std::span<const double> z, std::span<double> out) {
    const double* pz = z.data();
    double* po = out.data();
    long long n = static_cast<long long>(z.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) po[i] = gelu(pz[i]);
}

void gelu_backward(std::span<const double> z, std::span<const double> upstream,
                   std::span<double> out) {
    const double* pz = z.data();
    const double* pu = upstream.data();
    double* po = out.data();
    long long n = static_cast<long long>(z.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) po[i] = pu[i] * gelu_grad(pz[i]);
}

void linear_forward(const double* a, const double* w, const double* bias,
                    double* c, std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long row = 0; row < static_cast<long long>(m); ++row) {
        double* crow = c + static_cast<std::size_t>(row) * n;
        if (bias != nullptr) {
            for (std::size_t j = 0; j < n; ++j) crow[j] = bias[j];
        } else {
            for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        }
        const double* arow = a + static_cast<std::size_t>(row) * k;
        for (std::size_t i = 0; i < k; ++i) {
            double av = arow[i];
            const double* wrow = w + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * wrow[j];
        }
    }
}

void linear_backward_input(const double* dc, const double* w, double* da,
                           std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long row = 0; row < static_cast<long long>(m); ++row) {
        const double* dcrow = dc + static_cast<std::size_t>(row) * n;
        double* darow = da + static_cast<std::size_t>(row) * k;
        for (std::size_t i = 0; i < k; ++i) {
            const double* wrow = w + i * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += dcrow[j] * wrow[j];
            darow[i] = acc;
        }
    }
}

void linear_backward_params(const double* a, const double* dc, double* dw,
                            double* db, std::size_t m, std::size_t k,
                            std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(k); ++i) {
        double* dwrow = dw + static_cast<std::size_t>(i) * n;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t row = 0; row < m; ++row)
                acc += a[row * k + static_cast<std::size_t>(i)] * dc[row * n + j];
            dwrow[j] = acc;
        }
    }
    if (db != nullptr) {
#pragma omp parallel for schedule(static)
        for (long long j = 0; j < static_cast<long long>(n); ++j) {
            double acc = 0.0;
            for (std::size_t row = 0; row < m; ++row)
                acc += dc[row * n + static_cast<std::size_t>(j)];
            db[static_cast<std::size_t>(j)] = acc;
        }
    }
}

double pairwise_distance_sum(const double* a, std::size_t na, const double* b,
                             std::size_t nb, std::size_t dim) {
    std::vector<double> partials(na, 0.0);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(na); ++i) {
        const double* ai = a + static_cast<std::size_t>(i) * dim;
        double acc = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            const double* bj = b + j * dim;
            double d2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                double diff = ai[d] - bj[d];
                d2 += diff * diff;
            }
            acc += std::sqrt(d2);
        }
        partials[static_cast<std::size_t>(i)] = acc;
    }
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

}  // namespace par

// ------------------------------------------------------------ dispatchers

namespace {
inline bool want_parallel(std::size_t work) {
    return exec_mode() == Exec::Parallel && work >= kMinParallelElems;
}
}  // namespace

double sum(std::span<const double> x) {
    return want_parallel(x.size()) ? par::sum(x) : serial::sum(x);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return want_parallel(a.size()) ? par::dot(a, b) : serial::dot(a, b);
}

double sumsq(std::span<const double> x) { return dot(x, x); }

bool all_finite(std::span<const double> x) {
    for (double v : x) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void scale(std::span<double> x, double a) {
    if (want_parallel(x.size())) par::scale(x, a);
    else serial::scale(x, a);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    if (want_parallel(x.size())) par::axpy(a, x, y);
    else serial::axpy(a, x, y);
}

void gelu_forward(std::span<const double> z, std::span<double> out) {
    if (want_parallel(z.size())) par::gelu_forward(z, out);
    else serial::gelu_forward(z, out);
}

void gelu_backward(std::span<const double> z, std::span<const double> upstream,
                   std::span<double> out) {
    if (want_parallel(z.size())) par::gelu_backward(z, upstream, out);
    else serial::gelu_backward(z, upstream, out);
}

void linear_forward(const double* a, const double* w, const double* bias,
                    double* c, std::size_t m, std::size_t k, std::size_t n) {
    if (exec_mode() == Exec::Parallel && m >= kMinParallelRows && m * k * n >= kMinParallelElems)
        par::linear_forward(a, w, bias, c, m, k, n);
    else
        serial::linear_forward(a, w, bias, c, m, k, n);
}

void linear_backward_input(const double* dc, const double* w, double* da,
                           std::size_t m, std::size_t k, std::size_t n) {
    if (exec_mode() == Exec::Parallel && m >= kMinParallelRows && m * k * n >= kMinParallelElems)
        par::linear_backward_input(dc, w, da, m, k, n);
    else
        serial::linear_backward_input(dc, w, da, m, k, n);
}

void linear_backward_params(const double* a, const double* dc, double* dw,
                            double* db, std::size_t m, std::size_t k,
                            std::size_t n) {
    if (exec_mode() == Exec::Parallel && k >= kMinParallelRows && m * k * n >= kMinParallelElems)
        par::linear_backward_params(a, dc, dw, db, m, k, n);
    else
        serial::linear_backward_params(a, dc, dw, db, m, k, n);
}

double pairwise_distance_sum(const double* a, std::size_t na, const double* b,
                             std::size_t nb, std::size_t dim) {
    if (exec_mode() == Exec::Parallel && na >= kMinParallelRows && na * nb >= kMinParallelElems)
        return par::pairwise_distance_sum(a, na, b, nb, dim);
    return serial::pairwise_distance_sum(a, na, b, nb, dim);
}

}  // namespace popt::kernels
