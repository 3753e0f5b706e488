#pragma once

#include <cstddef>
#include <span>

namespace popt::kernels {

/// Which implementation the dispatching entry points run.
enum class Exec { Serial, Parallel };

Exec exec_mode();
void set_exec_mode(Exec mode);

/// Reductions are summed block-by-block with a fixed block size, then the
/// block partials are folded left to right. Both the serial and the OpenMP
/// paths follow this one association order, so results are bit-identical
/// across the two paths and across thread counts.
inline constexpr std::size_t kReduceBlock = 4096;

// Serial reference implementations. Plain loops over the canonical order;
// the unit tests hold the OpenMP path to bit-equality against these.
namespace serial {

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double sumsq(std::span<const double> x);

void scale(std::span<double> x, double a);
void axpy(double a, std::span<const double> x, std::span<double> y);

void gelu_forward(std::span<const double> z, std::span<double> out);
void gelu_backward(std::span<const double> z, std::span<const double> upstream,
                   std::span<double> out);

// C[m x n] = A[m x k] * W[k x n] + bias[n]  (bias may be empty)
void linear_forward(const double* a, const double* w, const double* bias,
                    double* c, std::size_t m, std::size_t k, std::size_t n);
// dA[m x k] = dC[m x n] * W^T
void linear_backward_input(const double* dc, const double* w, double* da,
                           std::size_t m, std::size_t k, std::size_t n);
// dW[k x n] = A^T * dC ; db[n] = column sums of dC (db may be null)
void linear_backward_params(const double* a, const double* dc, double* dw,
                            double* db, std::size_t m, std::size_t k,
                            std::size_t n);

// Sum of Euclidean distances over all (row of A, row of B) pairs.
double pairwise_distance_sum(const double* a, std::size_t na, const double* b,
                             std::size_t nb, std::size_t dim);

}  // namespace serial

// OpenMP implementations, bit-identical to the serial reference.
namespace par {

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double sumsq(std::span<const double> x);

void scale(std::span<double> x, double a);
void axpy(double a, std::span<const double> x, std::span<double> y);

void gelu_forward(std::span<const double> z, std::span<double> out);
void gelu_backward(std::span<const double> z, std::span<const double> upstream,
                   std::span<double> out);

void linear_forward(const double* a, const double* w, const double* bias,
                    double* c, std::size_t m, std::size_t k, std::size_t n);
void linear_backward_input(const double* dc, const double* w, double* da,
                           std::size_t m, std::size_t k, std::size_t n);
void linear_backward_params(const double* a, const double* dc, double* dw,
                            double* db, std::size_t m, std::size_t k,
                            std::size_t n);

double pairwise_distance_sum(const double* a, std::size_t na, const double* b,
                             std::size_t nb, std::size_t dim);

}  // namespace par

// Dispatching entry points used by the rest of the library.

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double sumsq(std::span<const double> x);

bool all_finite(std::span<const double> x);

void scale(std::span<double> x, double a);
void axpy(double a, std::span<const double> x, std::span<double> y);

void gelu_forward(std::span<const double> z, std::span<double> out);
void gelu_backward(std::span<const double> z, std::span<const double> upstream,
                   std::span<double> out);

void linear_forward(const double* a, const double* w, const double* bias,
                    double* c, std::size_t m, std::size_t k, std::size_t n);
void linear_backward_input(const double* dc, const double* w, double* da,
                           std::size_t m, std::size_t k, std::size_t n);
void linear_backward_params(const double* a, const double* dc, double* dw,
                            double* db, std::size_t m, std::size_t k,
                            std::size_t n);

double pairwise_distance_sum(const double* a, std::size_t na, const double* b,
                             std::size_t nb, std::size_t dim);

// Exact GELU (x * Phi(x), error-function form) and its derivative.
double gelu(double x);
double gelu_grad(double x);

}  // namespace popt::kernels
