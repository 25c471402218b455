#pragma once

#include <cstddef>

// Dense double-precision inner loops shared by the tape ops and the
// fitting code. Every kernel has a scalar reference implementation and,
// on x86-64 with AVX2+FMA, a vectorized variant selected once at runtime.
// The two variants are equivalence-tested against each other; they may
// differ by rounding (FMA, reassociation) but not beyond ~1e-13 relative.
namespace alignnd::kernels {

enum class Backend { Scalar, Avx2 };

bool avx2_supported();
Backend active_backend();
const char* backend_name(Backend b);

// Override the dispatched backend (used by the equivalence tests and the
// CLI --kernels flag). Throws std::invalid_argument if unsupported.
void force_backend(Backend b);

double dot(const double* x, const double* y, std::size_t n);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

// y = A x        (A is m x n row-major, x has n entries, y has m)
void gemv(const double* a, std::size_t m, std::size_t n, const double* x, double* y);

// y += A^T x     (A is m x n row-major, x has m entries, y has n)
void gemv_t_acc(const double* a, std::size_t m, std::size_t n, const double* x, double* y);

// A += x y^T     (A is m x n row-major, x has m entries, y has n)
void ger_acc(double* a, std::size_t m, std::size_t n, const double* x, const double* y);

// out = x (*) y  elementwise
void hadamard(const double* x, const double* y, double* out, std::size_t n);

// out += x (*) y elementwise
void hadamard_acc(const double* x, const double* y, double* out, std::size_t n);

// y += x
void acc(const double* x, double* y, std::size_t n);

// x *= a
void scale(double a, double* x, std::size_t n);

double sum(const double* x, std::size_t n);

// Mean and population variance of x.
void mean_var(const double* x, std::size_t n, double* mean, double* var);

}  // namespace alignnd::kernels
