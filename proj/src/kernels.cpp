#include "alignnd/kernels.hpp"

#include <stdexcept>

namespace alignnd::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gemv(const double* a, std::size_t m, std::size_t n, const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) y[i] = dot(a + i * n, x, n);
}

void gemv_t_acc(const double* a, std::size_t m, std::size_t n, const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) axpy(x[i], a + i * n, y, n);
}

void ger_acc(double* a, std::size_t m, std::size_t n, const double* x, const double* y) {
    for (std::size_t i = 0; i < m; ++i) axpy(x[i], y, a + i * n, n);
}

void hadamard(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void hadamard_acc(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += x[i] * y[i];
}

void acc(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void scale(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sum(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

void mean_var(const double* x, std::size_t n, double* mean, double* var) {
    const double m = n ? sum(x, n) / static_cast<double>(n) : 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - m;
        ss += d * d;
    }
    *mean = m;
    *var = n ? ss / static_cast<double>(n) : 0.0;
}

}  // namespace scalar

#ifdef ALIGNND_HAVE_AVX2_SOURCES
namespace avx2 {
double dot(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
void gemv(const double*, std::size_t, std::size_t, const double*, double*);
void gemv_t_acc(const double*, std::size_t, std::size_t, const double*, double*);
void ger_acc(double*, std::size_t, std::size_t, const double*, const double*);
void hadamard(const double*, const double*, double*, std::size_t);
void hadamard_acc(const double*, const double*, double*, std::size_t);
void acc(const double*, double*, std::size_t);
void scale(double, double*, std::size_t);
double sum(const double*, std::size_t);
void mean_var(const double*, std::size_t, double*, double*);
}  // namespace avx2
#endif

namespace {

struct Dispatch {
    Backend backend;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*gemv)(const double*, std::size_t, std::size_t, const double*, double*);
    void (*gemv_t_acc)(const double*, std::size_t, std::size_t, const double*, double*);
    void (*ger_acc)(double*, std::size_t, std::size_t, const double*, const double*);
    void (*hadamard)(const double*, const double*, double*, std::size_t);
    void (*hadamard_acc)(const double*, const double*, double*, std::size_t);
    void (*acc)(const double*, double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    void (*mean_var)(const double*, std::size_t, double*, double*);
};

constexpr Dispatch kScalar = {
    Backend::Scalar,    scalar::dot,      scalar::axpy,         scalar::gemv,
    scalar::gemv_t_acc, scalar::ger_acc,  scalar::hadamard,     scalar::hadamard_acc,
    scalar::acc,        scalar::scale,    scalar::sum,          scalar::mean_var,
};

#ifdef ALIGNND_HAVE_AVX2_SOURCES
constexpr Dispatch kAvx2 = {
    Backend::Avx2,    avx2::dot,      avx2::axpy,         avx2::gemv,
    avx2::gemv_t_acc, avx2::ger_acc,  avx2::hadamard,     avx2::hadamard_acc,
    avx2::acc,        avx2::scale,    avx2::sum,          avx2::mean_var,
};
#endif

bool detect_avx2() {
#ifdef ALIGNND_HAVE_AVX2_SOURCES
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Dispatch* select_default() {
#ifdef ALIGNND_HAVE_AVX2_SOURCES
    if (detect_avx2()) return &kAvx2;
#endif
    return &kScalar;
}

const Dispatch* g_dispatch = select_default();

}  // namespace

bool avx2_supported() { return detect_avx2(); }

Backend active_backend() { return g_dispatch->backend; }

const char* backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
    if (b == Backend::Scalar) {
        g_dispatch = &kScalar;
        return;
    }
#ifdef ALIGNND_HAVE_AVX2_SOURCES
    if (detect_avx2()) {
        g_dispatch = &kAvx2;
        return;
    }
#endif
    throw std::invalid_argument("kernels: avx2 backend not supported on this machine");
}

double dot(const double* x, const double* y, std::size_t n) { return g_dispatch->dot(x, y, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { g_dispatch->axpy(a, x, y, n); }
void gemv(const double* a, std::size_t m, std::size_t n, const double* x, double* y) {
    g_dispatch->gemv(a, m, n, x, y);
}
void gemv_t_acc(const double* a, std::size_t m, std::size_t n, const double* x, double* y) {
    g_dispatch->gemv_t_acc(a, m, n, x, y);
}
void ger_acc(double* a, std::size_t m, std::size_t n, const double* x, const double* y) {
    g_dispatch->ger_acc(a, m, n, x, y);
}
void hadamard(const double* x, const double* y, double* out, std::size_t n) {
    g_dispatch->hadamard(x, y, out, n);
}
void hadamard_acc(const double* x, const double* y, double* out, std::size_t n) {
    g_dispatch->hadamard_acc(x, y, out, n);
}
void acc(const double* x, double* y, std::size_t n) { g_dispatch->acc(x, y, n); }
void scale(double a, double* x, std::size_t n) { g_dispatch->scale(a, x, n); }
double sum(const double* x, std::size_t n) { return g_dispatch->sum(x, n); }
void mean_var(const double* x, std::size_t n, double* mean, double* var) {
    g_dispatch->mean_var(x, n, mean, var);
}

}  // namespace alignnd::kernels
