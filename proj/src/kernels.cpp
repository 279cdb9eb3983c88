#include "sphembed/kernels.hpp"

namespace sphembed::kernels {

namespace {

inline void matmul_row(const double *A, const double *B, double *C,
                       std::size_t i, std::size_t m, std::size_t p) {
    double *Ci = C + i * p;
    for (std::size_t k = 0; k < p; ++k)
        Ci[k] = 0.0;
    const double *Ai = A + i * m;
    for (std::size_t j = 0; j < m; ++j) {
        const double a = Ai[j];
        const double *Bj = B + j * p;
        for (std::size_t k = 0; k < p; ++k)
            Ci[k] += a * Bj[k];
    }
}

inline void matmul_tn_row(const double *A, const double *B, double *C,
                          std::size_t i, std::size_t n, std::size_t m,
                          std::size_t p) {
    double *Ci = C + i * p;
    for (std::size_t k = 0; k < p; ++k)
        Ci[k] = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double a = A[j * n + i];
        const double *Bj = B + j * p;
        for (std::size_t k = 0; k < p; ++k)
            Ci[k] += a * Bj[k];
    }
}

inline void matmul_nt_row(const double *A, const double *B, double *C,
                          std::size_t i, std::size_t m, std::size_t p) {
    const double *Ai = A + i * m;
    double *Ci = C + i * p;
    for (std::size_t k = 0; k < p; ++k) {
        const double *Bk = B + k * m;
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            acc += Ai[j] * Bk[j];
        Ci[k] = acc;
    }
}

inline void sqdist_row(const double *X, const double *Y, double *D,
                       std::size_t i, std::size_t q, std::size_t d) {
    const double *xi = X + i * d;
    double *Di = D + i * q;
    for (std::size_t j = 0; j < q; ++j) {
        const double *yj = Y + j * d;
        double acc = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
            const double diff = xi[t] - yj[t];
            acc += diff * diff;
        }
        Di[j] = acc;
    }
}

} // namespace

namespace serial {

void matmul(const double *A, const double *B, double *C, std::size_t n,
            std::size_t m, std::size_t p) {
    for (std::size_t i = 0; i < n; ++i)
        matmul_row(A, B, C, i, m, p);
}

void matmul_tn(const double *A, const double *B, double *C, std::size_t n,
               std::size_t m, std::size_t p) {
    for (std::size_t i = 0; i < n; ++i)
        matmul_tn_row(A, B, C, i, n, m, p);
}

void matmul_nt(const double *A, const double *B, double *C, std::size_t n,
               std::size_t m, std::size_t p) {
    for (std::size_t i = 0; i < n; ++i)
        matmul_nt_row(A, B, C, i, m, p);
}

void pairwise_sqdist(const double *X, const double *Y, double *D,
                     std::size_t n, std::size_t q, std::size_t d) {
    for (std::size_t i = 0; i < n; ++i)
        sqdist_row(X, Y, D, i, q, d);
}

} // namespace serial

void matmul(const double *A, const double *B, double *C, std::size_t n,
            std::size_t m, std::size_t p) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        matmul_row(A, B, C, static_cast<std::size_t>(i), m, p);
}

void matmul_tn(const double *A, const double *B, double *C, std::size_t n,
               std::size_t m, std::size_t p) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        matmul_tn_row(A, B, C, static_cast<std::size_t>(i), n, m, p);
}

void matmul_nt(const double *A, const double *B, double *C, std::size_t n,
               std::size_t m, std::size_t p) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        matmul_nt_row(A, B, C, static_cast<std::size_t>(i), m, p);
}

void pairwise_sqdist(const double *X, const double *Y, double *D,
                     std::size_t n, std::size_t q, std::size_t d) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        sqdist_row(X, Y, D, static_cast<std::size_t>(i), q, d);
}

} // namespace sphembed::kernels
