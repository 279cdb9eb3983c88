#pragma once

#include <cstddef>

namespace sphembed::kernels {

// Serial reference kernels. The OpenMP versions below must produce
// bit-identical output: each output element is computed by the same
// scalar inner loop, threads only split independent output rows.
namespace serial {

/// C[n×p] = A[n×m] · B[m×p]
void matmul(const double *A, const double *B, double *C, std::size_t n,
            std::size_t m, std::size_t p);

/// C[n×p] = A[m×n]ᵀ · B[m×p]
void matmul_tn(const double *A, const double *B, double *C, std::size_t n,
               std::size_t m, std::size_t p);

/// C[n×p] = A[n×m] · B[p×m]ᵀ
void matmul_nt(const double *A, const double *B, double *C, std::size_t n,
               std::size_t m, std::size_t p);

/// D[n×q] = squared Euclidean distances between rows of X[n×d] and Y[q×d]
void pairwise_sqdist(const double *X, const double *Y, double *D,
                     std::size_t n, std::size_t q, std::size_t d);

} // namespace serial

void matmul(const double *A, const double *B, double *C, std::size_t n,
            std::size_t m, std::size_t p);
void matmul_tn(const double *A, const double *B, double *C, std::size_t n,
               std::size_t m, std::size_t p);
void matmul_nt(const double *A, const double *B, double *C, std::size_t n,
               std::size_t m, std::size_t p);
void pairwise_sqdist(const double *X, const double *Y, double *D,
                     std::size_t n, std::size_t q, std::size_t d);

} // namespace sphembed::kernels
