#pragma once

// Dense double-precision vector kernels used by every oracle and solver
// loop. Each kernel has a portable scalar reference and an ISA-specific
// variant; the variant is chosen once per process from CPUID (or from the
// BVFIM_ISA environment variable: "scalar", "avx2", "neon").

#include <cstddef>
#include <string_view>

#include "bvfim/types.hpp"

namespace bvfim::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

/// Raw-pointer kernel table. All matrices are row-major.
struct Table {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = alpha * x + beta * y
  void (*axpby)(double alpha, const double* x, double beta, double* y, std::size_t n);
  // y = A x  (A is rows x cols)
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y = A^T x
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // A += alpha * u v^T
  void (*ger)(double alpha, const double* u, std::size_t rows, const double* v, std::size_t cols,
              double* a);
  // bias-corrected Adam moment update; writes the parameter increment to delta
  void (*adam)(const double* g, double* m, double* v, double* delta, std::size_t n, double lr,
               double beta1, double beta2, double eps, double bias1, double bias2);
};

const Table& scalar_table() noexcept;
bool avx2_available() noexcept;
const Table& avx2_table() noexcept;  // only valid when avx2_available()
bool neon_available() noexcept;
const Table& neon_table() noexcept;  // only valid when neon_available()

/// The table selected for this process.
const Table& active() noexcept;

// Span wrappers over active(). Sizes are checked with assert only.
double dot(VecView a, VecView b);
double norm2(VecView a);
void axpy(double alpha, VecView x, VecSpan y);
void axpby(double alpha, VecView x, double beta, VecSpan y);
void gemv(const Matrix& a, VecView x, VecSpan y);
void gemv_t(const Matrix& a, VecView x, VecSpan y);
void ger(double alpha, VecView u, VecView v, Matrix& a);

}  // namespace bvfim::kernels
