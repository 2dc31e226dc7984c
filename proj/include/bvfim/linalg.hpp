#pragma once

#include "bvfim/types.hpp"

namespace bvfim {

/// Solves M x = rhs for symmetric positive definite M by Cholesky.
/// Throws Error(Config) if M is not numerically positive definite.
Vec solve_spd(const Matrix& m, VecView rhs);

Matrix transpose(const Matrix& a);
Matrix multiply(const Matrix& a, const Matrix& b);

}  // namespace bvfim
