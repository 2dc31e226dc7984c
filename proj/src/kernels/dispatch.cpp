#include <cassert>
#include <cmath>
#include <cstdlib>
#include <string_view>

#include "bvfim/kernels.hpp"

namespace bvfim::kernels {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

#if defined(BVFIM_HAVE_AVX2)
bool avx2_available() noexcept {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}
#else
bool avx2_available() noexcept { return false; }
const Table& avx2_table() noexcept { return scalar_table(); }
#endif

#if defined(BVFIM_HAVE_NEON)
bool neon_available() noexcept { return true; }
#else
bool neon_available() noexcept { return false; }
const Table& neon_table() noexcept { return scalar_table(); }
#endif

namespace {

const Table& select() noexcept {
  const char* env = std::getenv("BVFIM_ISA");
  const std::string_view want = env ? env : "";
  if (want == "scalar") return scalar_table();
  if (want.empty() || want == "avx2") {
    if (avx2_available()) return avx2_table();
  }
  if (want.empty() || want == "neon") {
    if (neon_available()) return neon_table();
  }
  return scalar_table();
}

}  // namespace

const Table& active() noexcept {
  static const Table& table = select();
  return table;
}

double dot(VecView a, VecView b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double norm2(VecView a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, VecView x, VecSpan y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void axpby(double alpha, VecView x, double beta, VecSpan y) {
  assert(x.size() == y.size());
  active().axpby(alpha, x.data(), beta, y.data(), x.size());
}

void gemv(const Matrix& a, VecView x, VecSpan y) {
  assert(x.size() == a.cols && y.size() == a.rows);
  active().gemv(a.data.data(), a.rows, a.cols, x.data(), y.data());
}

void gemv_t(const Matrix& a, VecView x, VecSpan y) {
  assert(x.size() == a.rows && y.size() == a.cols);
  active().gemv_t(a.data.data(), a.rows, a.cols, x.data(), y.data());
}

void ger(double alpha, VecView u, VecView v, Matrix& a) {
  assert(u.size() == a.rows && v.size() == a.cols);
  active().ger(alpha, u.data(), a.rows, v.data(), a.cols, a.data.data());
}

}  // namespace bvfim::kernels
