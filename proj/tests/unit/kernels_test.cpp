#include <doctest.h>

#include <cmath>
#include <vector>

#include "bvfim/kernels.hpp"
#include "bvfim/rng.hpp"

using namespace bvfim;
using namespace bvfim::kernels;

namespace {

std::vector<const Table*> vector_tables() {
  std::vector<const Table*> out;
  if (avx2_available()) out.push_back(&avx2_table());
  if (neon_available()) out.push_back(&neon_table());
  return out;
}

Vec random_vec(Rng& rng, std::size_t n) {
  Vec v(n);
  for (auto& e : v) e = rng.normal();
  return v;
}

// FMA and lane-wise summation reorder the arithmetic, so reductions agree
// to a bound proportional to n * eps * sum |a_i b_i|.
void check_close(double a, double b, double scale) { CHECK(std::abs(a - b) <= 1e-14 * scale + 1e-300); }

}  // namespace

TEST_CASE("vector kernels agree with the scalar reference across tail lengths") {
  const Table& ref = scalar_table();
  const auto tables = vector_tables();
  if (tables.empty()) MESSAGE("no vector ISA on this machine; only the scalar table is exercised");
  Rng rng(42);
  for (const Table* t : tables) {
    CAPTURE(to_string(t->isa));
    for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 67, 1000}) {
      CAPTURE(n);
      const Vec a = random_vec(rng, n), b = random_vec(rng, n);
      double scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]);
      check_close(t->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), scale * (n + 1));

      Vec y1 = b, y2 = b;
      t->axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) check_close(y1[i], y2[i], std::abs(y2[i]) + 1.0);

      y1 = b, y2 = b;
      t->axpby(-1.5, a.data(), 0.25, y1.data(), n);
      ref.axpby(-1.5, a.data(), 0.25, y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) check_close(y1[i], y2[i], std::abs(y2[i]) + 1.0);

      Vec m1(n, 0.1), v1(n, 0.2), d1(n), m2 = m1, v2 = v1, d2(n);
      t->adam(a.data(), m1.data(), v1.data(), d1.data(), n, 0.01, 0.9, 0.999, 1e-8, 0.1, 0.001);
      ref.adam(a.data(), m2.data(), v2.data(), d2.data(), n, 0.01, 0.9, 0.999, 1e-8, 0.1, 0.001);
      for (std::size_t i = 0; i < n; ++i) {
        check_close(m1[i], m2[i], 1.0);
        check_close(v1[i], v2[i], 1.0);
        check_close(d1[i], d2[i], 1.0);
      }
    }
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{1, 1}, {3, 5}, {7, 9}, {16, 4}, {33, 17}, {5, 100}}) {
      CAPTURE(rows);
      CAPTURE(cols);
      const Vec a = random_vec(rng, rows * cols), x = random_vec(rng, cols), xt = random_vec(rng, rows);
      Vec y1(rows), y2(rows), z1(cols), z2(cols);
      t->gemv(a.data(), rows, cols, x.data(), y1.data());
      ref.gemv(a.data(), rows, cols, x.data(), y2.data());
      for (std::size_t i = 0; i < rows; ++i) check_close(y1[i], y2[i], 10.0 * cols);
      t->gemv_t(a.data(), rows, cols, xt.data(), z1.data());
      ref.gemv_t(a.data(), rows, cols, xt.data(), z2.data());
      for (std::size_t j = 0; j < cols; ++j) check_close(z1[j], z2[j], 10.0 * rows);
      Vec g1 = a, g2 = a;
      t->ger(0.5, xt.data(), rows, x.data(), cols, g1.data());
      ref.ger(0.5, xt.data(), rows, x.data(), cols, g2.data());
      for (std::size_t i = 0; i < rows * cols; ++i) check_close(g1[i], g2[i], 10.0);
    }
  }
}

TEST_CASE("scalar kernels match hand-computed values") {
  const Table& t = scalar_table();
  const double a[] = {1, 2, 3}, b[] = {4, -5, 6};
  CHECK(t.dot(a, b, 3) == doctest::Approx(12.0));
  double y[] = {1, 1, 1};
  t.axpy(2.0, a, y, 3);
  CHECK(y[2] == 7.0);
  const double m[] = {1, 2, 3, 4, 5, 6};  // 2 x 3
  double out2[2], out3[3];
  t.gemv(m, 2, 3, a, out2);
  CHECK(out2[0] == 14.0);
  CHECK(out2[1] == 32.0);
  const double v[] = {1, -1};
  t.gemv_t(m, 2, 3, v, out3);
  CHECK(out3[0] == -3.0);
  CHECK(out3[2] == -3.0);
}

TEST_CASE("the active table is one of the available ones") {
  const Isa isa = active().isa;
  if (isa == Isa::Avx2) CHECK(avx2_available());
  if (isa == Isa::Neon) CHECK(neon_available());
  CHECK(norm2(Vec{3.0, 4.0}) == doctest::Approx(5.0));
}
