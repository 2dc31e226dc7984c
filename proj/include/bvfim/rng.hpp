#pragma once

// Portable random streams. The integer source is std::mt19937_64, whose
// output sequence is fixed by the C++ standard. Every derived quantity is
// computed here rather than through <random> distributions (whose algorithms
// are implementation-defined), so datasets are reproducible across
// compilers and platforms:
//
//   uniform()      = (next() >> 11) * 2^-53                  in [0, 1)
//   below(k)       = rejection sampling on next() against the largest
//                    multiple of k not exceeding 2^64, then value % k
//   normal()       = Box-Muller on two uniforms, u1 mapped to (0, 1] as
//                    1 - uniform(); the sine variate is cached and returned
//                    by the following call
//   shuffle(v)     = Fisher-Yates from the back: for i = n-1 .. 1,
//                    swap(v[i], v[below(i + 1)])

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <utility>

namespace bvfim {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t k) {
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % k + 1) % k;
    std::uint64_t r = next();
    while (r > limit) r = next();
    return r % k;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bvfim
