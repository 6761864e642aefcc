#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace lfa {

// std::mt19937_64 with the draw algorithms spelled out. The standard
// distributions are implementation-defined, so uniform draws and shuffles
// are written here explicitly; the same seed gives the same sequence on
// every standard library.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53 random bits.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [0, hi).
  double next_uniform(double hi) { return next_unit() * hi; }

  // Uniform integer in [0, n). Modulo reduction; the bias is under 2^-32
  // for any n below 2^32, well past anything observable here.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % static_cast<std::uint64_t>(n));
  }

  // Fisher-Yates, high index down.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t j = items.size(); j > 1; --j) {
      std::swap(items[j - 1], items[next_index(j)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lfa
