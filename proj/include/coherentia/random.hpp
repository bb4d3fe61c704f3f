#ifndef COHERENTIA_RANDOM_HPP
#define COHERENTIA_RANDOM_HPP

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace coherentia {

// Seeded generator whose derived draws are identical on every standard
// library: std::mt19937_64 output is fully specified, but the std
// distributions and std::shuffle are not, so we derive from raw bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for a (seed, stream) pair.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on [0, n); n > 0.
  std::uint64_t index(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace coherentia

#endif  // COHERENTIA_RANDOM_HPP
