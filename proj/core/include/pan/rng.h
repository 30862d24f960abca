#ifndef PAN_RNG_H
#define PAN_RNG_H

#include <cstdint>
#include <random>

namespace pan {

// splitmix64 finalizer; used to derive independent per-task seeds from a
// master seed so results do not depend on scheduling.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t stream,
                                   std::uint64_t index = 0) {
  return MixSeed(MixSeed(master ^ MixSeed(stream)) + index);
}

// mt19937_64 is fully specified by the standard; the std distributions are
// not, so the conversions below are done by hand to keep output
// bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1).
  double Uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t Below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pan

#endif  // PAN_RNG_H
